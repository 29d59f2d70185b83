#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dechist/qbm_kernels.hpp"
#include "dechist/two_state.hpp"

namespace dechist::scenario {

/// Exit codes shared by the library and the command line front end.
enum ExitCode : int {
    exit_ok = 0,
    exit_parse = 2,      // parse or validation failure
    exit_numerical = 3,  // resonance, non-convergence, numeric failure
    exit_io = 4,
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int column)
        : std::runtime_error(message + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line(line),
          column(column) {}
    int line;
    int column;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { two_state, kernels, qbm_fourier, qbm_records, info_count, generic_histories };
enum class OutputFormat { csv, json };

std::string to_string(Kind kind);
std::string to_string(OutputFormat format);

struct BathSection {
    qbm::SpectralDensity::Kind kind = qbm::SpectralDensity::Kind::discrete;
    std::vector<qbm::BathMode> modes;  // discrete
    double m_gamma = 0.0;              // ohmic
    double cutoff = 0.0;
    double temperature = 0.0;
    double hbar = 1.0;

    qbm::OscillatorBath bath() const;
    qbm::SpectralDensity density() const;
};

struct KernelsSection {
    double s_max = 1.0;
    int samples = 101;
};

struct QbmSection {
    double box_length = 1.0;
    double tau = 1.0;
    int path_knots = 256;
    double delta = 1.0;        // coarse-graining width of the mode functionals
    double window_lo = -1.0;   // record window in oscillator position
    double window_hi = 1.0;
    double threshold = 10.0;   // decoherence exponent threshold
};

struct InfoCountSection {
    double box_length = 1.0;
    double tau = 1.0;
    std::vector<double> temperatures;
};

struct GenericHistoriesSection {
    int dim = 6;
    std::vector<double> times;
    std::vector<int> alternatives;  // family sizes, one per time
    bool conserved = true;
    bool mixed_state = true;
};

struct Scenario {
    std::string name;
    Kind kind = Kind::two_state;
    OutputFormat format = OutputFormat::csv;
    std::uint64_t seed = 0;
    std::optional<double> tolerance;

    std::optional<twostate::Config> two_state;
    std::optional<BathSection> bath;
    std::optional<KernelsSection> kernels;
    std::optional<QbmSection> qbm;
    std::optional<InfoCountSection> info_count;
    std::optional<GenericHistoriesSection> generic_histories;
};

Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<string>");

/// Canonical serialization: fixed section and key order, shortest
/// round-trip decimals, one blank line between sections.
std::string serialize(const Scenario& scenario);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::optional<OutputFormat> format;
    std::optional<double> tolerance;
    std::optional<std::uint64_t> seed;
};

struct RunReport {
    std::string name;
    Kind kind;
    double wall_seconds = 0.0;
    std::string summary_json;  // the summary written to disk (deterministic)
    std::vector<std::filesystem::path> output_files;
};

/// Execute the scenario and write its table and summary files into the
/// output directory. Deterministic given (scenario, seed): repeated
/// runs produce byte-identical files.
RunReport run(const Scenario& scenario, const RunOptions& options = {});

/// Short round-trip decimal formatting used for all table output.
std::string format_double(double v);

}  // namespace dechist::scenario
