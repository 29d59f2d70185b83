#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "dechist/histories.hpp"
#include "dechist/qbm_records.hpp"
#include "dechist/random.hpp"
#include "dechist/scenario.hpp"

namespace dechist::scenario {

using ordered_json = nlohmann::ordered_json;

namespace {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const {
        std::ostringstream out;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out << ",";
            out << columns[c];
        }
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ",";
                out << row[c];
            }
            out << "\n";
        }
        return out.str();
    }

    ordered_json json() const {
        ordered_json rows_json = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json obj = ordered_json::object();
            for (std::size_t c = 0; c < row.size(); ++c) obj[columns[c]] = row[c];
            rows_json.push_back(obj);
        }
        return rows_json;
    }
};

std::string fmt(double v) { return format_double(v); }

PureState gaussian_packet(const twostate::Config& config) {
    // Canonical initial state of the two-state runs: a packet in the
    // left quarter of the box drifting to the right.
    const int n = config.grid_points;
    const double dx = config.box_length / n;
    const double x0 = 0.25 * config.box_length;
    const double sigma = config.box_length / 16.0;
    const double k0 = 8.0 * std::numbers::pi / config.box_length;
    StateVector psi(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * dx;
        psi(i) = std::exp(Complex(-(x - x0) * (x - x0) / (4.0 * sigma * sigma), k0 * x));
    }
    psi /= psi.norm();
    return PureState(std::move(psi));
}

struct Outputs {
    Table table;
    ordered_json summary;
};

Outputs run_two_state(const Scenario& s) {
    const twostate::Config& config = *s.two_state;
    const twostate::Model model = twostate::build_model(config);
    const PureState psi = gaussian_packet(config);

    const twostate::JointTable joint = twostate::joint_prob_mixed(model, psi);
    const histories::DecoherenceMatrix d = twostate::history_decoherence_matrix(model, psi);

    Table table;
    table.columns = {"alpha1", "alpha2", "beta", "probability"};
    const char* alpha1_names[2] = {"y", "n"};
    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < joint.n_bins; ++a2)
            for (int beta = 0; beta < 2; ++beta)
                table.rows.push_back({alpha1_names[a1], "bin" + std::to_string(a2),
                                      std::to_string(beta), fmt(joint.p(a1, a2, beta))});

    double max_conditional = 0.0;
    for (int a1 = 0; a1 < 2; ++a1) {
        if (joint.marginal_alpha1(a1) <= 0.0) continue;
        for (int beta = 0; beta < 2; ++beta)
            max_conditional = std::max(max_conditional, joint.conditional_record(a1, beta));
    }

    Outputs out;
    out.table = std::move(table);
    out.summary["decoherence_defect"] = histories::decoherence_defect(d);
    out.summary["consistency_defect"] = histories::consistency_defect(d);
    out.summary["max_conditional_record_probability"] = max_conditional;
    out.summary["detection_probability"] = twostate::detection_probability(model, psi);
    out.summary["metadata"] = {
        {"final_family", "position bins over the box"},
        {"final_bins", config.final_bins},
        {"lambda_over_hbar", config.lambda_over_hbar},
        {"weights", {config.weight_a, config.weight_b}},
        {"initial_state", "gaussian packet, center L/4, sigma L/16, k 8*pi/L"},
    };
    return out;
}

Outputs run_kernels(const Scenario& s) {
    const BathSection& bath = *s.bath;
    const qbm::SpectralDensity density = bath.density();
    const KernelsSection& grid = *s.kernels;

    Table table;
    table.columns = {"s", "eta", "nu", "gamma"};
    for (int i = 0; i < grid.samples; ++i) {
        const double lag = grid.s_max * i / (grid.samples - 1);
        double eta = 0.0;
        if (bath.kind == qbm::SpectralDensity::Kind::discrete) {
            eta = qbm::eta_kernel(lag, bath.bath());
        } else {
            const double l2 = bath.cutoff * bath.cutoff;
            eta = bath.m_gamma * bath.cutoff / (2.0 * std::sqrt(std::numbers::pi)) *
                  (-l2 * lag / 2.0) * std::exp(-l2 * lag * lag / 4.0);
        }
        const qbm::KernelSample k = qbm::spectral_kernels(density, lag);
        table.rows.push_back({fmt(lag), fmt(eta), fmt(k.nu), fmt(k.gamma)});
    }

    Outputs out;
    out.table = std::move(table);
    out.summary["gamma_at_zero"] = qbm::spectral_kernels(density, 0.0).gamma;
    out.summary["nu_at_zero"] = qbm::spectral_kernels(density, 0.0).nu;
    if (bath.kind == qbm::SpectralDensity::Kind::ohmic)
        out.summary["metadata"] = {
            {"gamma_form", "mgamma*cutoff/(2*sqrt(pi)) * exp(-cutoff^2 s^2/4)"},
            {"nu_quadrature", "adaptive gauss-kronrod, relative tolerance 1e-8, cutoff 40*Lambda"},
        };
    return out;
}

Outputs run_qbm(const Scenario& s, bool with_records) {
    const QbmSection& q = *s.qbm;
    const qbm::OscillatorBath bath = s.bath->bath();
    Rng rng(s.seed);
    const qbm::DiscretizedPath x =
        qbm::random_smooth_path(rng, q.tau, q.path_knots + 1, 4, q.box_length / 4.0);
    const qbm::DiscretizedPath y =
        qbm::random_smooth_path(rng, q.tau, q.path_knots + 1, 4, q.box_length / 4.0);

    std::vector<qbm::FourierModes> mx, my;
    for (const qbm::BathMode& m : bath.modes) {
        mx.push_back(qbm::fourier_modes(x, m));
        my.push_back(qbm::fourier_modes(y, m));
    }

    Table table;
    table.columns = {"mode",         "x_sin",        "x_cos",   "im_w",
                     "suppression",  "history_width", "record_width"};
    if (with_records) table.columns.push_back("trace_factor");
    table.columns.insert(table.columns.end(), {"n_d_max", "n_env", "ratio"});

    for (std::size_t n = 0; n < bath.modes.size(); ++n) {
        const qbm::BathMode& m = bath.modes[n];
        const qbm::OscillatorBath single{{m}, bath.temperature, bath.hbar};
        const double im_w = qbm::im_w_fourier({mx[n]}, {my[n]}, single);
        const qbm::DecoherenceCondition cond =
            qbm::decoherence_condition(m, bath.temperature, q.delta, bath.hbar, q.threshold);
        const qbm::GaussianWidths widths = qbm::gaussian_widths(m, bath.temperature, bath.hbar);
        const qbm::InfoCount info =
            qbm::info_counts(m, bath.temperature, q.box_length, q.tau, bath.hbar);

        std::vector<std::string> row = {std::to_string(n),      fmt(mx[n].x_sin),
                                        fmt(mx[n].x_cos),       fmt(im_w),
                                        fmt(cond.adjacent_suppression), fmt(widths.history_width),
                                        fmt(widths.record_width)};
        if (with_records) {
            const double factor = qbm::record_trace_factor(
                qbm::Window{q.window_lo, q.window_hi}, m, bath.temperature, bath.hbar, mx[n]);
            row.push_back(fmt(factor));
        }
        row.insert(row.end(), {fmt(info.n_d_max), fmt(info.n_env), fmt(info.ratio)});
        table.rows.push_back(std::move(row));
    }

    const std::complex<double> w_grid = qbm::influence_phase(x, y, bath);
    const double im_w_modes = qbm::im_w_fourier(mx, my, bath);
    const double rel = std::abs(w_grid.imag() - im_w_modes) /
                       std::max(1e-300, std::abs(im_w_modes));

    Outputs out;
    out.table = std::move(table);
    out.summary["im_w_grid"] = w_grid.imag();
    out.summary["im_w_fourier"] = im_w_modes;
    out.summary["im_w_relative_difference"] = rel;
    out.summary["re_w_grid"] = w_grid.real();
    out.summary["decoherence_threshold"] = q.threshold;
    out.summary["metadata"] = {
        {"widths",
         "history_width = sqrt(hbar*tanh(hbar*omega/2kT)/(m*omega)); record_width = "
         "sqrt(hbar*coth(hbar*omega/2kT)/(m*omega)); derived from the thermal Gaussian "
         "coefficients"},
        {"history_count_convention",
         "n_d_max counts (L*tau/Delta)^2 cells over both mode functionals with "
         "proportionality constant 1"},
        {"paths", "two seeded smooth harmonic sums, amplitude box_length/4"},
    };
    return out;
}

Outputs run_info_count(const Scenario& s) {
    const InfoCountSection& section = *s.info_count;

    Table table;
    table.columns = {"mode", "omega", "temperature", "n_d_max", "n_env", "ratio",
                     "entropy_factor"};
    for (std::size_t n = 0; n < s.bath->modes.size(); ++n) {
        const qbm::BathMode& mode = s.bath->modes[n];
        for (double t : section.temperatures) {
            const qbm::InfoCount info =
                qbm::info_counts(mode, t, section.box_length, section.tau, s.bath->hbar);
            table.rows.push_back({std::to_string(n), fmt(mode.omega), fmt(t), fmt(info.n_d_max),
                                  fmt(info.n_env), fmt(info.ratio), fmt(info.entropy_factor)});
        }
    }

    Outputs out;
    out.table = std::move(table);
    out.summary["metadata"] = {
        {"ratio", "coth(hbar*omega/2kT); equals 1 at T = 0"},
        {"high_temperature_limit", "ratio -> 2kT/(hbar*omega)"},
        {"entropy_factor", "exp(S) with S the thermal oscillator von Neumann entropy; "
                           "agrees with ratio only at high temperature"},
    };
    return out;
}

ProjectorFamily family_from_basis(const Operator& basis, int family_size) {
    // Contiguous blocks of basis columns, as even as possible.
    const int dim = static_cast<int>(basis.rows());
    std::vector<Operator> members;
    std::vector<std::string> labels;
    for (int b = 0; b < family_size; ++b) {
        const int lo = (dim * b) / family_size;
        const int hi = (dim * (b + 1)) / family_size;
        Operator p = Operator::Zero(dim, dim);
        for (int i = lo; i < hi; ++i)
            p += basis.col(i) * basis.col(i).adjoint();
        p = (p + p.adjoint()) / 2.0;
        members.push_back(std::move(p));
        labels.push_back("a" + std::to_string(b));
    }
    return ProjectorFamily(std::move(members), std::move(labels));
}

Outputs run_generic_histories(const Scenario& s) {
    const GenericHistoriesSection& g = *s.generic_histories;
    Rng rng(s.seed);

    const Operator basis = random_unitary(rng, g.dim);
    Eigen::VectorXd energies(g.dim);
    for (int i = 0; i < g.dim; ++i) energies(i) = i + 0.5 * rng.uniform();
    Operator h = basis * energies.cast<Complex>().asDiagonal() * basis.adjoint();
    h = (h + h.adjoint()) / 2.0;

    histories::HistorySpec spec;
    spec.hamiltonian = h;
    spec.times = g.times;
    for (int size : g.alternatives) {
        const Operator family_basis = g.conserved ? basis : random_unitary(rng, g.dim);
        spec.families.push_back(family_from_basis(family_basis, size));
    }

    const DensityOperator rho = g.mixed_state
                                    ? random_density(rng, g.dim)
                                    : random_pure_state(rng, g.dim).density();
    const double tolerance = s.tolerance.value_or(histories::default_decoherence_tolerance);
    const histories::DecoherenceMatrix d = histories::decoherence_matrix(spec, rho, tolerance);
    const histories::ProbabilityTable probs = histories::probabilities(d);

    Table table;
    table.columns = {"history", "probability"};
    for (std::size_t i = 0; i < probs.p.size(); ++i) {
        const histories::HistoryIndex alpha = d.index_at(i);
        std::string name;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            if (k) name += "|";
            name += d.labels()[k][static_cast<std::size_t>(alpha[k])];
        }
        table.rows.push_back({name, fmt(probs.p[i])});
    }

    Outputs out;
    out.table = std::move(table);
    out.summary["decoherence_defect"] = histories::decoherence_defect(d);
    out.summary["consistency_defect"] = histories::consistency_defect(d);
    out.summary["sum_rule_defect"] = probs.sum_rule_defect;
    out.summary["decoherent"] =
        histories::decoherence_defect(d) <= tolerance;
    out.summary["tolerance"] = tolerance;

    // Full functional, complex entries as [re, im] pairs, row-major
    // over the lexicographic history order.
    ordered_json dj;
    dj["family_sizes"] = d.family_sizes();
    dj["labels"] = d.labels();
    ordered_json entries = ordered_json::array();
    for (Eigen::Index i = 0; i < d.entries().rows(); ++i)
        for (Eigen::Index j = 0; j < d.entries().cols(); ++j)
            entries.push_back({d.entries()(i, j).real(), d.entries()(i, j).imag()});
    dj["entries"] = entries;
    out.summary["decoherence_matrix"] = dj;
    out.summary["metadata"] = {
        {"construction", g.conserved ? "families commute with the Hamiltonian"
                                     : "independent random families"},
        {"state", g.mixed_state ? "random mixed" : "random pure"},
    };
    return out;
}

}  // namespace

RunReport run(const Scenario& scenario_in, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();

    Scenario s = scenario_in;
    if (options.format) s.format = *options.format;
    if (options.tolerance) s.tolerance = *options.tolerance;
    if (options.seed) s.seed = *options.seed;

    Outputs outputs;
    switch (s.kind) {
        case Kind::two_state: outputs = run_two_state(s); break;
        case Kind::kernels: outputs = run_kernels(s); break;
        case Kind::qbm_fourier: outputs = run_qbm(s, false); break;
        case Kind::qbm_records: outputs = run_qbm(s, true); break;
        case Kind::info_count: outputs = run_info_count(s); break;
        case Kind::generic_histories: outputs = run_generic_histories(s); break;
    }

    RunReport report;
    report.name = s.name;
    report.kind = s.kind;

    const std::filesystem::path table_path =
        options.out_dir / (s.name + (s.format == OutputFormat::csv ? ".csv" : ".json"));
    const std::filesystem::path summary_path = options.out_dir / (s.name + "_summary.json");

    ordered_json summary;
    summary["name"] = s.name;
    summary["kind"] = to_string(s.kind);
    summary["seed"] = s.seed;
    for (auto& [key, value] : outputs.summary.items()) summary[key] = value;
    summary["outputs"] = {table_path.filename().string(), summary_path.filename().string()};

    if (s.format == OutputFormat::csv)
        write_file_atomic(table_path, outputs.table.csv());
    else
        write_file_atomic(table_path, outputs.table.json().dump(2) + "\n");
    const std::string summary_text = summary.dump(2) + "\n";
    write_file_atomic(summary_path, summary_text);

    report.summary_json = summary_text;
    report.output_files = {table_path, summary_path};
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace dechist::scenario
