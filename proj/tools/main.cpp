#include <iostream>
#include <mutex>
#include <queue>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dechist/qbm_kernels.hpp"
#include "dechist/scenario.hpp"

namespace {

using dechist::scenario::ExitCode;

int classify(const std::exception& e) {
    if (dynamic_cast<const dechist::scenario::ParseError*>(&e)) return ExitCode::exit_parse;
    if (dynamic_cast<const dechist::scenario::ValidationError*>(&e)) return ExitCode::exit_parse;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return ExitCode::exit_parse;
    if (dynamic_cast<const dechist::scenario::IoError*>(&e)) return ExitCode::exit_io;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return ExitCode::exit_io;
    return ExitCode::exit_numerical;  // resonance, non-convergence, numeric failures
}

void print_error(const std::string& scenario, const std::exception& e, int code) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    err["scenario"] = scenario;
    err["exit_code"] = code;
    std::cout << err.dump(2) << std::endl;
}

int run_one(const std::filesystem::path& config, const dechist::scenario::RunOptions& options,
            std::mutex& io_mutex) {
    std::string name = config.string();
    try {
        const dechist::scenario::Scenario scenario = dechist::scenario::parse_scenario(config);
        name = scenario.name;
        const dechist::scenario::RunReport report = dechist::scenario::run(scenario, options);
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << "ran " << report.name << " ("
                  << dechist::scenario::to_string(report.kind) << ") in "
                  << report.wall_seconds << " s\n";
        for (const auto& file : report.output_files) std::cout << "  wrote " << file.string() << "\n";
        return ExitCode::exit_ok;
    } catch (const std::exception& e) {
        const int code = classify(e);
        std::lock_guard<std::mutex> lock(io_mutex);
        print_error(name, e, code);
        return code;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decoherent-histories scenario runner"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out_dir = ".";
    std::string format;
    double tolerance = -1.0;
    std::int64_t seed = -1;
    int threads = 1;

    CLI::App* run_cmd = app.add_subcommand("run", "run scenarios and write their outputs");
    run_cmd->add_option("--config", configs, "scenario file(s)")->required()->expected(-1);
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--format", format, "override output format")
        ->check(CLI::IsMember({"csv", "json"}));
    run_cmd->add_option("--tolerance", tolerance, "override decoherence tolerance");
    run_cmd->add_option("--seed", seed, "override the scenario seed");
    run_cmd->add_option("--threads", threads, "scenarios run concurrently")
        ->check(CLI::PositiveNumber);

    std::string validate_path;
    CLI::App* validate_cmd = app.add_subcommand("validate", "parse and validate a scenario file");
    validate_cmd->add_option("--config", validate_path, "scenario file")->required();

    std::string canon_path;
    CLI::App* canon_cmd =
        app.add_subcommand("canon", "print the canonical serialization of a scenario file");
    canon_cmd->add_option("--config", canon_path, "scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate_cmd->parsed() || canon_cmd->parsed()) {
        const std::string path = validate_cmd->parsed() ? validate_path : canon_path;
        try {
            const auto scenario = dechist::scenario::parse_scenario(path);
            if (canon_cmd->parsed())
                std::cout << dechist::scenario::serialize(scenario);
            else
                std::cout << "ok: " << scenario.name << " ("
                          << dechist::scenario::to_string(scenario.kind) << ")\n";
            return ExitCode::exit_ok;
        } catch (const std::exception& e) {
            const int code = classify(e);
            print_error(path, e, code);
            return code;
        }
    }

    dechist::scenario::RunOptions options;
    options.out_dir = out_dir;
    if (!format.empty())
        options.format = (format == "csv") ? dechist::scenario::OutputFormat::csv
                                           : dechist::scenario::OutputFormat::json;
    if (tolerance >= 0.0) options.tolerance = tolerance;
    if (seed >= 0) options.seed = static_cast<std::uint64_t>(seed);

    // Bounded pool over independent scenarios.
    std::mutex io_mutex;
    std::mutex queue_mutex;
    std::queue<std::filesystem::path> pending;
    for (const std::string& c : configs) pending.push(c);
    int worst = ExitCode::exit_ok;

    auto worker = [&] {
        for (;;) {
            std::filesystem::path config;
            {
                std::lock_guard<std::mutex> lock(queue_mutex);
                if (pending.empty()) return;
                config = pending.front();
                pending.pop();
            }
            const int code = run_one(config, options, io_mutex);
            std::lock_guard<std::mutex> lock(queue_mutex);
            worst = std::max(worst, code);
        }
    };

    std::vector<std::thread> pool;
    const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(configs.size())));
    for (int i = 0; i < n_workers - 1; ++i) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return worst;
}
