// Command-line front end: runs one configured experiment and writes its
// report. Exit codes: 0 success, 2 validation, 3 I/O, 4 other domain
// errors. Failures print a single machine-readable JSON line to stderr.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "picosync/picosync.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", args.out_path, "output report path (overrides config)");
    cmd->add_option("--format", args.format, "report format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", args.seed, "seed override (u64)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads for sweep trials");
}

void print_error_line(const char* code, const std::string& message,
                      const std::vector<std::string>& fields = {}) {
    nlohmann::ordered_json e{{"error", code}, {"message", message}};
    if (!fields.empty()) e["fields"] = fields;
    std::cerr << e.dump() << "\n";
}

int run(const CommonArgs& args, picosync::ExperimentKind expected) {
    using namespace picosync;
    ExperimentConfig cfg = load_experiment_config(args.config_path);
    if (cfg.experiment != expected)
        throw validation_error(
            std::string("config experiment is '") + to_string(cfg.experiment) +
                "' but the '" + to_string(expected) + "' subcommand was invoked",
            {"experiment"});
    if (args.seed_set) cfg.seed = args.seed;
    if (args.threads > 0) cfg.threads = args.threads;
    const std::string out = args.out_path.empty() ? cfg.output_path : args.out_path;
    const ReportFormat format =
        args.format == "json" ? ReportFormat::Json : ReportFormat::Csv;
    const std::size_t n = run_experiment_to_file(cfg, out, format);
    std::cout << to_string(cfg.experiment) << ": wrote " << n << " records to "
              << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"picosync: two-way time-transfer simulation experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* snr = app.add_subcommand("snr-sweep", "Monte Carlo sweep over SNR");
    auto* sep = app.add_subcommand("tone-sep-sweep",
                                   "Monte Carlo sweep over tone separation");
    auto* bias = app.add_subcommand("bias-curve",
                                    "noiseless estimator bias across one sample");
    auto* camp = app.add_subcommand("campaign",
                                    "resynchronization campaign with corrections");
    for (auto* cmd : {snr, sep, bias, camp}) add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    picosync::ExperimentKind kind = picosync::ExperimentKind::SnrSweep;
    if (sep->parsed()) kind = picosync::ExperimentKind::ToneSepSweep;
    if (bias->parsed()) kind = picosync::ExperimentKind::BiasCurve;
    if (camp->parsed()) kind = picosync::ExperimentKind::Campaign;

    try {
        return run(args, kind);
    } catch (const picosync::validation_error& e) {
        print_error_line("validation", e.what(), e.fields());
        return 2;
    } catch (const picosync::io_error& e) {
        print_error_line("io", e.what());
        return 3;
    } catch (const picosync::error& e) {
        print_error_line("domain", e.what());
        return 4;
    } catch (const std::exception& e) {
        print_error_line("internal", e.what());
        return 5;
    }
}
