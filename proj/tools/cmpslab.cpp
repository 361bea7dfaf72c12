// cmpslab command line: run / resume / report / bethe.
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cmpslab/csv.hpp"
#include "cmpslab/errors.hpp"
#include "cmpslab/logging.hpp"
#include "cmpslab/runner.hpp"
#include "cmpslab/version.hpp"

namespace {

enum Exit { kOk = 0, kFailedPoints = 1, kConfig = 2, kRun = 3 };

int summarize(const cmpslab::RunSummary& s) {
    std::cout << s.dir.string() << ": " << s.computed << " computed, " << s.skipped
              << " already present";
    if (s.ok()) {
        std::cout << "\n";
        return kOk;
    }
    std::cout << ", " << s.failed.size() << " failed\n";
    for (const auto& id : s.failed) std::cerr << "failed: " << id << "\n";
    return kFailedPoints;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cMPS variational solver for Lieb-Liniger gases"};
    app.set_version_flag("--version", std::string(cmpslab::kVersion));
    app.require_subcommand(1);

    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    auto* run = app.add_subcommand("run", "run a configuration");
    std::string config_path;
    run->add_option("config", config_path, "config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--jobs,-j", jobs, "worker threads")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out, "override the output directory");

    auto* resume = app.add_subcommand("resume", "complete a partial run");
    std::string resume_dir;
    resume->add_option("dir", resume_dir, "run directory")->required()->check(CLI::ExistingDirectory);
    resume->add_option("--jobs,-j", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "write plot-ready tables for a finished run");
    std::string report_dir;
    report->add_option("dir", report_dir, "run directory")->required()->check(CLI::ExistingDirectory);

    auto* bethe = app.add_subcommand("bethe", "exact Lieb-Liniger energies e(gamma)");
    std::vector<double> gammas;
    int nodes = 256;
    bethe->add_option("--gamma", gammas, "comma separated couplings")->required()->delimiter(',');
    bethe->add_option("--nodes", nodes, "quadrature nodes")->check(CLI::Range(64, 8192));
    bethe->add_option("--out", out, "write DIR/bethe.csv instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        cmpslab::configure_logging(run->parsed() || resume->parsed() ? "info" : "warn");
        if (run->parsed()) {
            cmpslab::RunConfig cfg = cmpslab::load_run_config(config_path);
            if (seed) {
                cfg.seed = *seed;
                cfg.optimizer.seed = *seed;
            }
            if (out) cfg.output = *out;
            return summarize(cmpslab::run(cfg, {jobs}));
        }
        if (resume->parsed()) {
            return summarize(cmpslab::resume(resume_dir, {jobs}));
        }
        if (report->parsed()) {
            for (const auto& path : cmpslab::report(report_dir)) std::cout << path.string() << "\n";
            return kOk;
        }
        if (bethe->parsed()) {
            const cmpslab::CsvTable table = cmpslab::bethe_table(gammas, nodes);
            if (out) {
                cmpslab::write_csv(std::filesystem::path(*out) / "bethe.csv", table);
            } else {
                std::cout << cmpslab::to_csv(table);
            }
            return kOk;
        }
    } catch (const cmpslab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const cmpslab::InvalidParams& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return kConfig;
    } catch (const cmpslab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRun;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRun;
    }
    return kOk;
}
