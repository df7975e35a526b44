#include "hjm/experiments.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

// 0 = every check passed, 1 = a check failed, 2 = a standing hypothesis of
// the transfer theory is violated, 3 = the scenario or invocation is unusable.
constexpr int kConfigExit = 3;

void write_report_csv(const hjm::Report& r, std::ostream& out) {
    out << "name,measured,tolerance,comparator,pass\n";
    out.precision(17);
    for (const auto& c : r.checks)
        out << c.name << ',' << c.measured << ',' << c.tolerance << ','
            << c.comparator << ',' << (c.pass ? 1 : 0) << '\n';
    out << "status," << r.status << ",,,\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamilton-Jacobi experiments between an ambient space and an "
                 "embedded invariant submanifold"};
    app.require_subcommand(1);

    std::string file;
    std::string out_dir = ".";
    std::string format;
    int refine = 1;
    std::optional<long long> seed;

    auto* run_cmd = app.add_subcommand("run", "run a scenario and write its report");
    run_cmd->add_option("file", file, "scenario JSON file")->required();
    run_cmd->add_option("--out", out_dir, "directory receiving the report");
    run_cmd->add_option("--refine", refine, "refine every grid by this factor")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", seed, "override the sampling seed");
    run_cmd->add_option("--format", format, "report file format")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* validate_cmd =
        app.add_subcommand("validate", "parse and cross-check a scenario, then exit");
    validate_cmd->add_option("file", file, "scenario JSON file")->required();

    app.add_subcommand("catalog", "list built-in manifolds, Hamiltonians, and charts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigExit;
    }

    try {
        if (app.got_subcommand("catalog")) {
            for (const auto& line : hjm::catalog_listing()) std::cout << line << '\n';
            std::cout << "experiments: restrict_check, extend_check, invariance_report, "
                         "chart_equivalence, convergence\n";
            return 0;
        }

        hjm::Scenario s = hjm::load_scenario(file);
        if (app.got_subcommand("validate")) {
            std::cout << "ok: " << s.name << " (" << s.experiment << ")\n";
            return 0;
        }

        // Overrides are folded into the echoed document so a report always
        // describes the configuration that actually ran.
        if (seed) {
            s.plan.seed = static_cast<std::uint64_t>(*seed);
            s.raw["samples"]["seed"] = *seed;
        }
        if (refine > 1) {
            if (s.ambient_grid) s.ambient_grid = hjm::refine_grid(*s.ambient_grid, refine);
            if (s.chart_grid) s.chart_grid = hjm::refine_grid(*s.chart_grid, refine);
            s.raw["cli_refine"] = refine;
        }
        if (!format.empty()) s.output_format = format;

        hjm::Report report = hjm::run_scenario(s);
        const nlohmann::json j = report.to_json();
        std::cout << j.dump(2) << '\n';

        std::filesystem::create_directories(out_dir);
        const std::filesystem::path base =
            std::filesystem::path(out_dir) / (s.name + ".report");
        if (s.output_format == "csv") {
            std::ofstream out(base.string() + ".csv");
            write_report_csv(report, out);
        } else {
            std::ofstream out(base.string() + ".json");
            out << j.dump(2) << '\n';
        }
        return hjm::exit_code_for(report);
    } catch (const hjm::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigExit;
    } catch (const hjm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigExit;
    }
}
