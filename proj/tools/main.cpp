#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "runner.hpp"

namespace fs = std::filesystem;
using namespace nevres::cli;

int main(int argc, char** argv) {
    CLI::App app{"Resolvents of lam-dependent differential operators on a finite interval"};
    app.require_subcommand(1);
    CLI::App* run_cmd = app.add_subcommand("run", "run the tasks of a problem config");

    std::string config, out_dir = "out", format = "structured";
    std::optional<int> grid_n, substeps, seed;
    std::optional<double> tol;
    int jobs = 1;
    bool timing = false;
    run_cmd->add_option("config", config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--format", format, "table or structured")->check(CLI::IsMember({"table", "structured"}));
    run_cmd->add_option("--grid-n", grid_n, "override grid.N");
    run_cmd->add_option("--substeps", substeps, "override grid.substeps");
    run_cmd->add_option("--tol", tol, "override tolerances.oracle");
    run_cmd->add_option("--seed", seed, "seed for random trial data");
    run_cmd->add_option("--jobs", jobs, "worker threads for distinct lam")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--timing", timing, "record wall time in the structured report");

    CLI11_PARSE(app, argc, argv);

    ProblemConfig cfg;
    try {
        nlohmann::json j;
        {
            std::ifstream in(config);
            j = nlohmann::json::parse(in, nullptr, true, true);
        }
        if (grid_n) j["grid"]["N"] = *grid_n;
        if (substeps) j["grid"]["substeps"] = *substeps;
        if (tol) j["tolerances"]["oracle"] = *tol;
        if (seed) j["seed"] = *seed;
        cfg = parse_config(j);
        nevres::Grid::uniform(cfg.a, cfg.b, cfg.N);
        if (cfg.substeps < 1) throw SchemaError("config.grid.substeps", "must be positive");
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "schema error: " << config << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    }

    Report rep = run(cfg, RunOptions{jobs});
    std::cout << rep.name << "\n" << summary_table(rep);

    try {
        fs::create_directories(out_dir);
        if (format == "structured") {
            std::ofstream(fs::path(out_dir) / (rep.name + ".json")) << structured(rep, timing);
        } else {
            std::ofstream tasks(fs::path(out_dir) / (rep.name + "_tasks.csv"));
            tasks << "task,status,residual,value\n";
            for (const TaskRecord& t : rep.tasks)
                for (const auto& [k, v] : t.residuals) {
                    char buf[40];
                    std::snprintf(buf, sizeof buf, "%.17g", v);
                    tasks << t.task << "," << (t.pass ? "pass" : "fail") << "," << k << "," << buf << "\n";
                }
            for (const Curve& c : rep.curves) {
                std::ofstream out(fs::path(out_dir) /
                                  (rep.name + "_lam" + std::to_string(c.lam_index) + "_f" + std::to_string(c.f_index) + ".csv"));
                write_curve(out, c);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 3;
    }
    return rep.ok() ? 0 : 1;
}
