// bioplan: biomass supply planning for combined heat and power plants.
//
// Subcommands: validate, gen-scenarios, plan-contracts, simulate-year,
// compare. Exit codes: 0 success, 1 usage error, 2 data error, 3 solver
// error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bioplan/config_json.hpp"
#include "bioplan/csv.hpp"
#include "bioplan/orchestrator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

bioplan::milp::SolverConfig make_solver(const std::string& command_flag, double gap,
                                        double timelimit) {
    bioplan::milp::SolverConfig solver = bioplan::milp::SolverConfig::from_env();
    if (!command_flag.empty()) solver.command = command_flag;
    solver.gap = gap;
    solver.time_limit_sec = timelimit;
    return solver;
}

void write_manifest(const std::filesystem::path& dir, const nlohmann::json& manifest) {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
}

}  // namespace

int bioplan_main(int argc, char** argv) {
    CLI::App app{"Biomass supply planning for CHP plants"};
    app.require_subcommand(1);

    std::string config_path, archive_dir, sample_dir, plan_path, out_dir = "run";
    std::string method_name = "P", solver_cmd;
    std::vector<std::string> run_dirs;
    int week = 1, horizon = 1;
    int n_weeks = bioplan::kWeeksPerYear;
    uint64_t seed = 0;
    double gap = 1e-4, timelimit = 600;
    bool expected_value = false;

    auto* validate = app.add_subcommand("validate", "Check a plant configuration document");
    validate->add_option("--config", config_path, "municipality JSON document")->required();
    validate->add_option("--archive-dir", archive_dir, "optional historical archive to check");

    auto* gen = app.add_subcommand("gen-scenarios", "Generate an operational scenario set");
    gen->add_option("--config", config_path)->required();
    gen->add_option("--archive-dir", archive_dir)->required();
    gen->add_option("--method", method_name, "P, F1, F2, P+F1 or P+F2");
    gen->add_option("--week", week, "focus week (1-based)")->check(CLI::Range(1, 52));
    gen->add_option("--horizon", horizon, "window length in weeks")->check(CLI::Range(1, 8));
    gen->add_option("--seed", seed, "random seed")->required();
    gen->add_option("--out", out_dir, "output CSV path");

    auto* plan_cmd = app.add_subcommand("plan-contracts", "Solve the contract-selection phase");
    plan_cmd->add_option("--config", config_path)->required();
    plan_cmd->add_option("--archive-dir", archive_dir)->required();
    plan_cmd->add_option("--out-dir", out_dir);
    plan_cmd->add_option("--solver-cmd", solver_cmd, "backend template ({mps} {sol} {gap} {timelimit})");
    plan_cmd->add_option("--gap", gap);
    plan_cmd->add_option("--timelimit", timelimit);
    plan_cmd->add_flag("--expected-value", expected_value, "plan against the expected demand only");

    auto* sim = app.add_subcommand("simulate-year", "Receding-horizon year simulation");
    sim->add_option("--config", config_path)->required();
    sim->add_option("--archive-dir", archive_dir)->required();
    sim->add_option("--plan", plan_path, "contract plan CSV (plan-contracts output)")->required();
    sim->add_option("--sample", sample_dir, "sample directory with realized series")->required();
    sim->add_option("--method", method_name, "P, F1, F2, P+F1 or P+F2");
    sim->add_option("--horizon-weeks", horizon)->check(CLI::Range(1, 8));
    sim->add_option("--weeks", n_weeks, "simulated weeks (full year by default)")
        ->check(CLI::Range(1, 52));
    sim->add_option("--seed", seed, "random seed")->required();
    sim->add_option("--out-dir", out_dir);
    sim->add_option("--solver-cmd", solver_cmd);
    sim->add_option("--gap", gap);
    sim->add_option("--timelimit", timelimit);
    sim->add_flag("--expected-value", expected_value,
                  "run phase 2 on the single expected scenario (baseline mode)");

    auto* compare = app.add_subcommand("compare", "Aggregate simulate-year runs");
    compare->add_option("--runs", run_dirs, "run directories (need sto and exp runs)")
        ->required()
        ->expected(-2);
    compare->add_option("--out", out_dir, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) {
            bioplan::PlantConfig config = bioplan::load_plant_config_file(config_path);
            std::cout << "config " << config.name << ": " << config.contracts.size()
                      << " contracts, all invariants satisfied\n";
            if (!archive_dir.empty()) {
                bioplan::HistoricalArchive archive = bioplan::load_archive(archive_dir);
                std::cout << "archive: " << archive.years.size() << " years, hourly, aligned\n";
            }
            return kExitOk;
        }

        if (gen->parsed()) {
            bioplan::PlantConfig config = bioplan::load_plant_config_file(config_path);
            (void)config;
            bioplan::HistoricalArchive archive = bioplan::load_archive(archive_dir);
            bioplan::ScenarioMethod method = bioplan::parse_method(method_name);
            bioplan::RecentObservations recent;
            recent.demand = archive.years.back().demand;
            recent.elec_price = archive.years.back().elec_price;
            bioplan::ScenarioSet set =
                bioplan::build_scenario_set(method, archive, recent, week, horizon, seed);
            std::filesystem::path out = out_dir == "run" ? "scenarios.csv" : out_dir;
            bioplan::csv::write_scenario_set(out, set);
            std::cout << "wrote " << set.scenarios.size() << " scenarios x "
                      << set.grid.n_periods << " hours to " << out.string() << "\n";
            return kExitOk;
        }

        if (plan_cmd->parsed()) {
            bioplan::PlantConfig config = bioplan::load_plant_config_file(config_path);
            bioplan::HistoricalArchive archive = bioplan::load_archive(archive_dir);
            bioplan::milp::SolverConfig solver = make_solver(solver_cmd, gap, timelimit);
            std::filesystem::path dir = out_dir;
            std::filesystem::create_directories(dir);
            bioplan::ContractPlan plan = bioplan::run_contract_phase(
                config, archive, solver, expected_value, dir / "failed");
            plan.write_csv(dir / "plan.csv");
            write_manifest(dir, {{"subcommand", "plan-contracts"},
                                 {"config", config_path},
                                 {"archive_dir", archive_dir},
                                 {"expected_value", expected_value},
                                 {"gap", gap},
                                 {"timelimit", timelimit},
                                 {"solver", solver.command}});
            int selected = 0;
            for (bool u : plan.selected) selected += u;
            std::cout << "plan written to " << (dir / "plan.csv").string() << " (" << selected
                      << " contracts selected)\n";
            return kExitOk;
        }

        if (sim->parsed()) {
            bioplan::PlantConfig config = bioplan::load_plant_config_file(config_path);
            bioplan::HistoricalArchive archive = bioplan::load_archive(archive_dir);
            bioplan::SampleRealization sample = bioplan::load_sample(sample_dir);
            bioplan::ScenarioMethod method = expected_value ? bioplan::ScenarioMethod::Expected
                                                            : bioplan::parse_method(method_name);
            bioplan::ContractPlan plan = bioplan::ContractPlan::read_csv(
                plan_path, config.contracts, bioplan::kWeeksPerYear);
            bioplan::milp::SolverConfig solver = make_solver(solver_cmd, gap, timelimit);
            std::filesystem::path dir = out_dir;
            std::filesystem::create_directories(dir);
            bioplan::YearRunOptions options;
            options.n_weeks = n_weeks;
            options.dump_dir = dir / "failed";
            bioplan::YearResult year = bioplan::run_receding_year(
                config, plan, archive, sample, method, horizon, seed, solver, options);
            if (expected_value) year.plan_kind = "exp";
            bioplan::write_reports(dir, year, plan);
            write_manifest(dir, {{"subcommand", "simulate-year"},
                                 {"config", config_path},
                                 {"archive_dir", archive_dir},
                                 {"sample", sample_dir},
                                 {"plan", plan_path},
                                 {"plan_kind", year.plan_kind},
                                 {"method", bioplan::to_string(method)},
                                 {"horizon_weeks", horizon},
                                 {"weeks", n_weeks},
                                 {"seed", seed},
                                 {"gap", gap},
                                 {"timelimit", timelimit},
                                 {"solver", solver.command}});
            std::cout << "total realized cost " << year.total_cost() << " (penalties "
                      << year.total_penalty() << ", missed " << year.total_missed_mwh()
                      << " MWh); reports in " << dir.string() << "\n";
            return kExitOk;
        }

        if (compare->parsed()) {
            std::vector<bioplan::YearResult> results;
            for (const std::string& run : run_dirs) {
                std::filesystem::path manifest_path = std::filesystem::path(run) / "manifest.json";
                std::filesystem::path year_path = std::filesystem::path(run) / "year_result.csv";
                if (!std::filesystem::exists(year_path))
                    throw bioplan::ValidationError(year_path.string(), "run output missing");
                nlohmann::json manifest;
                {
                    std::ifstream in(manifest_path);
                    if (!in)
                        throw bioplan::ValidationError(manifest_path.string(),
                                                       "run manifest missing");
                    in >> manifest;
                }
                bioplan::YearResult year;
                year.sample_id = manifest.value("sample", "sample");
                year.method = manifest.value("method", "P");
                year.plan_kind = manifest.value("plan_kind", "sto");
                year.horizon_weeks = manifest.value("horizon_weeks", 1);
                std::ifstream in(year_path);
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    auto f = bioplan::csv::split_line(line);
                    bioplan::WeeklyResult w;
                    w.week = std::stoi(f.at(0));
                    w.biomass_cost = std::stod(f.at(1));
                    w.chp_op_cost = std::stod(f.at(2));
                    w.startup_cost = std::stod(f.at(3));
                    w.shutdown_cost = std::stod(f.at(4));
                    w.elec_net_cost = std::stod(f.at(5));
                    w.aux_cost = std::stod(f.at(6));
                    w.inventory_cost = std::stod(f.at(7));
                    w.penalty_miss = std::stod(f.at(8));
                    w.penalty_excess = std::stod(f.at(9));
                    w.missed_heat_mwh = std::stod(f.at(11));
                    year.weeks.push_back(w);
                }
                results.push_back(std::move(year));
            }
            bioplan::ComparisonTable table = bioplan::compare_runs(results);
            std::filesystem::path out = out_dir == "run" ? "comparison.csv" : out_dir;
            bioplan::write_comparison_csv(out, table);
            std::cout << "comparison over " << table.rows.size() << " samples written to "
                      << out.string() << "\n";
            return kExitOk;
        }
    } catch (const bioplan::milp::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const bioplan::OrchestratorError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

#ifndef BIOPLAN_NO_MAIN
int main(int argc, char** argv) { return bioplan_main(argc, argv); }
#endif
