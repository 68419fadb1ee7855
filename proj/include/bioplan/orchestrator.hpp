#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bioplan/csv.hpp"
#include "bioplan/domain.hpp"
#include "bioplan/phase1.hpp"
#include "bioplan/phase2.hpp"
#include "bioplan/scengen.hpp"
#include "bioplan/solver.hpp"

namespace bioplan {

/** One realization of the uncertainty over the planning year, hourly. */
struct SampleRealization {
    std::string id;
    std::vector<double> demand;
    std::vector<double> elec_price;
    std::vector<double> fuel_price;

    int n_weeks() const { return static_cast<int>(demand.size()) / kHoursPerWeek; }

    void validate() const {
        detail::require(!demand.empty() && demand.size() % kHoursPerWeek == 0, "sample.demand",
                        "must cover whole weeks");
        detail::require(demand.size() == elec_price.size() && demand.size() == fuel_price.size(),
                        "sample", "series lengths must agree");
    }

    Scenario week(int week_1based) const {
        int begin = (week_1based - 1) * kHoursPerWeek;
        Scenario s;
        s.probability = 1.0;
        s.demand.assign(demand.begin() + begin, demand.begin() + begin + kHoursPerWeek);
        s.elec_price.assign(elec_price.begin() + begin, elec_price.begin() + begin + kHoursPerWeek);
        s.fuel_price.assign(fuel_price.begin() + begin, fuel_price.begin() + begin + kHoursPerWeek);
        return s;
    }
};

/// Normalizes a raw series to one hourly planning year: daily series are
/// expanded by repetition, anything longer than 52 weeks is trimmed.
inline std::vector<double> normalize_year_series(std::vector<double> series,
                                                 const std::string& what) {
    if (series.size() < kHoursPerYear && series.size() * 24 >= kHoursPerYear)
        series = expand_daily_to_hourly(series);
    detail::require(series.size() >= kHoursPerYear, what,
                    "needs at least 8736 hourly (or 364 daily) values");
    series.resize(kHoursPerYear);
    return series;
}

/**
 * Loads a five-year archive from a directory holding one CSV per quantity
 * and year: demand_<year>.csv, elec_price_<year>.csv, fuel_price_<year>.csv,
 * year labels sorted ascending (oldest first).
 */
inline HistoricalArchive load_archive(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    detail::require(fs::is_directory(dir), dir.string(), "archive directory not found");
    std::vector<std::string> labels;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.starts_with("demand_") && name.ends_with(".csv"))
            labels.push_back(name.substr(7, name.size() - 11));
    }
    std::sort(labels.begin(), labels.end());
    detail::require(labels.size() == 5, dir.string(),
                    "expected exactly 5 demand_<year>.csv files, found " +
                        std::to_string(labels.size()));
    HistoricalArchive archive;
    for (const std::string& label : labels) {
        YearSeries year;
        year.demand = normalize_year_series(csv::read_series(dir / ("demand_" + label + ".csv")),
                                            "demand_" + label);
        year.elec_price = normalize_year_series(
            csv::read_series(dir / ("elec_price_" + label + ".csv")), "elec_price_" + label);
        year.fuel_price = normalize_year_series(
            csv::read_series(dir / ("fuel_price_" + label + ".csv")), "fuel_price_" + label);
        archive.years.push_back(std::move(year));
    }
    archive.validate();
    return archive;
}

/** Realized year: 52 weekly results plus run metadata. */
struct YearResult {
    std::vector<WeeklyResult> weeks;
    std::vector<WeekTrace> traces;  // parallel to weeks

    std::string sample_id;
    std::string method;
    std::string plan_kind;  // "sto" or "exp"
    int horizon_weeks = 0;
    uint64_t seed = 0;

    double total_cost() const {
        double sum = 0;
        for (const auto& w : weeks) sum += w.total();
        return sum;
    }
    double total_penalty() const {
        double sum = 0;
        for (const auto& w : weeks) sum += w.penalty_miss + w.penalty_excess;
        return sum;
    }
    double total_missed_mwh() const {
        double sum = 0;
        for (const auto& w : weeks) sum += w.missed_heat_mwh;
        return sum;
    }
};

/// Loads one realization from demand.csv / elec_price.csv / fuel_price.csv.
inline SampleRealization load_sample(const std::filesystem::path& dir) {
    detail::require(std::filesystem::is_directory(dir), dir.string(),
                    "sample directory not found");
    for (const char* name : {"demand.csv", "elec_price.csv", "fuel_price.csv"})
        detail::require(std::filesystem::exists(dir / name), (dir / name).string(),
                        "sample file missing");
    SampleRealization sample;
    sample.id = dir.filename().string();
    sample.demand = normalize_year_series(csv::read_series(dir / "demand.csv"), "sample demand");
    sample.elec_price =
        normalize_year_series(csv::read_series(dir / "elec_price.csv"), "sample elec_price");
    sample.fuel_price =
        normalize_year_series(csv::read_series(dir / "fuel_price.csv"), "sample fuel_price");
    sample.validate();
    return sample;
}

struct OrchestratorError : std::runtime_error {
    explicit OrchestratorError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void dump_failed_model(const milp::Model& model, const milp::Assignment& result,
                              const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream mps(dir / (model.name() + ".mps"));
    mps << milp::emit_mps(model);
    std::ofstream log(dir / (model.name() + ".diag"));
    log << milp::to_string(result.status) << "\n" << result.diagnostics << "\n";
}

inline milp::Assignment solve_or_dump(const milp::Model& model, const milp::SolverConfig& solver,
                                      const std::filesystem::path& dump_dir,
                                      const std::string& context) {
    milp::Assignment result = milp::solve_external(model, solver);
    if (!result.solved()) {
        std::filesystem::path dir =
            dump_dir.empty() ? std::filesystem::temp_directory_path() / "bioplan-failed" : dump_dir;
        dump_failed_model(model, result, dir);
        throw OrchestratorError(context + ": solver returned " +
                                milp::to_string(result.status) + "; model dumped to " +
                                dir.string());
    }
    return result;
}

}  // namespace detail

/** Inputs shared by the contract phase builders. */
struct Phase1Inputs {
    ScenarioSet weekly;                      // weekly demand scenarios
    std::vector<double> expected_elec_cost;  // weekly
    std::vector<double> expected_aux_cost;   // weekly
    std::vector<double> psi;
};

/// Weekly expected composite costs from the archive (probability-weighted
/// hourly combination, then weekly means).
inline Phase1Inputs make_phase1_inputs(const PlantConfig& config, const HistoricalArchive& archive,
                                       bool expected_value_demand) {
    Phase1Inputs in;
    in.weekly = expected_value_demand
                    ? [&] {
                          ScenarioSet set;
                          set.grid = TimeGrid::weekly(kWeeksPerYear);
                          Scenario s;
                          s.probability = 1.0;
                          s.demand = aggregate_to_weekly(
                              expected_over_years(archive, &YearSeries::demand), SeriesKind::Demand);
                          s.elec_price = aggregate_to_weekly(
                              expected_over_years(archive, &YearSeries::elec_price), SeriesKind::Price);
                          s.fuel_price = aggregate_to_weekly(
                              expected_over_years(archive, &YearSeries::fuel_price), SeriesKind::Price);
                          set.scenarios.push_back(std::move(s));
                          return set;
                      }()
                    : weekly_demand_scenarios(archive);

    auto expected_elec = expected_over_years(archive, &YearSeries::elec_price);
    auto expected_fuel = expected_over_years(archive, &YearSeries::fuel_price);
    auto series = derive_cost_series(expected_elec, expected_fuel, config.costs, config.aux);
    in.expected_elec_cost = aggregate_to_weekly(series.net_elec_cost, SeriesKind::Price);
    in.expected_aux_cost = aggregate_to_weekly(series.aux_unit_cost, SeriesKind::Price);
    in.psi = incentive_schedule(in.weekly);
    return in;
}

/**
 * Contract phase: weekly demand scenarios from the five archive years,
 * expected prices, incentive schedule, one MILP solve, plan extraction.
 * With expected_value_demand the demand collapses to its expectation
 * (the expected-value baseline's first phase).
 */
inline ContractPlan run_contract_phase(const PlantConfig& config, const HistoricalArchive& archive,
                                       const milp::SolverConfig& solver,
                                       bool expected_value_demand = false,
                                       const std::filesystem::path& dump_dir = {}) {
    Phase1Inputs in = make_phase1_inputs(config, archive, expected_value_demand);
    Phase1Model built = build_contract_model(config, in.weekly, in.expected_elec_cost,
                                             in.expected_aux_cost, in.psi);
    milp::Assignment sol =
        detail::solve_or_dump(built.model, solver, dump_dir, "contract phase");
    return extract_contract_plan(built.index, sol, config.contracts);
}

struct YearRunOptions {
    int n_weeks = kWeeksPerYear;  // shorter only for reduced-scale studies
    ScenGenConfig scengen;
    std::filesystem::path dump_dir;
    // observer over every solved stochastic window and realization
    std::function<void(const Phase2Model&, const milp::Assignment&, const ScenarioSet&)> on_solve;
};

/**
 * Receding-horizon year: every week builds scenarios for the remaining
 * window (scenario histories grow with the realized observations), solves
 * the operational model, fixes the focus-week decisions, realizes them
 * against the sample and carries the end state into the next week. Windows
 * near the end of the year are truncated.
 */
inline YearResult run_receding_year(const PlantConfig& config, const ContractPlan& plan,
                                    const HistoricalArchive& archive,
                                    const SampleRealization& sample, ScenarioMethod method,
                                    int horizon_weeks, uint64_t seed,
                                    const milp::SolverConfig& solver,
                                    const YearRunOptions& options = {}) {
    sample.validate();
    detail::require(horizon_weeks >= 1, "run.horizon", "horizon must be at least one week");
    detail::require(options.n_weeks <= plan.n_weeks, "run.n_weeks",
                    "plan must cover the simulated weeks");
    detail::require(options.n_weeks <= sample.n_weeks(), "run.n_weeks",
                    "sample must cover the simulated weeks");

    YearResult year;
    year.sample_id = sample.id;
    year.method = to_string(method);
    year.plan_kind = "sto";
    year.horizon_weeks = horizon_weeks;
    year.seed = seed;

    RecentObservations recent;
    recent.demand = archive.years.back().demand;
    recent.elec_price = archive.years.back().elec_price;

    SystemState state = config.initial_state();
    for (int week = 1; week <= options.n_weeks; ++week) {
        int window = std::min(horizon_weeks, options.n_weeks - week + 1);
        uint64_t week_seed = detail::mix_seed(seed, static_cast<uint64_t>(week) * 4);

        ScenarioSet scenarios;
        try {
            scenarios = build_scenario_set(method, archive, recent, week, window, week_seed,
                                           options.scengen);
        } catch (const std::exception& e) {
            throw OrchestratorError("week " + std::to_string(week) +
                                    ": scenario generation failed: " + e.what());
        }

        Phase2Model stoch = build_operational_model(config, plan, week, scenarios, state);
        milp::Assignment sol = detail::solve_or_dump(stoch.model, solver, options.dump_dir,
                                                     "week " + std::to_string(week));
        if (options.on_solve) options.on_solve(stoch, sol, scenarios);

        WeekDecisions decisions = extract_week_decisions(config, stoch.index, sol);
        Scenario realized = sample.week(week);

        Phase2Model fixed = fix_and_realize(config, plan, week, decisions, realized, state);
        milp::Assignment rsol = detail::solve_or_dump(
            fixed.model, solver, options.dump_dir, "week " + std::to_string(week) + " realization");
        if (options.on_solve) {
            ScenarioSet single;
            single.grid = fixed.index.grid;
            single.scenarios.push_back(realized);
            single.scenarios.back().probability = 1.0;
            options.on_solve(fixed, rsol, single);
        }

        WeeklyResult weekly = summarize_realization(config, plan, week, fixed.index, rsol, realized);
        year.traces.push_back(extract_week_trace(fixed.index, rsol, realized));
        state = weekly.end_state;
        year.weeks.push_back(std::move(weekly));

        auto realized_week = sample.week(week);
        recent.demand.insert(recent.demand.end(), realized_week.demand.begin(),
                             realized_week.demand.end());
        recent.elec_price.insert(recent.elec_price.end(), realized_week.elec_price.begin(),
                                 realized_week.elec_price.end());
    }
    return year;
}

/**
 * Expected-value baseline: both phases run on a single probability-weighted
 * expected scenario, everything else identical to the stochastic pipeline.
 */
inline YearResult run_expected_value_baseline(const PlantConfig& config,
                                              const HistoricalArchive& archive,
                                              const SampleRealization& sample, int horizon_weeks,
                                              uint64_t seed, const milp::SolverConfig& solver,
                                              const YearRunOptions& options = {}) {
    ContractPlan plan = run_contract_phase(config, archive, solver, /*expected_value_demand=*/true,
                                           options.dump_dir);
    YearResult year = run_receding_year(config, plan, archive, sample, ScenarioMethod::Expected,
                                        horizon_weeks, seed, solver, options);
    year.plan_kind = "exp";
    return year;
}

// ---------------------------------------------------------------------------
// Run comparison
// ---------------------------------------------------------------------------

/** Worst/best/average comparison of stochastic vs expected-value runs per
 *  sample, deltas as (Exp - Sto) / Exp. */
struct ComparisonTable {
    struct Row {
        std::string sample_id;
        double max_sto = 0, min_exp = 0, delta_worst = 0;
        double avg_sto = 0, avg_exp = 0, delta_avg = 0;
    };
    std::vector<Row> rows;
    Row average;
};

inline ComparisonTable compare_runs(const std::vector<YearResult>& results) {
    detail::require(results.size() >= 2, "compare", "needs at least two runs");

    std::map<std::string, std::vector<double>> sto, exp;
    for (const YearResult& r : results) {
        if (r.plan_kind == "exp")
            exp[r.sample_id].push_back(r.total_cost());
        else
            sto[r.sample_id].push_back(r.total_cost());
    }
    detail::require(!sto.empty() && !exp.empty(), "compare",
                    "needs both stochastic and expected-value runs");
    detail::require(sto.size() == exp.size(), "compare", "mismatched sample sets");
    for (const auto& [id, _] : sto)
        detail::require(exp.count(id) == 1, "compare", "mismatched sample sets");

    ComparisonTable table;
    double n = static_cast<double>(sto.size());
    for (const auto& [id, sto_costs] : sto) {
        const auto& exp_costs = exp.at(id);
        ComparisonTable::Row row;
        row.sample_id = id;
        row.max_sto = *std::max_element(sto_costs.begin(), sto_costs.end());
        row.min_exp = *std::min_element(exp_costs.begin(), exp_costs.end());
        row.avg_sto = std::accumulate(sto_costs.begin(), sto_costs.end(), 0.0) / sto_costs.size();
        row.avg_exp = std::accumulate(exp_costs.begin(), exp_costs.end(), 0.0) / exp_costs.size();
        row.delta_worst = row.min_exp != 0 ? (row.min_exp - row.max_sto) / row.min_exp : 0;
        row.delta_avg = row.avg_exp != 0 ? (row.avg_exp - row.avg_sto) / row.avg_exp : 0;
        table.average.max_sto += row.max_sto / n;
        table.average.min_exp += row.min_exp / n;
        table.average.avg_sto += row.avg_sto / n;
        table.average.avg_exp += row.avg_exp / n;
        table.rows.push_back(std::move(row));
    }
    table.average.sample_id = "avg";
    table.average.delta_worst = table.average.min_exp != 0
                                    ? (table.average.min_exp - table.average.max_sto) /
                                          table.average.min_exp
                                    : 0;
    table.average.delta_avg =
        table.average.avg_exp != 0
            ? (table.average.avg_exp - table.average.avg_sto) / table.average.avg_exp
            : 0;
    return table;
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

inline void write_year_result_csv(const std::filesystem::path& path, const YearResult& year) {
    std::ofstream out(path);
    if (!out) throw csv::CsvError("cannot write " + path.string());
    out << "week,biomass_cost,chp_op_cost,startup_cost,shutdown_cost,elec_net_cost,aux_cost,"
           "inventory_cost,penalty_miss,penalty_excess,total,missed_mwh,excess_mwt,"
           "end_biomass,end_thermal,end_chp_on,end_chp_power\n";
    for (const WeeklyResult& w : year.weeks) {
        out << w.week << ',' << csv::format_value(w.biomass_cost) << ','
            << csv::format_value(w.chp_op_cost) << ',' << csv::format_value(w.startup_cost) << ','
            << csv::format_value(w.shutdown_cost) << ',' << csv::format_value(w.elec_net_cost)
            << ',' << csv::format_value(w.aux_cost) << ',' << csv::format_value(w.inventory_cost)
            << ',' << csv::format_value(w.penalty_miss) << ','
            << csv::format_value(w.penalty_excess) << ',' << csv::format_value(w.total()) << ','
            << csv::format_value(w.missed_heat_mwh) << ','
            << csv::format_value(w.excess_storage_mwt) << ','
            << csv::format_value(w.end_state.biomass_level) << ','
            << csv::format_value(w.end_state.thermal_level) << ','
            << (w.end_state.chp_on ? 1 : 0) << ','
            << csv::format_value(w.end_state.chp_power) << '\n';
    }
}

inline void write_week_trace_csv(const std::filesystem::path& path, const WeekTrace& tr) {
    std::ofstream out(path);
    if (!out) throw csv::CsvError("cannot write " + path.string());
    out << "hour,demand,p,q_chp,q_chp_net,q_chp_sto,q_aux,q_aux_net,q_aux_sto,sto_in,sto_out,"
           "thermal_level,biomass_level,delivered_mwt,delivered_tonnes,q_miss\n";
    for (size_t t = 0; t < tr.demand.size(); ++t)
        out << t + 1 << ',' << csv::format_value(tr.demand[t]) << ',' << csv::format_value(tr.p[t])
            << ',' << csv::format_value(tr.qchp[t]) << ',' << csv::format_value(tr.qchpn[t]) << ','
            << csv::format_value(tr.qchps[t]) << ',' << csv::format_value(tr.qaux[t]) << ','
            << csv::format_value(tr.qauxn[t]) << ',' << csv::format_value(tr.qauxs[t]) << ','
            << csv::format_value(tr.stoin[t]) << ',' << csv::format_value(tr.stoout[t]) << ','
            << csv::format_value(tr.thermal_level[t]) << ','
            << csv::format_value(tr.biomass_level[t]) << ','
            << csv::format_value(tr.delivered_mwt[t]) << ','
            << csv::format_value(tr.delivered_tonnes[t]) << ','
            << csv::format_value(tr.qmiss[t]) << '\n';
}

inline void write_biomass_storage_csv(const std::filesystem::path& path, const YearResult& year,
                                      const ContractPlan& plan) {
    std::ofstream out(path);
    if (!out) throw csv::CsvError("cannot write " + path.string());
    out << "week,end_level,delivered_mwt,delivered_tonnes,contracted_tonnes\n";
    for (size_t i = 0; i < year.weeks.size(); ++i) {
        double mwt = 0, tonnes = 0;
        if (i < year.traces.size()) {
            for (double v : year.traces[i].delivered_mwt) mwt += v;
            for (double v : year.traces[i].delivered_tonnes) tonnes += v;
        }
        double contracted = 0;
        for (int j = 0; j < plan.n_contracts(); ++j)
            contracted += plan.row(j, year.weeks[i].week - 1).base;
        out << year.weeks[i].week << ',' << csv::format_value(year.weeks[i].end_state.biomass_level)
            << ',' << csv::format_value(mwt) << ',' << csv::format_value(tonnes) << ','
            << csv::format_value(contracted) << '\n';
    }
}

inline void write_heat_production_csv(const std::filesystem::path& path, const YearResult& year) {
    std::ofstream out(path);
    if (!out) throw csv::CsvError("cannot write " + path.string());
    out << "week,demand,q_chp,q_aux,from_storage,q_miss\n";
    for (size_t i = 0; i < year.traces.size(); ++i) {
        const WeekTrace& tr = year.traces[i];
        auto sum = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += x;
            return s;
        };
        out << year.weeks[i].week << ',' << csv::format_value(sum(tr.demand)) << ','
            << csv::format_value(sum(tr.qchp)) << ',' << csv::format_value(sum(tr.qaux)) << ','
            << csv::format_value(sum(tr.stoout)) << ',' << csv::format_value(sum(tr.qmiss))
            << '\n';
    }
}

inline void write_comparison_csv(const std::filesystem::path& path, const ComparisonTable& table) {
    std::ofstream out(path);
    if (!out) throw csv::CsvError("cannot write " + path.string());
    out << "sample,max_sto,min_exp,delta_worst_pct,avg_sto,avg_exp,delta_avg_pct\n";
    auto emit = [&](const ComparisonTable::Row& r) {
        out << r.sample_id << ',' << csv::format_value(r.max_sto) << ','
            << csv::format_value(r.min_exp) << ',' << csv::format_value(100 * r.delta_worst) << ','
            << csv::format_value(r.avg_sto) << ',' << csv::format_value(r.avg_exp) << ','
            << csv::format_value(100 * r.delta_avg) << '\n';
    };
    for (const auto& r : table.rows) emit(r);
    emit(table.average);
}

/// Writes the full per-run report set into `dir` (see README for schemas).
inline void write_reports(const std::filesystem::path& dir, const YearResult& year,
                          const ContractPlan& plan) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "weekly");
    write_year_result_csv(dir / "year_result.csv", year);
    plan.write_csv(dir / "plan.csv");
    write_biomass_storage_csv(dir / "biomass_storage.csv", year, plan);
    write_heat_production_csv(dir / "heat_production.csv", year);
    for (size_t i = 0; i < year.traces.size(); ++i)
        write_week_trace_csv(dir / "weekly" /
                                 ("week_" + std::to_string(year.weeks[i].week) + ".csv"),
                             year.traces[i]);
}

}  // namespace bioplan
