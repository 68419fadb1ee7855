#pragma once

// Shared fixtures for the test suites: toy plant configurations, synthetic
// archives and the backend solver configuration.

#include <cstdlib>
#include <string>
#include <vector>

#include "bioplan/armax.hpp"
#include "bioplan/domain.hpp"
#include "bioplan/orchestrator.hpp"
#include "bioplan/phase1.hpp"
#include "bioplan/scengen.hpp"
#include "bioplan/solver.hpp"

namespace testsup {

inline bioplan::milp::SolverConfig solver_config(double gap = 1e-4, double timelimit = 300) {
    bioplan::milp::SolverConfig cfg = bioplan::milp::SolverConfig::from_env();
    if (cfg.command.empty()) cfg.command = BIOPLAN_DEFAULT_SOLVER_CMD;
    cfg.gap = gap;
    cfg.time_limit_sec = timelimit;
    return cfg;
}

inline std::string source_dir() { return BIOPLAN_SOURCE_DIR; }

/// Small two-contract system used by the phase-1 solve tests and the
/// brute-force acceptance instance.
inline bioplan::PlantConfig small_plant() {
    bioplan::PlantConfig c;
    c.name = "toy_plant";
    c.chp = {.p_max = 4.0, .p_min = 1.0, .q_max = 6.0, .theta = -0.18, .xi = 0.55,
             .ramp_up = 4.0, .ramp_down = 4.0, .eff_power = 0.62, .eff_heat = 0.31,
             .min_up = 1, .min_down = 1};
    c.aux = {.q_max = 3.0, .eff = 0.97, .om_cost = 0.07, .tax = 28.22, .co2_tax = 6.34};
    c.biomass_storage = {.cap = 3000, .safety_heating = 0, .safety_other = 0,
                         .heating_first = 20, .heating_last = 45, .max_outflow = 20,
                         .delivery_gap = 4, .initial = 100, .calorific = 5.0,
                         .inventory_cost = 0.0002};
    c.thermal_storage = {.cap_min = 0, .cap_max = 4, .max_flow = 2, .initial = 1};
    c.costs = {.chp_op = 19.85, .startup = 100, .shutdown = 0, .elec_tax = 55.62,
               .biomass_incentive = 20.25, .biomass_share_target = 0.5,
               .penalty_store = 1000, .penalty_miss = 10000, .penalty_bm = 5000};

    bioplan::ContractSpec fixed;   // modeled on the cheapest fixed offer, scaled down
    fixed.id = "k1";
    fixed.base_price = 150.8;
    fixed.amount_min = 180;
    fixed.amount_max = 190;
    fixed.freq = 336;
    fixed.deliveries_min = 1;
    fixed.deliveries_max = 2;

    bioplan::ContractSpec flex;    // modeled on the most flexible offer, scaled down
    flex.id = "k12";
    flex.base_price = 202.05;
    flex.up_price = 12.22;
    flex.down_price = 12.22;
    flex.opt_up = 0.75;
    flex.opt_down = 0.75;
    flex.amount_min = 10;
    flex.amount_max = 35;
    flex.freq = 168;
    flex.deliveries_min = 1;
    flex.deliveries_max = 2;

    c.contracts = {fixed, flex};
    c.validate();
    return c;
}

/// Weekly demand scenario set for the small plant: 4 weeks, 2 scenarios.
inline bioplan::ScenarioSet small_weekly_scenarios() {
    bioplan::ScenarioSet set;
    set.grid = bioplan::TimeGrid::weekly(4);
    bioplan::Scenario low;
    low.probability = 0.4;
    low.demand = {300, 350, 325, 250};
    low.elec_price.assign(4, 40.0);
    low.fuel_price.assign(4, 20.0);
    bioplan::Scenario high;
    high.probability = 0.6;
    high.demand = {400, 450, 425, 300};
    high.elec_price.assign(4, 40.0);
    high.fuel_price.assign(4, 20.0);
    set.scenarios = {low, high};
    set.validate();
    return set;
}

struct Phase1Toy {
    bioplan::PlantConfig config;
    bioplan::ScenarioSet weekly;
    std::vector<double> elec_cost;
    std::vector<double> aux_cost;
    std::vector<double> psi;
};

inline Phase1Toy phase1_toy() {
    Phase1Toy toy;
    toy.config = small_plant();
    toy.weekly = small_weekly_scenarios();
    int T = toy.weekly.grid.n_periods;
    toy.elec_cost.assign(T, bioplan::net_elec_cost(40.0, toy.config.costs));
    toy.aux_cost.assign(T, bioplan::aux_unit_cost(20.0, toy.config.aux));
    toy.psi = bioplan::incentive_schedule(toy.weekly);
    return toy;
}

/// Noisy but reproducible five-year archive sized for the bundled
/// municipality A system.
inline bioplan::HistoricalArchive synthetic_archive(uint64_t seed = 20160601, double demand_base = 16.0) {
    bioplan::HistoricalArchive archive;
    bioplan::detail::GaussianStream noise(seed);
    for (int y = 0; y < 5; ++y) {
        bioplan::YearSeries year;
        year.demand.reserve(bioplan::kHoursPerYear);
        for (int t = 0; t < bioplan::kHoursPerYear; ++t) {
            double season = 1.0 + 0.45 * std::cos(2.0 * std::numbers::pi *
                                                  (t - 26.0 * 168.0) / bioplan::kHoursPerYear);
            double weekly = 1.0 + 0.10 * std::sin(2.0 * std::numbers::pi * (t % 168) / 168.0);
            double demand = demand_base * season * weekly * (1.0 + 0.02 * y) +
                            0.6 * noise.next();
            year.demand.push_back(std::max(0.0, demand));
            double price = 38.0 + 6.0 * std::cos(2.0 * std::numbers::pi * (t % 168) / 168.0) +
                           0.4 * y + 1.5 * noise.next();
            year.elec_price.push_back(price);
            year.fuel_price.push_back(19.0 + 0.2 * y);
        }
        archive.years.push_back(std::move(year));
    }
    archive.validate();
    return archive;
}

// ---------------------------------------------------------------------------
// Collapsed six-hour operational toy, small enough for exhaustive
// commitment enumeration.
// ---------------------------------------------------------------------------

struct CollapsedToy {
    bioplan::PlantConfig config;
    bioplan::ContractPlan plan;
    bioplan::ScenarioSet scenarios;
};

inline CollapsedToy collapsed_toy(double demand_level = 10.0, int n_scenarios = 1) {
    CollapsedToy toy;
    bioplan::PlantConfig& c = toy.config;
    c.name = "collapsed";
    c.chp = {.p_max = 8.0, .p_min = 2.0, .q_max = 12.0, .theta = -0.15, .xi = 0.6,
             .ramp_up = 6.0, .ramp_down = 6.0, .eff_power = 0.6, .eff_heat = 0.3,
             .min_up = 2, .min_down = 2};
    c.aux = {.q_max = 15.0, .eff = 0.95, .om_cost = 0.1, .tax = 5.0, .co2_tax = 1.0};
    c.biomass_storage = {.cap = 4000, .safety_heating = 0, .safety_other = 0,
                         .heating_first = 20, .heating_last = 45, .max_outflow = 40,
                         .delivery_gap = 2, .initial = 300, .calorific = 5.0,
                         .inventory_cost = 0.0002};
    c.thermal_storage = {.cap_min = 0, .cap_max = 5, .max_flow = 2.5, .initial = 2};
    c.costs = {.chp_op = 10.0, .startup = 100, .shutdown = 0, .elec_tax = 10.0,
               .biomass_incentive = 5.0, .biomass_share_target = 0,
               .penalty_store = 1000, .penalty_miss = 10000, .penalty_bm = 0};
    bioplan::ContractSpec contract;
    contract.id = "c1";
    contract.base_price = 150;
    contract.up_price = 30;
    contract.down_price = 30;
    contract.opt_up = 0.5;
    contract.opt_down = 0.5;
    contract.amount_min = 10;
    contract.amount_max = 400;
    contract.freq = 2;
    contract.deliveries_min = 0;
    contract.deliveries_max = 10;
    c.contracts = {contract};
    c.validate();

    toy.plan.n_weeks = 1;
    toy.plan.contract_ids = {"c1"};
    toy.plan.selected = {true};
    toy.plan.rows = {{{1, 60.0, 30.0, 30.0}}};
    toy.plan.validate(c.contracts);

    toy.scenarios.grid = bioplan::TimeGrid::hourly_custom(1, 6);
    for (int s = 0; s < n_scenarios; ++s) {
        bioplan::Scenario sc;
        sc.probability = 1.0 / n_scenarios;
        sc.demand.assign(6, demand_level + s);
        sc.elec_price.assign(6, 3.0);
        sc.fuel_price.assign(6, 20.0);
        toy.scenarios.scenarios.push_back(sc);
    }
    toy.scenarios.validate();
    return toy;
}

// ---------------------------------------------------------------------------
// Demand-spike fixture: a 12-week system where one week of realized demand
// exceeds the deliveries planned for it. Looking one week ahead lets the
// operator up-scale the preceding delivery; a one-week horizon runs the silo
// dry and misses heat.
// ---------------------------------------------------------------------------

struct SpikeFixture {
    bioplan::PlantConfig config;
    bioplan::HistoricalArchive archive;
    bioplan::SampleRealization sample;
    bioplan::ContractPlan plan;
    int n_weeks = 12;
    int spike_week = 6;  // 1-based
    double base_demand = 8.0;
    double spike_demand = 12.0;
};

inline SpikeFixture spike_fixture() {
    SpikeFixture fx;

    bioplan::PlantConfig& c = fx.config;
    c.name = "spike_plant";
    c.chp = {.p_max = 8.0, .p_min = 2.0, .q_max = 12.0, .theta = -0.15, .xi = 0.6,
             .ramp_up = 8.0, .ramp_down = 8.0, .eff_power = 0.6, .eff_heat = 0.3,
             .min_up = 1, .min_down = 1};
    c.aux = {.q_max = 2.0, .eff = 0.95, .om_cost = 0.1, .tax = 5.0, .co2_tax = 1.0};
    c.biomass_storage = {.cap = 9000, .safety_heating = 0, .safety_other = 0,
                         .heating_first = 20, .heating_last = 45, .max_outflow = 40,
                         .delivery_gap = 4, .initial = 300, .calorific = 5.0,
                         .inventory_cost = 0.0002};
    c.thermal_storage = {.cap_min = 0, .cap_max = 5, .max_flow = 2.5, .initial = 2};
    c.costs = {.chp_op = 10.0, .startup = 100, .shutdown = 0, .elec_tax = 10.0,
               .biomass_incentive = 5.0, .biomass_share_target = 0,
               .penalty_store = 1000, .penalty_miss = 10000, .penalty_bm = 0};
    bioplan::ContractSpec contract;
    contract.id = "c1";
    contract.base_price = 150;
    contract.up_price = 30;
    contract.down_price = 30;
    contract.opt_up = 0.25;
    contract.opt_down = 0.25;
    contract.amount_min = 40;
    contract.amount_max = 1100;
    contract.freq = 168;
    contract.deliveries_min = 0;
    contract.deliveries_max = 24;
    c.contracts = {contract};
    c.validate();

    // archive: the two most recent years carry the spike, older years do not
    for (int y = 0; y < 5; ++y) {
        bioplan::YearSeries year;
        for (int t = 0; t < bioplan::kHoursPerYear; ++t) {
            int week = t / bioplan::kHoursPerWeek + 1;
            bool spike = (y >= 3) && week == fx.spike_week;
            year.demand.push_back(spike ? fx.spike_demand : fx.base_demand);
            year.elec_price.push_back(3.0);   // net electricity cost stays positive
            year.fuel_price.push_back(20.0);
        }
        fx.archive.years.push_back(std::move(year));
    }
    fx.archive.validate();

    // realized sample follows the spike path
    fx.sample.id = "spike";
    for (int t = 0; t < fx.n_weeks * bioplan::kHoursPerWeek; ++t) {
        int week = t / bioplan::kHoursPerWeek + 1;
        fx.sample.demand.push_back(week == fx.spike_week ? fx.spike_demand : fx.base_demand);
        fx.sample.elec_price.push_back(3.0);
        fx.sample.fuel_price.push_back(20.0);
    }
    fx.sample.validate();

    // plan sized to the base load: one delivery of 810 t every odd week
    fx.plan.n_weeks = fx.n_weeks;
    fx.plan.contract_ids = {"c1"};
    fx.plan.selected = {true};
    std::vector<bioplan::ContractPlan::Row> rows(fx.n_weeks);
    for (int w = 0; w < fx.n_weeks; w += 2) {
        rows[w].deliveries = 1;
        rows[w].base = 810;
        rows[w].up = 0.25 * 810;
        rows[w].down = 0.25 * 810;
    }
    fx.plan.rows = {rows};
    fx.plan.validate(c.contracts);
    return fx;
}

}  // namespace testsup
