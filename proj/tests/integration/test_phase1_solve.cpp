#include <doctest.h>

#include "bioplan/phase1.hpp"
#include "bioplan/solver.hpp"
#include "../support.hpp"

using namespace bioplan;

namespace {

ScenarioSet weekly_single(const std::vector<double>& demand) {
    ScenarioSet set;
    set.grid = TimeGrid::weekly(static_cast<int>(demand.size()));
    Scenario s;
    s.probability = 1.0;
    s.demand = demand;
    s.elec_price.assign(demand.size(), 40.0);
    s.fuel_price.assign(demand.size(), 20.0);
    set.scenarios = {s};
    set.validate();
    return set;
}

}  // namespace

TEST_CASE("zero demand selects nothing and costs nothing") {
    PlantConfig config = testsup::small_plant();
    config.biomass_storage.initial = 0;
    ScenarioSet weekly = weekly_single({0, 0, 0, 0});
    std::vector<double> elec(4, 5.0);  // positive net cost: no profit motive
    std::vector<double> aux(4, 54.63);
    std::vector<double> psi(4, 0.0);

    Phase1Model built = build_contract_model(config, weekly, elec, aux, psi);
    milp::Assignment sol = milp::solve_external(built.model, testsup::solver_config());
    REQUIRE(sol.solved());
    CHECK(sol.reported_objective == doctest::Approx(0.0).epsilon(1e-9));

    ContractPlan plan = extract_contract_plan(built.index, sol, config.contracts);
    CHECK_FALSE(plan.selected[0]);
    CHECK_FALSE(plan.selected[1]);
}

TEST_CASE("a contract is selected exactly when cheaper than missing the demand") {
    // one fixed contract, one week; demand served only via CHP on biomass
    PlantConfig config = testsup::small_plant();
    config.contracts.resize(1);
    config.contracts[0].deliveries_min = 1;
    config.contracts[0].deliveries_max = 1;
    config.biomass_storage.initial = 0;
    config.aux.q_max = 0.001;  // boiler effectively out of the picture
    config.costs.biomass_share_target = 0;

    double demand = 700.0;  // MWt over the week
    ScenarioSet weekly = weekly_single({demand});
    std::vector<double> elec(1, 5.0);
    std::vector<double> aux(1, 54.63);
    std::vector<double> psi(1, 0.0);

    // branch arithmetic: serving via CHP consumes fuel at the back-pressure
    // corner; missing everything costs penalty_miss per MWh
    auto solve_with_miss_penalty = [&](double penalty) {
        PlantConfig c = config;
        c.costs.penalty_miss = penalty;
        Phase1Model built = build_contract_model(c, weekly, elec, aux, psi);
        milp::Assignment sol = milp::solve_external(built.model, testsup::solver_config());
        REQUIRE(sol.solved());
        return extract_contract_plan(built.index, sol, c.contracts);
    };

    // with the usual penalty the contract pays for itself
    ContractPlan buying = solve_with_miss_penalty(10000.0);
    CHECK(buying.selected[0]);

    // with a nearly free miss the contract is pure cost
    ContractPlan skipping = solve_with_miss_penalty(0.01);
    CHECK_FALSE(skipping.selected[0]);
}

TEST_CASE("with one scenario and options dearer than the incentive no options are bought") {
    auto toy = testsup::phase1_toy();
    ScenarioSet single = weekly_single({350, 400, 380, 280});
    Phase1Model built = build_contract_model(toy.config, single, toy.elec_cost, toy.aux_cost,
                                             toy.psi);
    milp::Assignment sol = milp::solve_external(built.model, testsup::solver_config(1e-6));
    REQUIRE(sol.solved());
    ContractPlan plan = extract_contract_plan(built.index, sol, toy.config.contracts);
    for (int j = 0; j < plan.n_contracts(); ++j)
        for (int w = 0; w < plan.n_weeks; ++w) {
            CHECK(plan.row(j, w).up == 0.0);
            CHECK(plan.row(j, w).down == 0.0);
        }
}

TEST_CASE("storage recursion, heat balance and recourse bounds hold in solved models") {
    auto toy = testsup::phase1_toy();
    Phase1Model built = build_contract_model(toy.config, toy.weekly, toy.elec_cost, toy.aux_cost,
                                             toy.psi);
    milp::Assignment sol = milp::solve_external(built.model, testsup::solver_config());
    REQUIRE(sol.solved());

    milp::Evaluation eval = milp::evaluate_solution(built.model, sol);
    CHECK(eval.max_violation <= 1e-6);
    CHECK(eval.objective ==
          doctest::Approx(sol.reported_objective).epsilon(1e-6));

    Phase1ScanReport scan = scan_phase1_solution(toy.config, toy.weekly, built.index, sol);
    CHECK(scan.worst() <= 1e-6);

    ContractPlan plan = extract_contract_plan(built.index, sol, toy.config.contracts);
    plan.validate(toy.config.contracts);
}

TEST_CASE("adding a contract never makes the optimum worse") {
    auto toy = testsup::phase1_toy();
    PlantConfig reduced = toy.config;
    reduced.contracts.resize(1);

    Phase1Model small = build_contract_model(reduced, toy.weekly, toy.elec_cost, toy.aux_cost,
                                             toy.psi);
    Phase1Model full = build_contract_model(toy.config, toy.weekly, toy.elec_cost, toy.aux_cost,
                                            toy.psi);
    milp::Assignment small_sol = milp::solve_external(small.model, testsup::solver_config());
    milp::Assignment full_sol = milp::solve_external(full.model, testsup::solver_config());
    REQUIRE(small_sol.solved());
    REQUIRE(full_sol.solved());
    double gap = 1e-4 * std::max(1.0, std::abs(small_sol.reported_objective));
    CHECK(full_sol.reported_objective <= small_sol.reported_objective + gap);
}

TEST_CASE("fixing a plan reproduces its cost on the same scenario set") {
    auto toy = testsup::phase1_toy();
    Phase1Model built = build_contract_model(toy.config, toy.weekly, toy.elec_cost, toy.aux_cost,
                                             toy.psi);
    milp::Assignment sol = milp::solve_external(built.model, testsup::solver_config(1e-6));
    REQUIRE(sol.solved());
    ContractPlan plan = extract_contract_plan(built.index, sol, toy.config.contracts);

    Phase1Model refixed = build_contract_model(toy.config, toy.weekly, toy.elec_cost, toy.aux_cost,
                                               toy.psi);
    fix_plan_in_model(refixed, plan);
    milp::Assignment fixed_sol = milp::solve_external(refixed.model, testsup::solver_config(1e-6));
    REQUIRE(fixed_sol.solved());
    CHECK(fixed_sol.reported_objective ==
          doctest::Approx(sol.reported_objective).epsilon(1e-5));
}
