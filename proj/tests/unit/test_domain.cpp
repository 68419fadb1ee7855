#include <doctest.h>

#include <random>

#include "bioplan/config_json.hpp"
#include "bioplan/csv.hpp"
#include "bioplan/domain.hpp"
#include "../support.hpp"

using namespace bioplan;

TEST_CASE("bundled municipality A document passes validation") {
    PlantConfig cfg = load_plant_config_file(testsup::source_dir() + "/data/municipality_a.json");
    CHECK(cfg.biomass_storage.cap == 20000);
    CHECK(cfg.biomass_storage.safety_level(30) == 4000);
    CHECK(cfg.biomass_storage.safety_level(10) == 2000);
    CHECK(cfg.biomass_storage.max_outflow == 35);
    CHECK(cfg.biomass_storage.delivery_gap == 24);
    CHECK(cfg.biomass_storage.calorific == doctest::Approx(4.9971));
    CHECK(cfg.contracts.size() == 13);

    const ContractSpec& first = cfg.contracts.front();
    CHECK(first.base_price == doctest::Approx(150.8));
    CHECK(first.is_fixed());
    CHECK(first.amount_max == 19000);
    CHECK(first.amount_min == 18000);
    CHECK(first.freq == 2016);
    CHECK(first.deliveries_min == 4);
    CHECK(first.deliveries_max == 4);
    CHECK(first.frequency_window_weeks() == 12);
    CHECK(first.max_deliveries_per_week() == 1);
}

TEST_CASE("bundled municipality B document passes validation") {
    PlantConfig cfg = load_plant_config_file(testsup::source_dir() + "/data/municipality_b.json");
    CHECK(cfg.chp.p_max == doctest::Approx(35.18));
    CHECK(cfg.aux.q_max == 30);
    CHECK(cfg.thermal_storage.initial == doctest::Approx(6.5));
}

TEST_CASE("amount bounds flipped is rejected with the invariant named") {
    ContractSpec c;
    c.id = "bad";
    c.amount_min = 2;
    c.amount_max = 1;
    c.deliveries_min = 0;
    c.deliveries_max = 1;
    try {
        c.validate("contracts[0]");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field_path == "contracts[0].amount_min");
        CHECK(std::string(e.what()).find("amount_min <= amount_max") != std::string::npos);
    }
}

TEST_CASE("missing field is reported with its path") {
    nlohmann::json doc = {{"name", "x"}, {"chp", {{"p_max", 1.0}}}};
    try {
        load_plant_config(doc);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("chp.") != std::string::npos);
        CHECK(std::string(e.what()).find("missing field") != std::string::npos);
    }
}

TEST_CASE("validation rejects instead of clamping") {
    PlantConfig cfg = testsup::small_plant();
    cfg.biomass_storage.initial = cfg.biomass_storage.cap + 1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);

    SystemState s;
    s.chp_on = false;
    s.chp_power = 1.0;
    s.thermal_level = 1.0;
    CHECK_THROWS_AS(s.validate(testsup::small_plant().thermal_storage), ValidationError);
}

TEST_CASE("scenario set probabilities must sum to one") {
    ScenarioSet set;
    set.grid = TimeGrid::weekly(1);
    Scenario a;
    a.probability = 0.5;
    a.demand = {1};
    a.elec_price = {1};
    a.fuel_price = {1};
    Scenario b = a;
    b.probability = 0.6;
    set.scenarios = {a, b};
    CHECK_THROWS_AS(set.validate(), ValidationError);
    set.scenarios[1].probability = 0.5;
    CHECK_NOTHROW(set.validate());
}

TEST_CASE("net electricity cost follows tax - incentive - price") {
    CostParams costs;
    costs.elec_tax = 55.62;
    costs.biomass_incentive = 20.25;
    CHECK(net_elec_cost(40.0, costs) == doctest::Approx(-4.63).epsilon(1e-12));
    CHECK(net_elec_cost(35.37, costs) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("auxiliary unit cost adds fuel, O&M and taxes") {
    AuxBoilerParams aux;
    aux.q_max = 15;
    aux.eff = 0.97;
    aux.om_cost = 0.07;
    aux.tax = 28.22;
    aux.co2_tax = 6.34;
    CHECK(aux_unit_cost(20.0, aux) == doctest::Approx(54.63).epsilon(1e-12));
}

TEST_CASE("derive_cost_series is element-wise and linear in the market price") {
    CostParams costs;
    costs.elec_tax = 55.62;
    costs.biomass_incentive = 20.25;
    AuxBoilerParams aux;
    aux.q_max = 1;
    aux.eff = 1;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(10, 80);
    std::vector<double> elec(50), fuel(50, 20.0);
    for (double& v : elec) v = uni(rng);

    CostSeries base = derive_cost_series(elec, fuel, costs, aux);
    std::vector<double> doubled = elec;
    for (double& v : doubled) v *= 2;
    CostSeries scaled = derive_cost_series(doubled, fuel, costs, aux);
    for (size_t i = 0; i < elec.size(); ++i)
        CHECK(scaled.net_elec_cost[i] - base.net_elec_cost[i] ==
              doctest::Approx(-elec[i]).epsilon(1e-12));

    CHECK_THROWS_AS(derive_cost_series({}, fuel, costs, aux), ValidationError);
}

namespace {

ScenarioSet weekly_set_with_spreads(const std::vector<double>& spreads) {
    ScenarioSet set;
    set.grid = TimeGrid::weekly(static_cast<int>(spreads.size()));
    Scenario lo, hi;
    lo.probability = 0.5;
    hi.probability = 0.5;
    for (double s : spreads) {
        lo.demand.push_back(10.0);
        hi.demand.push_back(10.0 + s);
    }
    lo.elec_price.assign(spreads.size(), 1.0);
    lo.fuel_price.assign(spreads.size(), 1.0);
    hi.elec_price = lo.elec_price;
    hi.fuel_price = lo.fuel_price;
    set.scenarios = {lo, hi};
    return set;
}

}  // namespace

TEST_CASE("incentive schedule spans 5.2 down to 0.1 over a full year") {
    std::vector<double> spreads(52);
    for (size_t i = 0; i < spreads.size(); ++i) spreads[i] = 52.0 - static_cast<double>(i);
    auto psi = incentive_schedule(weekly_set_with_spreads(spreads));
    REQUIRE(psi.size() == 52);
    CHECK(psi.front() == 5.2);
    CHECK(psi.back() == 0.1);
    std::vector<double> sorted = psi;
    std::sort(sorted.begin(), sorted.end());
    for (int r = 0; r < 52; ++r) CHECK(sorted[r] == (r + 1) / 10.0);
}

TEST_CASE("incentive ties break toward the earlier week") {
    ScenarioSet set;
    set.grid = TimeGrid::weekly(3);
    Scenario only;
    only.probability = 1.0;
    only.demand = {5, 5, 5};
    only.elec_price = {1, 1, 1};
    only.fuel_price = {1, 1, 1};
    set.scenarios = {only};
    auto psi = incentive_schedule(set);
    CHECK(psi[0] == 5.2);
    CHECK(psi[1] == 5.1);
    CHECK(psi[2] == 5.0);
}

TEST_CASE("incentive ranks by spread") {
    auto psi = incentive_schedule(weekly_set_with_spreads({1, 10, 5}));
    CHECK(psi[0] == 5.0);
    CHECK(psi[1] == 5.2);
    CHECK(psi[2] == 5.1);
}

TEST_CASE("incentive floors at 0.1 beyond 52 ranks") {
    std::vector<double> spreads(60);
    for (size_t i = 0; i < spreads.size(); ++i) spreads[i] = 60.0 - static_cast<double>(i);
    auto psi = incentive_schedule(weekly_set_with_spreads(spreads));
    CHECK(psi[55] == 0.1);
    CHECK(psi[59] == 0.1);
}

TEST_CASE("weekly aggregation sums demand and averages prices") {
    std::vector<double> ones(kHoursPerWeek, 1.0);
    CHECK(aggregate_to_weekly(ones, SeriesKind::Demand) == std::vector<double>{168.0});
    std::vector<double> price(kHoursPerWeek, 40.0);
    CHECK(aggregate_to_weekly(price, SeriesKind::Price) == std::vector<double>{40.0});

    std::vector<double> ramp(kHoursPerWeek);
    double expected = 0;
    for (int i = 0; i < kHoursPerWeek; ++i) {
        ramp[i] = i + 1;
        expected += i + 1;
    }
    CHECK(expected == 14196.0);
    CHECK(aggregate_to_weekly(ramp, SeriesKind::Demand)[0] == 14196.0);

    CHECK_THROWS_AS(aggregate_to_weekly(std::vector<double>(169, 1.0), SeriesKind::Demand),
                    ValidationError);
}

TEST_CASE("weekly aggregation preserves total energy exactly") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(0, 30);
    std::vector<double> hourly(4 * kHoursPerWeek);
    for (double& v : hourly) v = uni(rng);
    auto weekly = aggregate_to_weekly(hourly, SeriesKind::Demand);
    double hourly_sum = 0, weekly_sum = 0;
    for (double v : hourly) hourly_sum += v;
    for (double v : weekly) weekly_sum += v;
    CHECK(weekly_sum == doctest::Approx(hourly_sum).epsilon(1e-12));
}

TEST_CASE("year trimming and daily expansion") {
    std::vector<double> series(8760, 2.0);
    CHECK(trim_to_year(series).size() == kHoursPerYear);
    CHECK_THROWS_AS(trim_to_year(std::vector<double>(100, 1.0)), ValidationError);
    CHECK(expand_daily_to_hourly({1.0, 2.0}).size() == 48);
    CHECK(expand_daily_to_hourly({1.0, 2.0})[23] == 1.0);
    CHECK(expand_daily_to_hourly({1.0, 2.0})[24] == 2.0);
}

TEST_CASE("series CSV round-trips through the timestamp,value format") {
    auto path = std::filesystem::temp_directory_path() / "bioplan_series_test.csv";
    std::vector<double> values = {1.5, 2.25, 3.0};
    csv::write_series(path, values);
    CHECK(csv::read_series(path) == values);
    std::filesystem::remove(path);
}

TEST_CASE("scenario CSV round-trips") {
    ScenarioSet set = testsup::small_weekly_scenarios();
    auto path = std::filesystem::temp_directory_path() / "bioplan_scen_test.csv";
    csv::write_scenario_set(path, set);
    ScenarioSet back = csv::read_scenario_set(path, set.grid);
    REQUIRE(back.scenarios.size() == set.scenarios.size());
    for (size_t s = 0; s < set.scenarios.size(); ++s) {
        CHECK(back.scenarios[s].probability == set.scenarios[s].probability);
        CHECK(back.scenarios[s].demand == set.scenarios[s].demand);
    }
    std::filesystem::remove(path);
}
