#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bioplan {

inline constexpr int kHoursPerWeek = 168;
inline constexpr int kWeeksPerYear = 52;
inline constexpr int kHoursPerYear = kHoursPerWeek * kWeeksPerYear;

/// Input rejected: names the violated invariant and the offending field path.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_path(field) {}
    std::string field_path;
};

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& invariant) {
    if (!ok) throw ValidationError(field, invariant);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Plant and contract parameters
// ---------------------------------------------------------------------------

/** Extraction-condensing CHP unit: feasible-region and commitment data. */
struct ChpParams {
    double p_max = 0;      // MWe per hour
    double p_min = 0;      // MWe per hour
    double q_max = 0;      // MWt per hour
    double theta = 0;      // power loss per unit of heat extraction (typically negative)
    double xi = 0;         // minimum power-to-heat ratio (back-pressure line)
    double ramp_up = 0;    // MWe per hour
    double ramp_down = 0;  // MWe per hour
    double eff_power = 0;  // per-unit fuel-to-power efficiency
    double eff_heat = 0;   // per-unit fuel-to-heat efficiency
    int min_up = 1;        // hours
    int min_down = 1;      // hours

    void validate(const std::string& path = "chp") const {
        using detail::require;
        require(p_min > 0 && p_min <= p_max, path + ".p_min", "requires 0 < p_min <= p_max");
        require(q_max > 0, path + ".q_max", "must be positive");
        require(eff_power > 0 && eff_power <= 1, path + ".eff_power", "must be in (0, 1]");
        require(eff_heat > 0 && eff_heat <= 1, path + ".eff_heat", "must be in (0, 1]");
        require(ramp_up > 0, path + ".ramp_up", "must be positive");
        require(ramp_down > 0, path + ".ramp_down", "must be positive");
        require(min_up >= 1, path + ".min_up", "must be at least 1 hour");
        require(min_down >= 1, path + ".min_down", "must be at least 1 hour");
        require(xi > 0, path + ".xi", "must be positive");
    }

    /// Fuel drawn per hour when the unit runs at (power, heat).
    double fuel_use(double power, double heat) const {
        return power / eff_power - theta * heat / eff_heat;
    }

    /// Smallest hourly fuel draw compatible with the unit being on.
    double min_fuel_when_on() const {
        double at_zero_heat = p_min / eff_power;
        double q_corner = p_min / (xi - theta);  // p = xi*q meets p - theta*q = p_min
        double at_corner = fuel_use(xi * q_corner, q_corner);
        return std::min(at_zero_heat, at_corner);
    }
};

struct AuxBoilerParams {
    double q_max = 0;    // MWt per hour
    double eff = 0;      // per-unit
    double om_cost = 0;  // EUR/MWt
    double tax = 0;      // EUR/MWt
    double co2_tax = 0;  // EUR/MWt

    void validate(const std::string& path = "aux_boiler") const {
        using detail::require;
        require(q_max > 0, path + ".q_max", "must be positive");
        require(eff > 0 && eff <= 1, path + ".eff", "must be in (0, 1]");
        require(om_cost >= 0, path + ".om_cost", "must be non-negative");
        require(tax >= 0, path + ".tax", "must be non-negative");
        require(co2_tax >= 0, path + ".co2_tax", "must be non-negative");
    }
};

/**
 * Biomass silo. The safety level is a two-level weekly profile: a higher
 * minimum during the heating-season weeks and a lower one otherwise; both
 * come from configuration, not code.
 */
struct BiomassStorageParams {
    double cap = 0;             // MWt
    double safety_heating = 0;  // MWt, weeks inside [heating_first, heating_last]
    double safety_other = 0;    // MWt, remaining weeks
    int heating_first = 20;     // 1-based week numbers
    int heating_last = 45;
    double max_outflow = 0;    // MWt per period
    double delivery_gap = 0;   // hours between any two deliveries
    double initial = 0;        // MWt
    double calorific = 0;      // MWt per tonne
    double inventory_cost = 0; // EUR/MWt

    void validate(const std::string& path = "biomass_storage") const {
        using detail::require;
        require(safety_heating >= 0 && safety_heating <= cap, path + ".safety_heating",
                "must be within [0, cap]");
        require(safety_other >= 0 && safety_other <= cap, path + ".safety_other",
                "must be within [0, cap]");
        require(initial >= 0 && initial <= cap, path + ".initial", "must be within [0, cap]");
        require(calorific > 0, path + ".calorific", "must be positive");
        require(delivery_gap >= 0, path + ".delivery_gap", "must be non-negative");
        require(max_outflow > 0, path + ".max_outflow", "must be positive");
        require(heating_first >= 1 && heating_last >= heating_first, path + ".heating_weeks",
                "must be an increasing 1-based week range");
        require(inventory_cost >= 0, path + ".inventory_cost", "must be non-negative");
    }

    double safety_level(int week_1based) const {
        return (week_1based >= heating_first && week_1based <= heating_last) ? safety_heating
                                                                             : safety_other;
    }
};

struct ThermalStorageParams {
    double cap_min = 0;   // MWt
    double cap_max = 0;   // MWt
    double max_flow = 0;  // MWt per hour
    double initial = 0;   // MWt

    void validate(const std::string& path = "thermal_storage") const {
        using detail::require;
        require(cap_min <= initial && initial <= cap_max, path + ".initial",
                "must be within [cap_min, cap_max]");
        require(max_flow > 0, path + ".max_flow", "must be positive");
    }
};

struct CostParams {
    double chp_op = 0;                // EUR/MWt
    double startup = 0;               // EUR
    double shutdown = 0;              // EUR
    double elec_tax = 0;              // EUR/MWe
    double biomass_incentive = 0;     // EUR/MWe
    double biomass_share_target = 0;  // per-unit
    double penalty_store = 0;         // EUR per MWt
    double penalty_miss = 0;          // EUR per MWh
    double penalty_bm = 0;            // EUR per MWt

    void validate(const std::string& path = "costs") const {
        using detail::require;
        require(penalty_store >= 0, path + ".penalty_store", "must be non-negative");
        require(penalty_miss >= 0, path + ".penalty_miss", "must be non-negative");
        require(penalty_bm >= 0, path + ".penalty_bm", "must be non-negative");
        require(biomass_share_target >= 0 && biomass_share_target <= 1,
                path + ".biomass_share_target", "must be in [0, 1]");
    }
};

/** One supplier contract. A fixed contract is exactly one with no options. */
struct ContractSpec {
    std::string id;
    double base_price = 0;   // EUR per tonne of nominal amount
    double up_price = 0;     // EUR per tonne of up-scaling option
    double down_price = 0;   // EUR per tonne of down-scaling option
    double amount_min = 0;   // tonnes per delivery
    double amount_max = 0;   // tonnes per delivery
    double freq = 0;         // minimum hours between deliveries
    int deliveries_min = 0;  // per planning horizon
    int deliveries_max = 0;  // per planning horizon
    double opt_up = 0;       // per-unit of nominal amount
    double opt_down = 0;     // per-unit of nominal amount

    bool is_fixed() const { return opt_up == 0.0 && opt_down == 0.0; }

    void validate(const std::string& path = "contract") const {
        using detail::require;
        require(amount_min >= 0 && amount_min <= amount_max, path + ".amount_min",
                "requires 0 <= amount_min <= amount_max");
        require(deliveries_min <= deliveries_max, path + ".deliveries_min",
                "requires deliveries_min <= deliveries_max");
        require(deliveries_min >= 0, path + ".deliveries_min", "must be non-negative");
        require(opt_up >= 0 && opt_up <= 1, path + ".opt_up", "must be in [0, 1]");
        require(opt_down >= 0 && opt_down <= 1, path + ".opt_down", "must be in [0, 1]");
        require(base_price >= 0, path + ".base_price", "must be non-negative");
        require(up_price >= 0, path + ".up_price", "must be non-negative");
        require(down_price >= 0, path + ".down_price", "must be non-negative");
        require(freq >= 0, path + ".freq", "must be non-negative");
    }

    /// Weekly delivery cap implied by the delivery frequency.
    int max_deliveries_per_week() const {
        if (freq <= 0) return deliveries_max;
        return std::max(static_cast<int>(std::floor(kHoursPerWeek / freq)), 1);
    }

    /// Length in weeks of the rolling window carrying the frequency cap.
    int frequency_window_weeks() const {
        if (freq <= 0) return 1;
        return std::max(static_cast<int>(std::floor(freq / kHoursPerWeek)), 1);
    }
};

// ---------------------------------------------------------------------------
// Time grid, scenarios, system state
// ---------------------------------------------------------------------------

enum class Resolution { Weekly, Hourly };

/**
 * Planning grid. Weekly grids have one period per week; hourly grids have
 * hours_per_week periods per week (168 for production grids, smaller only
 * for collapsed test instances). Periods are 0-based internally.
 */
struct TimeGrid {
    Resolution resolution = Resolution::Weekly;
    int n_periods = 0;
    int n_weeks = 0;
    int hours_per_week = kHoursPerWeek;

    static TimeGrid weekly(int weeks) {
        TimeGrid g;
        g.resolution = Resolution::Weekly;
        g.n_periods = weeks;
        g.n_weeks = weeks;
        g.hours_per_week = 1;
        g.validate();
        return g;
    }

    static TimeGrid hourly(int weeks) { return hourly_custom(weeks, kHoursPerWeek); }

    static TimeGrid hourly_custom(int weeks, int hours_per_week) {
        TimeGrid g;
        g.resolution = Resolution::Hourly;
        g.n_weeks = weeks;
        g.hours_per_week = hours_per_week;
        g.n_periods = weeks * hours_per_week;
        g.validate();
        return g;
    }

    void validate() const {
        using detail::require;
        require(n_weeks >= 1, "grid.n_weeks", "must be positive");
        require(hours_per_week >= 1, "grid.hours_per_week", "must be positive");
        require(n_periods == n_weeks * (resolution == Resolution::Weekly ? 1 : hours_per_week),
                "grid.n_periods", "week partition must be disjoint and cover all periods");
    }

    int week_of(int period) const {
        return resolution == Resolution::Weekly ? period : period / hours_per_week;
    }
    int week_begin(int week) const {
        return resolution == Resolution::Weekly ? week : week * hours_per_week;
    }
    int week_end(int week) const {  // one past the last period of the week
        return resolution == Resolution::Weekly ? week + 1 : (week + 1) * hours_per_week;
    }

    bool operator==(const TimeGrid&) const = default;
};

/** One joint trajectory of the uncertain quantities. */
struct Scenario {
    double probability = 0;
    std::vector<double> demand;      // MWt per period
    std::vector<double> elec_price;  // EUR/MWe per period
    std::vector<double> fuel_price;  // EUR/MWt per period

    void validate(int n_periods, const std::string& path = "scenario") const {
        using detail::require;
        require(probability > 0 && probability <= 1, path + ".probability", "must be in (0, 1]");
        require(static_cast<int>(demand.size()) == n_periods, path + ".demand",
                "series length must match the grid");
        require(static_cast<int>(elec_price.size()) == n_periods, path + ".elec_price",
                "series length must match the grid");
        require(static_cast<int>(fuel_price.size()) == n_periods, path + ".fuel_price",
                "series length must match the grid");
        for (double d : demand)
            require(d >= 0, path + ".demand", "must be non-negative");
    }
};

struct ScenarioSet {
    TimeGrid grid;
    std::vector<Scenario> scenarios;

    void validate(const std::string& path = "scenario_set") const {
        grid.validate();
        detail::require(!scenarios.empty(), path + ".scenarios", "must not be empty");
        double total = 0;
        for (size_t i = 0; i < scenarios.size(); ++i) {
            scenarios[i].validate(grid.n_periods, path + ".scenarios[" + std::to_string(i) + "]");
            total += scenarios[i].probability;
        }
        detail::require(std::abs(total - 1.0) <= 1e-9, path + ".scenarios",
                        "probabilities must sum to 1 within 1e-9");
    }

    size_t size() const { return scenarios.size(); }
};

/** Week-boundary carry-over between consecutive operational solves. */
struct SystemState {
    double biomass_level = 0;  // MWt
    double thermal_level = 0;  // MWt
    bool chp_on = false;
    double chp_power = 0;   // MWe
    int hours_in_state = 0; // consecutive hours in the current on/off status

    void validate(const ThermalStorageParams& thermal, const std::string& path = "state") const {
        using detail::require;
        require(biomass_level >= 0, path + ".biomass_level", "must be non-negative");
        require(thermal_level >= thermal.cap_min - 1e-9 && thermal_level <= thermal.cap_max + 1e-9,
                path + ".thermal_level", "must be within the thermal storage bounds");
        require(chp_on || chp_power == 0, path + ".chp_power", "must be zero while the unit is off");
        require(hours_in_state >= 0, path + ".hours_in_state", "must be non-negative");
    }
};

/** Everything fixed about one municipality's system. */
struct PlantConfig {
    std::string name;
    ChpParams chp;
    AuxBoilerParams aux;
    BiomassStorageParams biomass_storage;
    ThermalStorageParams thermal_storage;
    CostParams costs;
    std::vector<ContractSpec> contracts;

    void validate() const {
        detail::require(!name.empty(), "name", "must not be empty");
        chp.validate();
        aux.validate();
        biomass_storage.validate();
        thermal_storage.validate();
        costs.validate();
        for (size_t j = 0; j < contracts.size(); ++j)
            contracts[j].validate("contracts[" + std::to_string(j) + "]");
    }

    SystemState initial_state() const {
        SystemState s;
        s.biomass_level = biomass_storage.initial;
        s.thermal_level = thermal_storage.initial;
        s.chp_on = false;
        s.chp_power = 0;
        s.hours_in_state = chp.min_down;  // no residual min-down carry at year start
        return s;
    }
};

// ---------------------------------------------------------------------------
// Derived series
// ---------------------------------------------------------------------------

struct CostSeries {
    std::vector<double> net_elec_cost;  // EUR/MWe, negative values are profit
    std::vector<double> aux_unit_cost;  // EUR/MWt of fuel into the boiler
};

/// Net electricity production cost elec_tax - incentive - market price.
inline double net_elec_cost(double market_price, const CostParams& costs) {
    return costs.elec_tax - costs.biomass_incentive - market_price;
}

/// Boiler fuel price plus O&M and taxes, per MWt of fuel.
inline double aux_unit_cost(double fuel_price, const AuxBoilerParams& aux) {
    return fuel_price + aux.om_cost + aux.tax + aux.co2_tax;
}

/**
 * Element-wise composite cost series: the net electricity cost
 * (elec_tax - incentive - market price, negative = profit) and the
 * auxiliary-boiler unit cost (fuel + O&M + tax + CO2 tax).
 */
inline CostSeries derive_cost_series(const std::vector<double>& elec_price,
                                     const std::vector<double>& fuel_price,
                                     const CostParams& costs, const AuxBoilerParams& aux) {
    detail::require(!elec_price.empty(), "elec_price", "series must be non-empty");
    detail::require(!fuel_price.empty(), "fuel_price", "series must be non-empty");
    CostSeries out;
    out.net_elec_cost.reserve(elec_price.size());
    out.aux_unit_cost.reserve(fuel_price.size());
    for (double p : elec_price) out.net_elec_cost.push_back(net_elec_cost(p, costs));
    for (double f : fuel_price) out.aux_unit_cost.push_back(aux_unit_cost(f, aux));
    return out;
}

/**
 * Weekly option-placement incentive. Weeks are ranked by descending
 * cross-scenario demand spread (ties to the earlier week); rank r earns
 * (53 - r)/10 euros, floored at 0.1, so a 52-week horizon spans 5.2 down
 * to 0.1 in steps of 0.1.
 */
inline std::vector<double> incentive_schedule(const ScenarioSet& weekly) {
    weekly.validate();
    detail::require(weekly.grid.resolution == Resolution::Weekly, "incentive.grid",
                    "requires a weekly grid");
    int n = weekly.grid.n_periods;

    std::vector<double> spread(n, 0.0);
    for (int t = 0; t < n; ++t) {
        double lo = weekly.scenarios.front().demand[t];
        double hi = lo;
        for (const Scenario& s : weekly.scenarios) {
            lo = std::min(lo, s.demand[t]);
            hi = std::max(hi, s.demand[t]);
        }
        spread[t] = hi - lo;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (spread[a] != spread[b]) return spread[a] > spread[b];
        return a < b;
    });

    std::vector<double> psi(n, 0.0);
    for (int rank = 0; rank < n; ++rank)
        psi[order[rank]] = std::max(52 - rank, 1) / 10.0;
    return psi;
}

enum class SeriesKind { Demand, Price };

/**
 * Hourly-to-weekly aggregation: demand sums per 168-hour block (total
 * energy is preserved exactly), prices average per block.
 */
inline std::vector<double> aggregate_to_weekly(const std::vector<double>& hourly, SeriesKind kind) {
    detail::require(!hourly.empty() && hourly.size() % kHoursPerWeek == 0, "series",
                    "length must be a positive multiple of 168");
    size_t weeks = hourly.size() / kHoursPerWeek;
    std::vector<double> out(weeks, 0.0);
    for (size_t w = 0; w < weeks; ++w) {
        double sum = 0;
        for (size_t h = 0; h < kHoursPerWeek; ++h) sum += hourly[w * kHoursPerWeek + h];
        out[w] = kind == SeriesKind::Demand ? sum : sum / kHoursPerWeek;
    }
    return out;
}

/// Trims an hourly year series to exactly 52 weeks (extra hours dropped from the end).
inline std::vector<double> trim_to_year(std::vector<double> hourly) {
    detail::require(hourly.size() >= kHoursPerYear, "series",
                    "needs at least 8736 hourly values for a planning year");
    hourly.resize(kHoursPerYear);
    return hourly;
}

/// Daily series to hourly by repeating each value 24 times.
inline std::vector<double> expand_daily_to_hourly(const std::vector<double>& daily) {
    std::vector<double> out;
    out.reserve(daily.size() * 24);
    for (double v : daily)
        for (int h = 0; h < 24; ++h) out.push_back(v);
    return out;
}

}  // namespace bioplan
