#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bioplan/armax.hpp"
#include "bioplan/domain.hpp"
#include "bioplan/kmedoid.hpp"

namespace bioplan {

/** One historical year, hourly, aligned summer-to-summer, 52 weeks. */
struct YearSeries {
    std::vector<double> demand;
    std::vector<double> elec_price;
    std::vector<double> fuel_price;

    void validate(const std::string& path) const {
        detail::require(demand.size() == kHoursPerYear, path + ".demand",
                        "must hold exactly 8736 hourly values");
        detail::require(elec_price.size() == kHoursPerYear, path + ".elec_price",
                        "must hold exactly 8736 hourly values");
        detail::require(fuel_price.size() == kHoursPerYear, path + ".fuel_price",
                        "must hold exactly 8736 hourly values");
    }
};

/**
 * Five consecutive historical years, oldest first. Scenario probabilities
 * favour recency: 0.15 for the first three years, 0.275 for the last two.
 */
struct HistoricalArchive {
    std::vector<YearSeries> years;

    static std::vector<double> year_probabilities() { return {0.15, 0.15, 0.15, 0.275, 0.275}; }

    void validate() const {
        detail::require(years.size() == 5, "archive.years", "exactly 5 historical years required");
        for (size_t i = 0; i < years.size(); ++i)
            years[i].validate("archive.years[" + std::to_string(i) + "]");
    }
};

/// Hourly slice of one year covering weeks [week0, week0 + n_weeks), both
/// 1-based; weeks past 52 wrap to the calendar-aligned start of the year.
inline std::vector<double> year_window(const std::vector<double>& year, int week0, int n_weeks) {
    detail::require(week0 >= 1, "window.week", "week index is 1-based");
    detail::require(n_weeks >= 1 && n_weeks <= kWeeksPerYear, "window.horizon",
                    "archive shorter than the requested window");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n_weeks) * kHoursPerWeek);
    for (int w = 0; w < n_weeks; ++w) {
        int week = (week0 - 1 + w) % kWeeksPerYear;
        for (int h = 0; h < kHoursPerWeek; ++h)
            out.push_back(year[static_cast<size_t>(week) * kHoursPerWeek + h]);
    }
    return out;
}

/// Probability-weighted combination of the five years, element-wise.
inline std::vector<double> expected_over_years(const HistoricalArchive& archive,
                                               const std::vector<double> YearSeries::* series) {
    archive.validate();
    auto probs = HistoricalArchive::year_probabilities();
    std::vector<double> out(kHoursPerYear, 0.0);
    for (size_t y = 0; y < archive.years.size(); ++y) {
        const auto& s = archive.years[y].*series;
        for (size_t t = 0; t < out.size(); ++t) out[t] += probs[y] * s[t];
    }
    return out;
}

/**
 * Method P: one scenario per historical year over the target window, hourly.
 * Demand and electricity price come from the year itself; the boiler fuel
 * price is kept at its expected value across years.
 */
inline ScenarioSet historical_scenarios(const HistoricalArchive& archive, int week0, int n_weeks) {
    archive.validate();
    auto probs = HistoricalArchive::year_probabilities();
    auto fuel_expected = expected_over_years(archive, &YearSeries::fuel_price);

    ScenarioSet set;
    set.grid = TimeGrid::hourly(n_weeks);
    for (size_t y = 0; y < archive.years.size(); ++y) {
        Scenario s;
        s.probability = probs[y];
        s.demand = year_window(archive.years[y].demand, week0, n_weeks);
        s.elec_price = year_window(archive.years[y].elec_price, week0, n_weeks);
        s.fuel_price = year_window(fuel_expected, week0, n_weeks);
        set.scenarios.push_back(std::move(s));
    }
    set.validate();
    return set;
}

/// Weekly demand scenarios for the contract phase: one scenario per year,
/// demand summed per week, prices carried as weekly means of the same year.
inline ScenarioSet weekly_demand_scenarios(const HistoricalArchive& archive) {
    archive.validate();
    auto probs = HistoricalArchive::year_probabilities();
    ScenarioSet set;
    set.grid = TimeGrid::weekly(kWeeksPerYear);
    for (size_t y = 0; y < archive.years.size(); ++y) {
        Scenario s;
        s.probability = probs[y];
        s.demand = aggregate_to_weekly(archive.years[y].demand, SeriesKind::Demand);
        s.elec_price = aggregate_to_weekly(archive.years[y].elec_price, SeriesKind::Price);
        s.fuel_price = aggregate_to_weekly(archive.years[y].fuel_price, SeriesKind::Price);
        set.scenarios.push_back(std::move(s));
    }
    set.validate();
    return set;
}

/// Single expected-value scenario over the window (probability 1).
inline ScenarioSet expected_scenario_set(const HistoricalArchive& archive, int week0, int n_weeks) {
    Scenario s;
    s.probability = 1.0;
    s.demand = year_window(expected_over_years(archive, &YearSeries::demand), week0, n_weeks);
    s.elec_price = year_window(expected_over_years(archive, &YearSeries::elec_price), week0, n_weeks);
    s.fuel_price = year_window(expected_over_years(archive, &YearSeries::fuel_price), week0, n_weeks);
    ScenarioSet set;
    set.grid = TimeGrid::hourly(n_weeks);
    set.scenarios.push_back(std::move(s));
    set.validate();
    return set;
}

/**
 * Reduces joint (demand, electricity price) path bundles to k scenarios by
 * k-medoid clustering. The distance is Euclidean over the standardized
 * concatenated trajectory, each quantity z-scored across all paths and
 * periods; medoids are members of the input bundle and each carries
 * probability cluster size / n_paths.
 */
inline ScenarioSet reduce_k_medoid(const PathBundle& demand, const PathBundle& elec,
                                   const std::vector<double>& fuel_expected, int k,
                                   uint64_t seed) {
    detail::require(demand.n_paths() == elec.n_paths(), "paths", "bundles must pair up");
    detail::require(demand.horizon == elec.horizon, "paths", "bundles must share a horizon");
    detail::require(k >= 1 && k <= demand.n_paths(), "k", "requires 1 <= k <= n_paths");
    detail::require(static_cast<int>(fuel_expected.size()) == demand.horizon, "fuel_expected",
                    "must cover the horizon");

    const int n = demand.n_paths();
    const int horizon = demand.horizon;

    auto standardizer = [&](const PathBundle& bundle) {
        double mean = 0, count = 0;
        for (const auto& path : bundle.paths)
            for (double v : path) {
                mean += v;
                ++count;
            }
        mean /= count;
        double var = 0;
        for (const auto& path : bundle.paths)
            for (double v : path) var += (v - mean) * (v - mean);
        double sd = std::sqrt(var / count);
        if (sd < 1e-12) sd = 1.0;
        return std::pair<double, double>(mean, sd);
    };
    auto [dmean, dsd] = standardizer(demand);
    auto [pmean, psd] = standardizer(elec);

    std::vector<std::vector<double>> points(n);
    for (int i = 0; i < n; ++i) {
        points[i].reserve(2 * horizon);
        for (double v : demand.paths[i]) points[i].push_back((v - dmean) / dsd);
        for (double v : elec.paths[i]) points[i].push_back((v - pmean) / psd);
    }

    KMedoidResult clusters = k_medoids(points, k, seed);

    int weeks = std::max(horizon / kHoursPerWeek, 1);
    ScenarioSet set;
    set.grid = horizon % kHoursPerWeek == 0 ? TimeGrid::hourly(weeks)
                                            : TimeGrid::hourly_custom(1, horizon);
    for (int m = 0; m < k; ++m) {
        Scenario s;
        s.probability = static_cast<double>(clusters.cluster_size[m]) / n;
        s.demand = demand.paths[clusters.medoids[m]];
        s.elec_price = elec.paths[clusters.medoids[m]];
        s.fuel_price = fuel_expected;
        set.scenarios.push_back(std::move(s));
    }
    set.validate();
    return set;
}

enum class ScenarioMethod { P, F1, F2, PplusF1, PplusF2, Expected };

inline ScenarioMethod parse_method(const std::string& text) {
    if (text == "P") return ScenarioMethod::P;
    if (text == "F1") return ScenarioMethod::F1;
    if (text == "F2") return ScenarioMethod::F2;
    if (text == "P+F1") return ScenarioMethod::PplusF1;
    if (text == "P+F2") return ScenarioMethod::PplusF2;
    throw ValidationError("method", "unknown scenario method '" + text +
                                        "' (expected P, F1, F2, P+F1 or P+F2)");
}

inline const char* to_string(ScenarioMethod m) {
    switch (m) {
        case ScenarioMethod::P: return "P";
        case ScenarioMethod::F1: return "F1";
        case ScenarioMethod::F2: return "F2";
        case ScenarioMethod::PplusF1: return "P+F1";
        case ScenarioMethod::PplusF2: return "P+F2";
        case ScenarioMethod::Expected: return "EV";
    }
    return "?";
}

/** Knobs of the forecast-based methods; defaults follow the production setup. */
struct ScenGenConfig {
    int ar_order = 2;
    int ma_order = 1;
    int n_harmonics = 3;
    int n_paths = 2500;
    int n_reduced = 5;
    int fit_window = 8 * kHoursPerWeek;  // hours of trailing history used for fitting
};

/** Most recent observations available when a week comes into focus. */
struct RecentObservations {
    std::vector<double> demand;
    std::vector<double> elec_price;

    void validate() const {
        detail::require(demand.size() == elec_price.size(), "recent",
                        "demand and price history must align");
        detail::require(demand.size() % kHoursPerWeek == 0, "recent",
                        "history must end on a week boundary");
    }
};

namespace detail {

inline std::vector<double> tail_window(const std::vector<double>& series, int window) {
    int keep = std::min<int>(window, static_cast<int>(series.size()));
    keep -= keep % kHoursPerWeek;  // stay aligned with the weekly seasonality
    return std::vector<double>(series.end() - keep, series.end());
}

inline double raw_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0;
    for (size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
}

}  // namespace detail

/**
 * Builds the operational scenario set for the receding-horizon window
 * starting at `week0` (1-based) spanning `horizon_weeks`.
 *
 *   P     historical years over the window
 *   F2    ARMAX forecast simulated over the full window, reduced to 5
 *   F1    ARMAX forecast for the first week, reduced to 5, then extended
 *         with historical data: the most likely scenario continues with the
 *         most recent year, the others with their nearest historical year
 *   P+F1, P+F2   union of both sets, probabilities renormalized to one
 *
 * The fuel price is always the expected value across years. All randomness
 * derives from `seed`.
 */
inline ScenarioSet build_scenario_set(ScenarioMethod method, const HistoricalArchive& archive,
                                      const RecentObservations& recent, int week0,
                                      int horizon_weeks, uint64_t seed,
                                      const ScenGenConfig& cfg = {}) {
    archive.validate();
    detail::require(horizon_weeks >= 1, "horizon", "must span at least one week");

    if (method == ScenarioMethod::P) return historical_scenarios(archive, week0, horizon_weeks);
    if (method == ScenarioMethod::Expected)
        return expected_scenario_set(archive, week0, horizon_weeks);

    if (method == ScenarioMethod::PplusF1 || method == ScenarioMethod::PplusF2) {
        ScenarioSet p = historical_scenarios(archive, week0, horizon_weeks);
        ScenarioSet f = build_scenario_set(
            method == ScenarioMethod::PplusF1 ? ScenarioMethod::F1 : ScenarioMethod::F2, archive,
            recent, week0, horizon_weeks, seed, cfg);
        ScenarioSet joined;
        joined.grid = p.grid;
        for (auto& s : p.scenarios) {
            s.probability /= 2.0;
            joined.scenarios.push_back(std::move(s));
        }
        for (auto& s : f.scenarios) {
            s.probability /= 2.0;
            joined.scenarios.push_back(std::move(s));
        }
        joined.validate();
        return joined;
    }

    // F1 / F2: fit on the trailing window of recent observations
    recent.validate();
    auto demand_history = detail::tail_window(recent.demand, cfg.fit_window);
    auto elec_history = detail::tail_window(recent.elec_price, cfg.fit_window);

    ArmaxModel demand_model =
        fit_armax(demand_history, cfg.ar_order, cfg.ma_order, cfg.n_harmonics);
    ArmaxModel elec_model = fit_armax(elec_history, cfg.ar_order, cfg.ma_order, cfg.n_harmonics);

    int forecast_weeks = method == ScenarioMethod::F1 ? 1 : horizon_weeks;
    int forecast_hours = forecast_weeks * kHoursPerWeek;

    PathBundle demand_paths = simulate_paths(demand_model, forecast_hours, cfg.n_paths,
                                             detail::mix_seed(seed, 101), /*clip_at_zero=*/true);
    PathBundle elec_paths = simulate_paths(elec_model, forecast_hours, cfg.n_paths,
                                           detail::mix_seed(seed, 202), /*clip_at_zero=*/false);

    auto fuel_expected_year = expected_over_years(archive, &YearSeries::fuel_price);
    auto fuel_window = year_window(fuel_expected_year, week0, horizon_weeks);
    std::vector<double> fuel_forecast(fuel_window.begin(), fuel_window.begin() + forecast_hours);

    ScenarioSet reduced = reduce_k_medoid(demand_paths, elec_paths, fuel_forecast, cfg.n_reduced,
                                          detail::mix_seed(seed, 303));

    if (method == ScenarioMethod::F2 || horizon_weeks == 1) {
        if (horizon_weeks == 1) return reduced;
        reduced.grid = TimeGrid::hourly(horizon_weeks);
        reduced.validate();
        return reduced;
    }

    // F1: splice weeks 2..W from historical years
    int top = 0;
    for (size_t i = 1; i < reduced.scenarios.size(); ++i)
        if (reduced.scenarios[i].probability > reduced.scenarios[top].probability)
            top = static_cast<int>(i);

    const int n_years = static_cast<int>(archive.years.size());
    auto year_week1 = [&](int y) {
        auto d = year_window(archive.years[y].demand, week0, 1);
        auto p = year_window(archive.years[y].elec_price, week0, 1);
        d.insert(d.end(), p.begin(), p.end());
        return d;
    };

    ScenarioSet extended;
    extended.grid = TimeGrid::hourly(horizon_weeks);
    for (size_t i = 0; i < reduced.scenarios.size(); ++i) {
        const Scenario& head = reduced.scenarios[i];
        int source_year;
        if (static_cast<int>(i) == top) {
            source_year = n_years - 1;  // most recent year
        } else {
            std::vector<double> joint = head.demand;
            joint.insert(joint.end(), head.elec_price.begin(), head.elec_price.end());
            source_year = 0;
            double best = std::numeric_limits<double>::infinity();
            for (int y = 0; y < n_years; ++y) {
                double d = detail::raw_distance(joint, year_week1(y));
                if (d < best || (d == best && y > source_year)) {
                    best = d;
                    source_year = y;
                }
            }
        }
        Scenario s;
        s.probability = head.probability;
        s.demand = head.demand;
        s.elec_price = head.elec_price;
        auto demand_rest = year_window(archive.years[source_year].demand, week0 + 1, horizon_weeks - 1);
        auto elec_rest =
            year_window(archive.years[source_year].elec_price, week0 + 1, horizon_weeks - 1);
        s.demand.insert(s.demand.end(), demand_rest.begin(), demand_rest.end());
        s.elec_price.insert(s.elec_price.end(), elec_rest.begin(), elec_rest.end());
        s.fuel_price = fuel_window;
        extended.scenarios.push_back(std::move(s));
    }
    extended.validate();
    return extended;
}

}  // namespace bioplan
