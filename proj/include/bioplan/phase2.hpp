#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bioplan/domain.hpp"
#include "bioplan/milp.hpp"
#include "bioplan/phase1.hpp"

namespace bioplan {

/**
 * First-stage decisions of one operational solve: delivery hours, amounts
 * and option usage for the week in focus, identical across scenarios by
 * non-anticipativity.
 */
struct WeekDecisions {
    struct ContractRow {
        std::string id;
        std::vector<int> deliver;      // 0/1 per hour of the week
        std::vector<double> amount;    // tonnes per hour
        std::vector<double> up_used;   // tonnes per hour
        std::vector<double> down_used; // tonnes per hour
    };

    int hours = kHoursPerWeek;
    std::vector<ContractRow> contracts;

    void validate(const std::vector<ContractSpec>& specs, const ContractPlan& plan, int week,
                  double delivery_gap, double tol = 1e-6) const {
        // at most one delivery in any delivery_gap window across all contracts
        std::vector<int> delivery_hours;
        for (const auto& row : contracts)
            for (int t = 0; t < hours; ++t)
                if (row.deliver[t]) delivery_hours.push_back(t);
        std::sort(delivery_hours.begin(), delivery_hours.end());
        for (size_t i = 1; i < delivery_hours.size(); ++i)
            detail::require(delivery_hours[i] - delivery_hours[i - 1] > delivery_gap,
                            "decisions.deliveries",
                            "two deliveries violate the unloading gap");

        for (const auto& row : contracts) {
            int j = -1;
            for (size_t i = 0; i < specs.size(); ++i)
                if (specs[i].id == row.id) j = static_cast<int>(i);
            detail::require(j >= 0, "decisions.contract", "unknown contract id " + row.id);
            const ContractPlan::Row& planned = plan.row(j, week);
            int n_deliveries = 0;
            double amount = 0, up = 0, down = 0;
            for (int t = 0; t < hours; ++t) {
                n_deliveries += row.deliver[t];
                amount += row.amount[t];
                up += row.up_used[t];
                down += row.down_used[t];
            }
            detail::require(n_deliveries == planned.deliveries, "decisions." + row.id,
                            "delivery count must match the contract plan");
            detail::require(std::abs(amount - planned.base) <= tol, "decisions." + row.id,
                            "total amount must match the contract plan");
            detail::require(up <= planned.up + tol, "decisions." + row.id,
                            "up-scaling beyond the contracted option");
            detail::require(down <= planned.down + tol, "decisions." + row.id,
                            "down-scaling beyond the contracted option");
        }
    }
};

/** Realized cost breakdown and carry-over of one planning week. */
struct WeeklyResult {
    int week = 0;  // 1-based
    double biomass_cost = 0;
    double chp_op_cost = 0;
    double startup_cost = 0;
    double shutdown_cost = 0;
    double elec_net_cost = 0;  // negative values are market profit
    double aux_cost = 0;
    double inventory_cost = 0;
    double penalty_miss = 0;
    double penalty_excess = 0;
    double missed_heat_mwh = 0;
    double excess_storage_mwt = 0;
    SystemState end_state;

    double total() const {
        return biomass_cost + chp_op_cost + startup_cost + shutdown_cost + elec_net_cost +
               aux_cost + inventory_cost + penalty_miss + penalty_excess;
    }
};

/** Variable handles of one built operational model. */
struct Phase2Index {
    TimeGrid grid;
    int first_week = 1;        // absolute 1-based week of the focus week
    int n_scenarios = 0;
    std::vector<int> active;   // indices into config.contracts

    // [active contract][t][s]
    std::vector<std::vector<std::vector<milp::VarId>>> dhat, b, rbp, rbm;
    // [t][s]
    std::vector<std::vector<milp::VarId>> del, delin, delout, delex;
    std::vector<std::vector<milp::VarId>> x, y, z, p;
    std::vector<std::vector<milp::VarId>> qchp, qchpn, qchps;
    std::vector<std::vector<milp::VarId>> qaux, qauxn, qauxs;
    std::vector<std::vector<milp::VarId>> sto, stoin, stoout, qmiss;

    double objective_constant = 0;
    SystemState initial_state;
};

struct Phase2Model {
    milp::Model model;
    Phase2Index index;
};

/**
 * Builds the hourly operational stochastic MILP for the receding-horizon
 * window starting at plan week `first_week` (1-based) and spanning the
 * scenario grid. Contracts without deliveries anywhere in the window are
 * pruned. Week-1 delivery decisions are tied across scenarios by explicit
 * non-anticipativity rows; the biomass safety level binds only from the
 * second week on; the thermal level must return to its initial value at
 * the horizon end. The contracted cost of the window weeks enters as the
 * objective constant.
 *
 * Residual minimum up/down times from `state` are honoured by pre-fixing
 * the commitment status for the carried-over hours; the on-carry is capped
 * by the fuel actually in storage so a drained silo can never make the
 * model infeasible.
 */
inline Phase2Model build_operational_model(const PlantConfig& config, const ContractPlan& plan,
                                           int first_week, const ScenarioSet& scenarios,
                                           const SystemState& state) {
    using milp::LinExpr;
    using milp::Sense;
    using milp::VarId;
    using milp::VarKind;

    config.validate();
    scenarios.validate();
    state.validate(config.thermal_storage);
    detail::require(scenarios.grid.resolution == Resolution::Hourly, "phase2.grid",
                    "requires an hourly grid");

    const TimeGrid& grid = scenarios.grid;
    const int T = grid.n_periods;
    const int W = grid.n_weeks;
    const int S = static_cast<int>(scenarios.scenarios.size());
    detail::require(first_week >= 1 && first_week + W - 1 <= plan.n_weeks, "phase2.window",
                    "missing plan row for a window week");

    const ChpParams& chp = config.chp;
    const BiomassStorageParams& silo = config.biomass_storage;
    const ThermalStorageParams& tank = config.thermal_storage;
    const CostParams& costs = config.costs;

    Phase2Model out;
    out.model = milp::Model("operational_w" + std::to_string(first_week));
    milp::Model& m = out.model;
    Phase2Index& ix = out.index;
    ix.grid = grid;
    ix.first_week = first_week;
    ix.n_scenarios = S;
    ix.initial_state = state;

    // contracts with deliveries somewhere in the window
    for (size_t j = 0; j < config.contracts.size(); ++j) {
        int total = 0;
        for (int w = 0; w < W; ++w) total += plan.row(j, first_week - 1 + w).deliveries;
        if (total > 0) ix.active.push_back(static_cast<int>(j));
    }
    const int A = static_cast<int>(ix.active.size());

    auto tag = [](const std::string& stem, int t, int s) {
        return stem + "_t" + std::to_string(t + 1) + "_s" + std::to_string(s + 1);
    };

    // delivery variables; amount bounds tightened to the window's plan rows
    ix.dhat.assign(A, std::vector<std::vector<VarId>>(T, std::vector<VarId>(S)));
    ix.b.assign(A, std::vector<std::vector<VarId>>(T, std::vector<VarId>(S)));
    ix.rbp.assign(A, std::vector<std::vector<VarId>>(T, std::vector<VarId>(S)));
    ix.rbm.assign(A, std::vector<std::vector<VarId>>(T, std::vector<VarId>(S)));
    for (int a = 0; a < A; ++a) {
        const ContractSpec& c = config.contracts[ix.active[a]];
        for (int t = 0; t < T; ++t) {
            const ContractPlan::Row& row = plan.row(ix.active[a], first_week - 1 + grid.week_of(t));
            for (int s = 0; s < S; ++s) {
                std::string suffix = "_j" + c.id + "_t" + std::to_string(t + 1) + "_s" +
                                     std::to_string(s + 1);
                ix.dhat[a][t][s] = m.add_var("dhat" + suffix, VarKind::Binary, 0, 1);
                ix.b[a][t][s] = m.add_var("b" + suffix, VarKind::Continuous, 0,
                                          std::min(c.amount_max, row.base));
                ix.rbp[a][t][s] = m.add_var("rbp" + suffix, VarKind::Continuous, 0, row.up);
                ix.rbm[a][t][s] = m.add_var("rbm" + suffix, VarKind::Continuous, 0, row.down);
            }
        }
    }

    // commitment
    auto binary_grid = [&](const char* stem) {
        std::vector<std::vector<VarId>> vars(T, std::vector<VarId>(S));
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s) vars[t][s] = m.add_var(tag(stem, t, s), VarKind::Binary, 0, 1);
        return vars;
    };
    ix.x = binary_grid("x");
    ix.y = binary_grid("y");
    ix.z = binary_grid("z");

    auto continuous_grid = [&](const char* stem, double lb, double ub) {
        std::vector<std::vector<VarId>> vars(T, std::vector<VarId>(S));
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s)
                vars[t][s] = m.add_var(tag(stem, t, s), VarKind::Continuous, lb, ub);
        return vars;
    };

    // p <= p_max follows from the region rows since theta <= 0
    ix.p = continuous_grid("p", 0, chp.p_max);
    ix.qchp = continuous_grid("qchp", 0, chp.q_max);
    ix.qchpn = continuous_grid("qchpn", 0, chp.q_max);
    ix.qchps = continuous_grid("qchps", 0, std::min(chp.q_max, tank.max_flow));
    ix.qaux = continuous_grid("qaux", 0, config.aux.q_max);
    ix.qauxn = continuous_grid("qauxn", 0, config.aux.q_max);
    ix.qauxs = continuous_grid("qauxs", 0, std::min(config.aux.q_max, tank.max_flow));
    ix.qmiss.resize(T, std::vector<VarId>(S));
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            ix.qmiss[t][s] = m.add_var(tag("qmiss", t, s), VarKind::Continuous, 0,
                                       scenarios.scenarios[s].demand[t]);

    // weekly inflow ceilings support finite silo-level bounds
    std::vector<double> weekly_inflow_cap(W, 0.0);
    for (int w = 0; w < W; ++w)
        for (int a = 0; a < A; ++a) {
            const ContractPlan::Row& row = plan.row(ix.active[a], first_week - 1 + w);
            weekly_inflow_cap[w] += silo.calorific * (row.base + row.up);
        }
    std::vector<double> level_cap(W, 0.0);
    double running = state.biomass_level;
    for (int w = 0; w < W; ++w) {
        running += weekly_inflow_cap[w];
        level_cap[w] = running;
    }

    ix.del.resize(T, std::vector<VarId>(S));
    for (int t = 0; t < T; ++t) {
        int window_week = grid.week_of(t);  // 0-based within the window
        double floor_level = window_week == 0 ? 0.0 : silo.safety_level(first_week + window_week);
        for (int s = 0; s < S; ++s)
            ix.del[t][s] = m.add_var(tag("del", t, s), VarKind::Continuous, floor_level,
                                     level_cap[window_week]);
    }
    ix.delin.resize(T, std::vector<VarId>(S));
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            ix.delin[t][s] = m.add_var(tag("delin", t, s), VarKind::Continuous, 0,
                                       weekly_inflow_cap[grid.week_of(t)]);
    ix.delout = continuous_grid("delout", 0, silo.max_outflow);
    ix.delex.resize(T, std::vector<VarId>(S));
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            ix.delex[t][s] = m.add_var(
                tag("delex", t, s), VarKind::Continuous, 0,
                std::max(0.0, level_cap[grid.week_of(t)] - silo.cap));
    ix.sto = continuous_grid("sto", tank.cap_min, tank.cap_max);
    ix.stoin = continuous_grid("stoin", 0, tank.max_flow);
    ix.stoout = continuous_grid("stoout", 0, tank.max_flow);

    // residual minimum up/down carried over from the previous week; the
    // on-carry is limited by the hours the stored fuel can sustain
    if (state.chp_on && state.hours_in_state < chp.min_up) {
        int residual = chp.min_up - state.hours_in_state;
        double min_burn = chp.min_fuel_when_on();
        int fuel_hours = min_burn > 0
                             ? static_cast<int>(std::floor(state.biomass_level / min_burn + 1e-9))
                             : residual;
        residual = std::min({residual, fuel_hours, T});
        for (int t = 0; t < residual; ++t)
            for (int s = 0; s < S; ++s) m.fix_var(ix.x[t][s], 1);
    } else if (!state.chp_on && state.hours_in_state < chp.min_down) {
        int residual = std::min(chp.min_down - state.hours_in_state, T);
        for (int t = 0; t < residual; ++t)
            for (int s = 0; s < S; ++s) m.fix_var(ix.x[t][s], 0);
    }

    // deliveries against the contract plan
    for (int a = 0; a < A; ++a) {
        const ContractSpec& c = config.contracts[ix.active[a]];
        const std::string cj = "_j" + c.id;
        for (int w = 0; w < W; ++w) {
            const ContractPlan::Row& row = plan.row(ix.active[a], first_week - 1 + w);
            for (int s = 0; s < S; ++s) {
                std::string suffix = cj + "_w" + std::to_string(w + 1) + "_s" + std::to_string(s + 1);
                LinExpr count, amount, up, down;
                for (int t = grid.week_begin(w); t < grid.week_end(w); ++t) {
                    count.add(ix.dhat[a][t][s], 1);
                    amount.add(ix.b[a][t][s], 1);
                    up.add(ix.rbp[a][t][s], 1);
                    down.add(ix.rbm[a][t][s], 1);
                }
                m.add_constr("deliv" + suffix, std::move(count), Sense::Equal, row.deliveries);
                m.add_constr("damt" + suffix, std::move(amount), Sense::Equal, row.base);
                m.add_constr("dup" + suffix, std::move(up), Sense::LessEqual, row.up);
                m.add_constr("ddn" + suffix, std::move(down), Sense::LessEqual, row.down);
            }
        }
        // rolling frequency windows via cumulative delivery counters: the
        // counter rows keep every window constraint at two nonzeros instead
        // of freq-many, which the solver digests far better
        int gap = static_cast<int>(c.freq);
        std::vector<std::vector<VarId>> cum(T, std::vector<VarId>(S));
        if (gap > 0) {
            int max_total = 0;
            for (int w = 0; w < W; ++w)
                max_total += plan.row(ix.active[a], first_week - 1 + w).deliveries;
            for (int t = 0; t < T; ++t)
                for (int s = 0; s < S; ++s)
                    cum[t][s] = m.add_var("cum" + cj + "_t" + std::to_string(t + 1) + "_s" +
                                              std::to_string(s + 1),
                                          VarKind::Continuous, 0, max_total);
        }
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s) {
                std::string suffix = cj + "_t" + std::to_string(t + 1) + "_s" + std::to_string(s + 1);
                m.add_constr("dub" + suffix,
                             LinExpr()
                                 .add(ix.b[a][t][s], 1)
                                 .add(ix.rbp[a][t][s], 1)
                                 .add(ix.dhat[a][t][s], -c.amount_max),
                             Sense::LessEqual, 0);
                m.add_constr("dlb" + suffix,
                             LinExpr()
                                 .add(ix.b[a][t][s], 1)
                                 .add(ix.rbm[a][t][s], -1)
                                 .add(ix.dhat[a][t][s], -c.amount_min),
                             Sense::GreaterEqual, 0);
                if (gap > 0) {
                    LinExpr counter;
                    counter.add(cum[t][s], 1).add(ix.dhat[a][t][s], -1);
                    if (t > 0) counter.add(cum[t - 1][s], -1);
                    m.add_constr("cdef" + suffix, std::move(counter), Sense::Equal, 0);

                    LinExpr window;
                    window.add(cum[t][s], 1);
                    if (t - gap - 1 >= 0) window.add(cum[t - gap - 1][s], -1);
                    m.add_constr("dfreq" + suffix, std::move(window), Sense::LessEqual, 1);
                }
            }
    }

    // one unloading slot per delivery_gap window across all contracts,
    // again through a shared cumulative counter
    if (A > 0) {
        int gap = static_cast<int>(silo.delivery_gap);
        int max_total = 0;
        for (int a = 0; a < A; ++a)
            for (int w = 0; w < W; ++w)
                max_total += plan.row(ix.active[a], first_week - 1 + w).deliveries;
        std::vector<std::vector<VarId>> cum(T, std::vector<VarId>(S));
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s)
                cum[t][s] =
                    m.add_var(tag("cumall", t, s), VarKind::Continuous, 0, max_total);
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s) {
                LinExpr counter;
                counter.add(cum[t][s], 1);
                for (int a = 0; a < A; ++a) counter.add(ix.dhat[a][t][s], -1);
                if (t > 0) counter.add(cum[t - 1][s], -1);
                m.add_constr(tag("calldef", t, s), std::move(counter), Sense::Equal, 0);

                int hi = std::min(T - 1, t + gap);
                LinExpr window;
                window.add(cum[hi][s], 1);
                if (t > 0) window.add(cum[t - 1][s], -1);
                m.add_constr(tag("wait", t, s), std::move(window), Sense::LessEqual, 1);
            }
    }

    // non-anticipativity of the focus-week deliveries
    for (int a = 0; a < A && S > 1; ++a) {
        const std::string cj = "_j" + config.contracts[ix.active[a]].id;
        for (int t = 0; t < grid.week_end(0); ++t)
            for (int s = 1; s < S; ++s) {
                std::string suffix = cj + "_t" + std::to_string(t + 1) + "_s" + std::to_string(s + 1);
                m.add_constr("na_d" + suffix,
                             LinExpr().add(ix.dhat[a][t][s], 1).add(ix.dhat[a][t][0], -1),
                             Sense::Equal, 0);
                m.add_constr("na_b" + suffix,
                             LinExpr().add(ix.b[a][t][s], 1).add(ix.b[a][t][0], -1), Sense::Equal,
                             0);
                m.add_constr("na_up" + suffix,
                             LinExpr().add(ix.rbp[a][t][s], 1).add(ix.rbp[a][t][0], -1),
                             Sense::Equal, 0);
                m.add_constr("na_dn" + suffix,
                             LinExpr().add(ix.rbm[a][t][s], 1).add(ix.rbm[a][t][0], -1),
                             Sense::Equal, 0);
            }
    }

    // biomass storage, CHP region and commitment, thermal storage, demand
    for (int s = 0; s < S; ++s) {
        const Scenario& scen = scenarios.scenarios[s];
        for (int t = 0; t < T; ++t) {
            LinExpr inflow;
            inflow.add(ix.delin[t][s], 1);
            for (int a = 0; a < A; ++a) {
                inflow.add(ix.b[a][t][s], -silo.calorific);
                inflow.add(ix.rbp[a][t][s], -silo.calorific);
                inflow.add(ix.rbm[a][t][s], silo.calorific);
            }
            m.add_constr(tag("bin", t, s), std::move(inflow), Sense::Equal, 0);

            LinExpr balance;
            balance.add(ix.del[t][s], 1).add(ix.delin[t][s], -1).add(ix.delout[t][s], 1);
            double rhs = 0;
            if (t == 0)
                rhs = state.biomass_level;
            else
                balance.add(ix.del[t - 1][s], -1);
            m.add_constr(tag("bbal", t, s), std::move(balance), Sense::Equal, rhs);

            m.add_constr(tag("bcap", t, s),
                         LinExpr().add(ix.del[t][s], 1).add(ix.delex[t][s], -1), Sense::LessEqual,
                         silo.cap);

            m.add_constr(tag("fuel", t, s),
                         LinExpr()
                             .add(ix.delout[t][s], 1)
                             .add(ix.p[t][s], -1.0 / chp.eff_power)
                             .add(ix.qchp[t][s], chp.theta / chp.eff_heat),
                         Sense::Equal, 0);

            m.add_constr(tag("regup", t, s),
                         LinExpr().add(ix.p[t][s], 1).add(ix.qchp[t][s], -chp.theta).add(ix.x[t][s], -chp.p_max),
                         Sense::LessEqual, 0);
            m.add_constr(tag("reglo", t, s),
                         LinExpr().add(ix.p[t][s], 1).add(ix.qchp[t][s], -chp.theta).add(ix.x[t][s], -chp.p_min),
                         Sense::GreaterEqual, 0);
            m.add_constr(tag("regxi", t, s),
                         LinExpr().add(ix.qchp[t][s], chp.xi).add(ix.p[t][s], -1),
                         Sense::LessEqual, 0);
            m.add_constr(tag("qcap", t, s),
                         LinExpr().add(ix.qchp[t][s], 1).add(ix.x[t][s], -chp.q_max),
                         Sense::LessEqual, 0);

            // status logic
            LinExpr status;
            status.add(ix.y[t][s], 1).add(ix.z[t][s], -1).add(ix.x[t][s], -1);
            double status_rhs = 0;
            if (t == 0)
                status_rhs = -(state.chp_on ? 1.0 : 0.0);
            else
                status.add(ix.x[t - 1][s], 1);
            m.add_constr(tag("status", t, s), std::move(status), Sense::Equal, status_rhs);
            m.add_constr(tag("ss", t, s), LinExpr().add(ix.y[t][s], 1).add(ix.z[t][s], 1),
                         Sense::LessEqual, 1);

            LinExpr up_window;
            for (int tau = std::max(0, t - chp.min_up + 1); tau <= t; ++tau)
                up_window.add(ix.y[tau][s], 1);
            up_window.add(ix.x[t][s], -1);
            m.add_constr(tag("mup", t, s), std::move(up_window), Sense::LessEqual, 0);

            LinExpr down_window;
            for (int tau = std::max(0, t - chp.min_down + 1); tau <= t; ++tau)
                down_window.add(ix.z[tau][s], 1);
            down_window.add(ix.x[t][s], 1);
            m.add_constr(tag("mdn", t, s), std::move(down_window), Sense::LessEqual, 1);

            // ramping; startup may jump to the minimum stable level
            LinExpr ramp_up;
            ramp_up.add(ix.p[t][s], 1).add(ix.y[t][s], -chp.p_min);
            double ramp_up_rhs = 0;
            if (t == 0)
                ramp_up_rhs = state.chp_power + chp.ramp_up * (state.chp_on ? 1.0 : 0.0);
            else
                ramp_up.add(ix.p[t - 1][s], -1).add(ix.x[t - 1][s], -chp.ramp_up);
            m.add_constr(tag("rup", t, s), std::move(ramp_up), Sense::LessEqual, ramp_up_rhs);

            LinExpr ramp_down;
            ramp_down.add(ix.p[t][s], -1).add(ix.x[t][s], -chp.ramp_down).add(ix.z[t][s], -chp.p_min);
            double ramp_down_rhs = 0;
            if (t == 0)
                ramp_down_rhs = -state.chp_power;
            else
                ramp_down.add(ix.p[t - 1][s], 1);
            m.add_constr(tag("rdn", t, s), std::move(ramp_down), Sense::LessEqual, ramp_down_rhs);

            // thermal storage
            m.add_constr(tag("tin", t, s),
                         LinExpr().add(ix.stoin[t][s], 1).add(ix.qchps[t][s], -1).add(ix.qauxs[t][s], -1),
                         Sense::Equal, 0);
            LinExpr tank_balance;
            tank_balance.add(ix.sto[t][s], 1).add(ix.stoin[t][s], -1).add(ix.stoout[t][s], 1);
            double tank_rhs = 0;
            if (t == 0)
                tank_rhs = state.thermal_level;
            else
                tank_balance.add(ix.sto[t - 1][s], -1);
            m.add_constr(tag("tbal", t, s), std::move(tank_balance), Sense::Equal, tank_rhs);

            LinExpr shift;
            shift.add(ix.stoout[t][s], 1);
            double shift_rhs = 0;
            if (t == 0)
                shift_rhs = state.thermal_level;
            else
                shift.add(ix.sto[t - 1][s], -1);
            m.add_constr(tag("tshift", t, s), std::move(shift), Sense::LessEqual, shift_rhs);

            // heat split and demand
            m.add_constr(tag("hchp", t, s),
                         LinExpr().add(ix.qchp[t][s], 1).add(ix.qchpn[t][s], -1).add(ix.qchps[t][s], -1),
                         Sense::Equal, 0);
            m.add_constr(tag("haux", t, s),
                         LinExpr().add(ix.qaux[t][s], 1).add(ix.qauxn[t][s], -1).add(ix.qauxs[t][s], -1),
                         Sense::Equal, 0);
            m.add_constr(tag("dem", t, s),
                         LinExpr()
                             .add(ix.qchpn[t][s], 1)
                             .add(ix.qauxn[t][s], 1)
                             .add(ix.stoout[t][s], 1)
                             .add(ix.qmiss[t][s], 1),
                         Sense::Equal, scen.demand[t]);
        }
        m.add_constr("tend_s" + std::to_string(s + 1), LinExpr().add(ix.sto[T - 1][s], 1),
                     Sense::Equal, state.thermal_level);
    }

    // objective: contracted window cost enters as a constant
    double constant = 0;
    for (size_t j = 0; j < config.contracts.size(); ++j) {
        const ContractSpec& c = config.contracts[j];
        for (int w = 0; w < W; ++w) {
            const ContractPlan::Row& row = plan.row(j, first_week - 1 + w);
            constant += c.base_price * row.base + c.up_price * row.up + c.down_price * row.down;
        }
    }
    ix.objective_constant = constant;

    LinExpr obj;
    for (int s = 0; s < S; ++s) {
        const Scenario& scen = scenarios.scenarios[s];
        double prob = scen.probability;
        for (int a = 0; a < A; ++a) {
            const ContractSpec& c = config.contracts[ix.active[a]];
            for (int t = 0; t < T; ++t) {
                obj.add(ix.rbp[a][t][s], prob * c.base_price);
                obj.add(ix.rbm[a][t][s], -prob * c.base_price);
            }
        }
        for (int t = 0; t < T; ++t) {
            double elec_cost = net_elec_cost(scen.elec_price[t], costs);
            double boiler_cost = aux_unit_cost(scen.fuel_price[t], config.aux);
            obj.add(ix.p[t][s], prob * (costs.chp_op + elec_cost));
            obj.add(ix.qchp[t][s], prob * (-chp.theta) * costs.chp_op);
            obj.add(ix.y[t][s], prob * costs.startup);
            obj.add(ix.z[t][s], prob * costs.shutdown);
            obj.add(ix.qaux[t][s], prob * boiler_cost / config.aux.eff);
            obj.add(ix.del[t][s], prob * silo.inventory_cost);
            obj.add(ix.delex[t][s], prob * costs.penalty_store);
            obj.add(ix.qmiss[t][s], prob * costs.penalty_miss);
        }
    }
    m.set_objective(std::move(obj), constant);
    return out;
}

/**
 * Reads the focus-week first-stage decisions from scenario 1 and verifies
 * the non-anticipativity tie across all scenarios to 1e-6; a mismatch
 * indicates a model bug.
 */
inline WeekDecisions extract_week_decisions(const PlantConfig& config, const Phase2Index& ix,
                                            const milp::Assignment& solution) {
    detail::require(solution.solved(), "phase2.solution",
                    "assignment must be optimal or feasible-gap");
    const int hours = ix.grid.week_end(0);
    WeekDecisions decisions;
    decisions.hours = hours;

    for (size_t a = 0; a < ix.active.size(); ++a) {
        WeekDecisions::ContractRow row;
        row.id = config.contracts[ix.active[a]].id;
        row.deliver.resize(hours);
        row.amount.resize(hours);
        row.up_used.resize(hours);
        row.down_used.resize(hours);
        for (int t = 0; t < hours; ++t) {
            for (int s = 1; s < ix.n_scenarios; ++s) {
                double diff = std::max(
                    {std::abs(solution.value(ix.dhat[a][t][s]) - solution.value(ix.dhat[a][t][0])),
                     std::abs(solution.value(ix.b[a][t][s]) - solution.value(ix.b[a][t][0])),
                     std::abs(solution.value(ix.rbp[a][t][s]) - solution.value(ix.rbp[a][t][0])),
                     std::abs(solution.value(ix.rbm[a][t][s]) - solution.value(ix.rbm[a][t][0]))});
                detail::require(diff <= 1e-6, "phase2.nonanticipativity",
                                "first-stage decisions differ across scenarios (model bug)");
            }
            double flag = solution.value(ix.dhat[a][t][0]);
            detail::require(std::abs(flag - std::round(flag)) <= 1e-6, "phase2.dhat",
                            "integrality violation beyond 1e-6");
            row.deliver[t] = static_cast<int>(std::round(flag));
            auto clean = [](double v) { return std::abs(v) < 1e-9 ? 0.0 : v; };
            row.amount[t] = clean(solution.value(ix.b[a][t][0]));
            row.up_used[t] = clean(solution.value(ix.rbp[a][t][0]));
            row.down_used[t] = clean(solution.value(ix.rbm[a][t][0]));
        }
        decisions.contracts.push_back(std::move(row));
    }
    return decisions;
}

/**
 * Builds the single-scenario realization model for the focus week: the
 * delivery decisions are fixed, commitment and production re-optimize
 * against the realized demand and prices. Shortfalls land on the penalty
 * variables, never on hard infeasibility.
 */
inline Phase2Model fix_and_realize(const PlantConfig& config, const ContractPlan& plan, int week,
                                   const WeekDecisions& decisions,
                                   const Scenario& realized, const SystemState& state) {
    detail::require(static_cast<int>(realized.demand.size()) == decisions.hours,
                    "realize.series", "realized series must cover the focus week");

    ScenarioSet single;
    single.grid = decisions.hours == kHoursPerWeek ? TimeGrid::hourly(1)
                                                   : TimeGrid::hourly_custom(1, decisions.hours);
    Scenario copy = realized;
    copy.probability = 1.0;
    single.scenarios.push_back(std::move(copy));

    Phase2Model built = build_operational_model(config, plan, week, single, state);
    built.model.set_name("realization_w" + std::to_string(week));

    for (size_t a = 0; a < built.index.active.size(); ++a) {
        const std::string& id = config.contracts[built.index.active[a]].id;
        const WeekDecisions::ContractRow* row = nullptr;
        for (const auto& r : decisions.contracts)
            if (r.id == id) row = &r;
        detail::require(row != nullptr, "realize.decisions", "missing decisions for contract " + id);
        for (int t = 0; t < decisions.hours; ++t) {
            built.model.fix_var(built.index.dhat[a][t][0], row->deliver[t]);
            built.model.fix_var(built.index.b[a][t][0], row->amount[t]);
            built.model.fix_var(built.index.rbp[a][t][0], row->up_used[t]);
            built.model.fix_var(built.index.rbm[a][t][0], row->down_used[t]);
        }
    }
    return built;
}

/// End-of-week carry-over read from a solved realization (scenario 1).
inline SystemState end_state(const Phase2Index& ix, const milp::Assignment& solution) {
    const int T = ix.grid.n_periods;
    SystemState s;
    s.biomass_level = std::max(0.0, solution.value(ix.del[T - 1][0]));
    s.thermal_level = solution.value(ix.sto[T - 1][0]);
    s.chp_on = solution.value(ix.x[T - 1][0]) > 0.5;
    s.chp_power = s.chp_on ? solution.value(ix.p[T - 1][0]) : 0.0;

    int run = 0;
    for (int t = T - 1; t >= 0; --t) {
        if ((solution.value(ix.x[t][0]) > 0.5) == s.chp_on)
            ++run;
        else
            break;
    }
    if (run == T && s.chp_on == ix.initial_state.chp_on)
        run += ix.initial_state.hours_in_state;
    s.hours_in_state = run;
    return s;
}

/** Cost breakdown of a solved single-scenario realization model. */
inline WeeklyResult summarize_realization(const PlantConfig& config, const ContractPlan& plan,
                                          int week, const Phase2Index& ix,
                                          const milp::Assignment& sol,
                                          const Scenario& realized) {
    const int T = ix.grid.n_periods;
    const CostParams& costs = config.costs;
    WeeklyResult r;
    r.week = week;

    for (size_t j = 0; j < config.contracts.size(); ++j) {
        const ContractSpec& c = config.contracts[j];
        const ContractPlan::Row& row = plan.row(j, week - 1);
        r.biomass_cost += c.base_price * row.base + c.up_price * row.up + c.down_price * row.down;
    }
    for (size_t a = 0; a < ix.active.size(); ++a) {
        const ContractSpec& c = config.contracts[ix.active[a]];
        for (int t = 0; t < T; ++t)
            r.biomass_cost += c.base_price * (sol.value(ix.rbp[a][t][0]) - sol.value(ix.rbm[a][t][0]));
    }
    for (int t = 0; t < T; ++t) {
        double p = sol.value(ix.p[t][0]);
        double qchp = sol.value(ix.qchp[t][0]);
        r.chp_op_cost += costs.chp_op * (p - config.chp.theta * qchp);
        r.startup_cost += costs.startup * sol.value(ix.y[t][0]);
        r.shutdown_cost += costs.shutdown * sol.value(ix.z[t][0]);
        r.elec_net_cost += net_elec_cost(realized.elec_price[t], costs) * p;
        r.aux_cost += aux_unit_cost(realized.fuel_price[t], config.aux) / config.aux.eff *
                      sol.value(ix.qaux[t][0]);
        r.inventory_cost += config.biomass_storage.inventory_cost * sol.value(ix.del[t][0]);
        r.penalty_miss += costs.penalty_miss * sol.value(ix.qmiss[t][0]);
        r.penalty_excess += costs.penalty_store * sol.value(ix.delex[t][0]);
        r.missed_heat_mwh += sol.value(ix.qmiss[t][0]);
        r.excess_storage_mwt += sol.value(ix.delex[t][0]);
    }
    r.end_state = end_state(ix, sol);
    return r;
}

/** Hourly operational series of a solved single-scenario week. */
struct WeekTrace {
    std::vector<double> demand, p, qchp, qchpn, qchps, qaux, qauxn, qauxs;
    std::vector<double> stoin, stoout, thermal_level, biomass_level;
    std::vector<double> delivered_mwt, delivered_tonnes, qmiss;
};

inline WeekTrace extract_week_trace(const Phase2Index& ix, const milp::Assignment& sol,
                                    const Scenario& realized) {
    const int T = ix.grid.n_periods;
    WeekTrace tr;
    auto grab = [&](const std::vector<std::vector<milp::VarId>>& vars, std::vector<double>& out) {
        out.reserve(T);
        for (int t = 0; t < T; ++t) out.push_back(sol.value(vars[t][0]));
    };
    tr.demand = realized.demand;
    grab(ix.p, tr.p);
    grab(ix.qchp, tr.qchp);
    grab(ix.qchpn, tr.qchpn);
    grab(ix.qchps, tr.qchps);
    grab(ix.qaux, tr.qaux);
    grab(ix.qauxn, tr.qauxn);
    grab(ix.qauxs, tr.qauxs);
    grab(ix.stoin, tr.stoin);
    grab(ix.stoout, tr.stoout);
    grab(ix.sto, tr.thermal_level);
    grab(ix.del, tr.biomass_level);
    grab(ix.delin, tr.delivered_mwt);
    grab(ix.qmiss, tr.qmiss);
    tr.delivered_tonnes.assign(T, 0.0);
    for (size_t a = 0; a < ix.active.size(); ++a)
        for (int t = 0; t < T; ++t)
            tr.delivered_tonnes[t] += sol.value(ix.b[a][t][0]) + sol.value(ix.rbp[a][t][0]) -
                                      sol.value(ix.rbm[a][t][0]);
    return tr;
}

/** Per-family maxima of a linear post-scan over a phase-2 solution. */
struct Phase2ScanReport {
    double commitment_logic = 0;    // y - z = x - x_prev, y + z <= 1
    double min_up_down = 0;
    double ramping = 0;
    double non_anticipativity = 0;
    double biomass_recursion = 0;
    double thermal_recursion = 0;
    double thermal_closure = 0;
    double heat_balance = 0;

    double worst() const {
        return std::max({commitment_logic, min_up_down, ramping, non_anticipativity,
                         biomass_recursion, thermal_recursion, thermal_closure, heat_balance});
    }
};

inline Phase2ScanReport scan_phase2_solution(const PlantConfig& config,
                                             const ScenarioSet& scenarios, const Phase2Index& ix,
                                             const milp::Assignment& sol) {
    Phase2ScanReport rep;
    const int T = ix.grid.n_periods;
    const ChpParams& chp = config.chp;
    const SystemState& st = ix.initial_state;

    for (int s = 0; s < ix.n_scenarios; ++s) {
        for (int t = 0; t < T; ++t) {
            double x = sol.value(ix.x[t][s]);
            double x_prev = t == 0 ? (st.chp_on ? 1.0 : 0.0) : sol.value(ix.x[t - 1][s]);
            double y = sol.value(ix.y[t][s]);
            double z = sol.value(ix.z[t][s]);
            rep.commitment_logic = std::max({rep.commitment_logic,
                                             std::abs(y - z - (x - x_prev)), y + z - 1.0});

            double up_sum = 0, down_sum = 0;
            for (int tau = std::max(0, t - chp.min_up + 1); tau <= t; ++tau)
                up_sum += sol.value(ix.y[tau][s]);
            for (int tau = std::max(0, t - chp.min_down + 1); tau <= t; ++tau)
                down_sum += sol.value(ix.z[tau][s]);
            rep.min_up_down = std::max({rep.min_up_down, up_sum - x, down_sum - (1.0 - x)});

            double p = sol.value(ix.p[t][s]);
            double p_prev = t == 0 ? st.chp_power : sol.value(ix.p[t - 1][s]);
            double x_lag = t == 0 ? (st.chp_on ? 1.0 : 0.0) : sol.value(ix.x[t - 1][s]);
            rep.ramping = std::max({rep.ramping,
                                    p - p_prev - chp.ramp_up * x_lag - chp.p_min * y,
                                    p_prev - p - chp.ramp_down * x - chp.p_min * z});

            double prev_bio = t == 0 ? st.biomass_level : sol.value(ix.del[t - 1][s]);
            rep.biomass_recursion = std::max(
                rep.biomass_recursion,
                std::abs(sol.value(ix.del[t][s]) -
                         (prev_bio + sol.value(ix.delin[t][s]) - sol.value(ix.delout[t][s]))));

            double prev_th = t == 0 ? st.thermal_level : sol.value(ix.sto[t - 1][s]);
            rep.thermal_recursion = std::max(
                rep.thermal_recursion,
                std::abs(sol.value(ix.sto[t][s]) -
                         (prev_th + sol.value(ix.stoin[t][s]) - sol.value(ix.stoout[t][s]))));

            double demand = scenarios.scenarios[s].demand[t];
            rep.heat_balance = std::max(
                rep.heat_balance,
                std::abs(sol.value(ix.qchpn[t][s]) + sol.value(ix.qauxn[t][s]) +
                         sol.value(ix.stoout[t][s]) + sol.value(ix.qmiss[t][s]) - demand));
        }
        rep.thermal_closure = std::max(rep.thermal_closure,
                                       std::abs(sol.value(ix.sto[T - 1][s]) - st.thermal_level));
    }

    for (size_t a = 0; a < ix.active.size(); ++a)
        for (int t = 0; t < ix.grid.week_end(0); ++t)
            for (int s = 1; s < ix.n_scenarios; ++s)
                rep.non_anticipativity = std::max(
                    {rep.non_anticipativity,
                     std::abs(sol.value(ix.dhat[a][t][s]) - sol.value(ix.dhat[a][t][0])),
                     std::abs(sol.value(ix.b[a][t][s]) - sol.value(ix.b[a][t][0])),
                     std::abs(sol.value(ix.rbp[a][t][s]) - sol.value(ix.rbp[a][t][0])),
                     std::abs(sol.value(ix.rbm[a][t][s]) - sol.value(ix.rbm[a][t][0]))});
    return rep;
}

}  // namespace bioplan
