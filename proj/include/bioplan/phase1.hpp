#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bioplan/csv.hpp"
#include "bioplan/domain.hpp"
#include "bioplan/milp.hpp"

namespace bioplan {

/**
 * Contract-phase output: per contract the selection flag and, per week,
 * the delivery count and the contracted base/up/down tonnages.
 */
struct ContractPlan {
    struct Row {
        int deliveries = 0;
        double base = 0;   // tonnes
        double up = 0;     // tonnes of up-scaling option
        double down = 0;   // tonnes of down-scaling option
    };

    std::vector<std::string> contract_ids;
    std::vector<bool> selected;
    std::vector<std::vector<Row>> rows;  // [contract][week]
    int n_weeks = 0;

    int n_contracts() const { return static_cast<int>(contract_ids.size()); }

    const Row& row(int contract, int week) const { return rows.at(contract).at(week); }

    void validate(const std::vector<ContractSpec>& contracts, double tol = 1e-6) const {
        detail::require(contracts.size() == contract_ids.size(), "plan.contracts",
                        "plan and contract list must align");
        for (size_t j = 0; j < contracts.size(); ++j) {
            const ContractSpec& spec = contracts[j];
            const std::string path = "plan.contract[" + spec.id + "]";
            // tolerances scale with the amounts so solver integrality noise on
            // large contracts does not trip the re-verification
            double scaled = tol * std::max(1.0, spec.amount_max);
            int total_deliveries = 0;
            for (int w = 0; w < n_weeks; ++w) {
                const Row& r = rows[j][w];
                total_deliveries += r.deliveries;
                if (!selected[j]) {
                    detail::require(r.deliveries == 0 && r.base <= scaled && r.up <= scaled &&
                                        r.down <= scaled,
                                    path, "unselected contracts must have all-zero entries");
                    continue;
                }
                detail::require(r.deliveries >= 0, path, "delivery counts must be non-negative");
                detail::require(r.up <= spec.opt_up * r.base + scaled, path,
                                "up-option exceeds the contracted share");
                detail::require(r.down <= spec.opt_down * r.base + scaled, path,
                                "down-option exceeds the contracted share");
                detail::require(r.base + r.up <= spec.amount_max * r.deliveries + scaled, path,
                                "amount above the per-delivery maximum");
                detail::require(r.base - r.down >= spec.amount_min * r.deliveries - scaled, path,
                                "amount below the per-delivery minimum");
            }
            if (selected[j]) {
                detail::require(total_deliveries >= spec.deliveries_min &&
                                    total_deliveries <= spec.deliveries_max,
                                path, "total deliveries outside the contract limits");
            }
        }
    }

    void write_csv(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw csv::CsvError("cannot write " + path.string());
        out << "contract,week,deliveries,base,up_option,down_option\n";
        for (size_t j = 0; j < contract_ids.size(); ++j)
            for (int w = 0; w < n_weeks; ++w) {
                const Row& r = rows[j][w];
                out << contract_ids[j] << ',' << w + 1 << ',' << r.deliveries << ','
                    << csv::format_value(r.base) << ',' << csv::format_value(r.up) << ','
                    << csv::format_value(r.down) << '\n';
            }
    }

    static ContractPlan read_csv(const std::filesystem::path& path,
                                 const std::vector<ContractSpec>& contracts, int n_weeks) {
        std::ifstream in(path);
        if (!in) throw csv::CsvError("cannot open " + path.string());
        std::string line;
        if (!std::getline(in, line) ||
            csv::split_line(line) != std::vector<std::string>{"contract", "week", "deliveries",
                                                              "base", "up_option", "down_option"})
            throw csv::CsvError(path.string() + ": bad plan header");

        ContractPlan plan;
        plan.n_weeks = n_weeks;
        for (const auto& c : contracts) {
            plan.contract_ids.push_back(c.id);
            plan.rows.emplace_back(n_weeks);
        }
        plan.selected.assign(contracts.size(), false);

        size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto f = csv::split_line(line);
            if (f.size() != 6)
                throw csv::CsvError(path.string() + ":" + std::to_string(line_no) +
                                    ": expected 6 fields");
            int j = -1;
            for (size_t i = 0; i < plan.contract_ids.size(); ++i)
                if (plan.contract_ids[i] == f[0]) j = static_cast<int>(i);
            if (j < 0)
                throw csv::CsvError(path.string() + ":" + std::to_string(line_no) +
                                    ": unknown contract '" + f[0] + "'");
            int w = std::stoi(f[1]) - 1;
            if (w < 0 || w >= n_weeks)
                throw csv::CsvError(path.string() + ":" + std::to_string(line_no) +
                                    ": week out of range");
            Row& r = plan.rows[j][w];
            r.deliveries = std::stoi(f[2]);
            r.base = std::stod(f[3]);
            r.up = std::stod(f[4]);
            r.down = std::stod(f[5]);
            if (r.deliveries > 0 || r.base > 0) plan.selected[j] = true;
        }
        plan.validate(contracts);
        return plan;
    }
};

/** Variable handles of one built contract-selection model. */
struct Phase1Index {
    int n_contracts = 0;
    int n_weeks = 0;
    int n_scenarios = 0;

    std::vector<milp::VarId> u;                                // [j]
    std::vector<std::vector<milp::VarId>> d, b, bp, bm;        // [j][t]
    std::vector<std::vector<std::vector<milp::VarId>>> rbp, rbm;  // [j][t][s]
    std::vector<std::vector<milp::VarId>> del, delin, delout;  // [t][s]
    std::vector<std::vector<milp::VarId>> p, qchp, qaux, qmiss, qbm;  // [t][s]
    std::vector<milp::VarId> delT;                             // [s]
};

struct Phase1Model {
    milp::Model model;
    Phase1Index index;
};

/**
 * Builds the weekly two-stage contract-selection MILP. First-stage
 * variables pick contracts, delivery counts and base/option tonnages per
 * week; second-stage variables settle option usage, biomass storage and
 * weekly production per demand scenario. Hourly capacities enter scaled by
 * 168; the weekly CHP minimum is relaxed to zero since commitment is out
 * of scope on this time scale.
 *
 * `expected_elec_cost` and `expected_aux_cost` are the weekly expected
 * composite costs (see derive_cost_series + aggregate_to_weekly); `psi` is
 * the option-placement incentive per week.
 */
inline Phase1Model build_contract_model(const PlantConfig& config, const ScenarioSet& weekly,
                                        const std::vector<double>& expected_elec_cost,
                                        const std::vector<double>& expected_aux_cost,
                                        const std::vector<double>& psi) {
    using milp::LinExpr;
    using milp::Sense;
    using milp::VarId;
    using milp::VarKind;

    config.validate();
    weekly.validate();
    detail::require(weekly.grid.resolution == Resolution::Weekly, "phase1.grid",
                    "requires a weekly grid");
    const int T = weekly.grid.n_periods;
    const int J = static_cast<int>(config.contracts.size());
    const int S = static_cast<int>(weekly.scenarios.size());
    detail::require(static_cast<int>(expected_elec_cost.size()) == T, "phase1.elec_cost",
                    "length must match the grid");
    detail::require(static_cast<int>(expected_aux_cost.size()) == T, "phase1.aux_cost",
                    "length must match the grid");
    detail::require(static_cast<int>(psi.size()) == T, "phase1.psi",
                    "length must match the grid");

    const double hours = kHoursPerWeek;
    const ChpParams& chp = config.chp;
    const BiomassStorageParams& silo = config.biomass_storage;
    const CostParams& costs = config.costs;

    Phase1Model out;
    milp::Model& m = out.model;
    Phase1Index& ix = out.index;
    out.model = milp::Model("contract_selection");
    ix.n_contracts = J;
    ix.n_weeks = T;
    ix.n_scenarios = S;

    auto week_tag = [](int t) { return "_w" + std::to_string(t + 1); };
    auto scen_tag = [](int s) { return "_s" + std::to_string(s + 1); };

    // first stage
    ix.u.resize(J);
    ix.d.assign(J, std::vector<VarId>(T));
    ix.b.assign(J, std::vector<VarId>(T));
    ix.bp.assign(J, std::vector<VarId>(T));
    ix.bm.assign(J, std::vector<VarId>(T));
    for (int j = 0; j < J; ++j) {
        const ContractSpec& c = config.contracts[j];
        std::string cj = "_j" + c.id;
        ix.u[j] = m.add_var("u" + cj, VarKind::Binary, 0, 1);
        int d_cap = c.max_deliveries_per_week();
        for (int t = 0; t < T; ++t) {
            ix.d[j][t] = m.add_var("d" + cj + week_tag(t), VarKind::Integer, 0, d_cap);
            double amount_cap = c.amount_max * d_cap;
            ix.b[j][t] = m.add_var("b" + cj + week_tag(t), VarKind::Continuous, 0, amount_cap);
            ix.bp[j][t] = m.add_var("bp" + cj + week_tag(t), VarKind::Continuous, 0, amount_cap);
            ix.bm[j][t] = m.add_var("bm" + cj + week_tag(t), VarKind::Continuous, 0, amount_cap);
        }
    }

    // second stage
    ix.rbp.assign(J, std::vector<std::vector<VarId>>(T, std::vector<VarId>(S)));
    ix.rbm.assign(J, std::vector<std::vector<VarId>>(T, std::vector<VarId>(S)));
    for (int j = 0; j < J; ++j) {
        std::string cj = "_j" + config.contracts[j].id;
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s) {
                ix.rbp[j][t][s] =
                    m.add_var("rbp" + cj + week_tag(t) + scen_tag(s), VarKind::Continuous, 0,
                              milp::kInfinity);
                ix.rbm[j][t][s] =
                    m.add_var("rbm" + cj + week_tag(t) + scen_tag(s), VarKind::Continuous, 0,
                              milp::kInfinity);
            }
    }

    auto grid_vars = [&](const char* stem, double lb, double ub) {
        std::vector<std::vector<VarId>> vars(T, std::vector<VarId>(S));
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s)
                vars[t][s] = m.add_var(stem + week_tag(t) + scen_tag(s), VarKind::Continuous, lb, ub);
        return vars;
    };

    ix.del.resize(T, std::vector<VarId>(S));
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            ix.del[t][s] = m.add_var("del" + week_tag(t) + scen_tag(s), VarKind::Continuous,
                                     silo.safety_level(t + 1), silo.cap);
    ix.delin = grid_vars("delin", 0, milp::kInfinity);
    ix.delout = grid_vars("delout", 0, hours * silo.max_outflow);
    ix.p = grid_vars("p", 0, milp::kInfinity);
    ix.qchp = grid_vars("qchp", 0, hours * chp.q_max);
    ix.qaux = grid_vars("qaux", 0, hours * config.aux.q_max);
    ix.qmiss = grid_vars("qmiss", 0, milp::kInfinity);
    ix.qbm = grid_vars("qbm", 0, milp::kInfinity);
    ix.delT.resize(S);
    for (int s = 0; s < S; ++s)
        ix.delT[s] = m.add_var("delT" + scen_tag(s), VarKind::Continuous, 0, milp::kInfinity);

    // contract activation and delivery frequency
    for (int j = 0; j < J; ++j) {
        const ContractSpec& c = config.contracts[j];
        std::string cj = "_j" + c.id;
        LinExpr total;
        for (int t = 0; t < T; ++t) total.add(ix.d[j][t], 1.0);
        LinExpr lower = total;
        lower.add(ix.u[j], -static_cast<double>(c.deliveries_min));
        m.add_constr("act_lo" + cj, std::move(lower), Sense::GreaterEqual, 0);
        LinExpr upper = total;
        upper.add(ix.u[j], -static_cast<double>(c.deliveries_max));
        m.add_constr("act_up" + cj, std::move(upper), Sense::LessEqual, 0);

        int window = c.frequency_window_weeks();
        int per_window = c.max_deliveries_per_week();
        for (int t = 0; t < T; ++t) {
            LinExpr sum;
            for (int tau = std::max(0, t - window + 1); tau <= t; ++tau)
                sum.add(ix.d[j][tau], 1.0);
            m.add_constr("freq" + cj + week_tag(t), std::move(sum), Sense::LessEqual, per_window);
        }
    }

    // amounts and options
    for (int j = 0; j < J; ++j) {
        const ContractSpec& c = config.contracts[j];
        std::string cj = "_j" + c.id;
        for (int t = 0; t < T; ++t) {
            m.add_constr("amt_up" + cj + week_tag(t),
                         LinExpr().add(ix.b[j][t], 1).add(ix.bp[j][t], 1).add(ix.d[j][t], -c.amount_max),
                         Sense::LessEqual, 0);
            m.add_constr("amt_lo" + cj + week_tag(t),
                         LinExpr().add(ix.b[j][t], 1).add(ix.bm[j][t], -1).add(ix.d[j][t], -c.amount_min),
                         Sense::GreaterEqual, 0);
            m.add_constr("opt_up" + cj + week_tag(t),
                         LinExpr().add(ix.bp[j][t], 1).add(ix.b[j][t], -c.opt_up),
                         Sense::LessEqual, 0);
            m.add_constr("opt_dn" + cj + week_tag(t),
                         LinExpr().add(ix.bm[j][t], 1).add(ix.b[j][t], -c.opt_down),
                         Sense::LessEqual, 0);
            for (int s = 0; s < S; ++s) {
                m.add_constr("use_up" + cj + week_tag(t) + scen_tag(s),
                             LinExpr().add(ix.rbp[j][t][s], 1).add(ix.bp[j][t], -1),
                             Sense::LessEqual, 0);
                m.add_constr("use_dn" + cj + week_tag(t) + scen_tag(s),
                             LinExpr().add(ix.rbm[j][t][s], 1).add(ix.bm[j][t], -1),
                             Sense::LessEqual, 0);
            }
        }
    }

    // biomass storage, production region, demand
    for (int s = 0; s < S; ++s) {
        const Scenario& scen = weekly.scenarios[s];
        for (int t = 0; t < T; ++t) {
            LinExpr balance;
            balance.add(ix.del[t][s], 1).add(ix.delin[t][s], -1).add(ix.delout[t][s], 1);
            double rhs = 0;
            if (t == 0)
                rhs = silo.initial;
            else
                balance.add(ix.del[t - 1][s], -1);
            m.add_constr("sto_bal" + week_tag(t) + scen_tag(s), std::move(balance), Sense::Equal,
                         rhs);

            LinExpr inflow;
            inflow.add(ix.delin[t][s], 1);
            for (int j = 0; j < J; ++j) {
                inflow.add(ix.b[j][t], -silo.calorific);
                inflow.add(ix.rbp[j][t][s], -silo.calorific);
                inflow.add(ix.rbm[j][t][s], silo.calorific);
            }
            m.add_constr("sto_in" + week_tag(t) + scen_tag(s), std::move(inflow), Sense::Equal, 0);

            m.add_constr("fuel" + week_tag(t) + scen_tag(s),
                         LinExpr()
                             .add(ix.delout[t][s], 1)
                             .add(ix.p[t][s], -1.0 / chp.eff_power)
                             .add(ix.qchp[t][s], chp.theta / chp.eff_heat),
                         Sense::Equal, 0);

            m.add_constr("reg_up" + week_tag(t) + scen_tag(s),
                         LinExpr().add(ix.p[t][s], 1).add(ix.qchp[t][s], -chp.theta),
                         Sense::LessEqual, hours * chp.p_max);
            // weekly lower bound relaxed to zero: the unit may be off part of the week
            m.add_constr("reg_lo" + week_tag(t) + scen_tag(s),
                         LinExpr().add(ix.p[t][s], 1).add(ix.qchp[t][s], -chp.theta),
                         Sense::GreaterEqual, 0);
            m.add_constr("reg_xi" + week_tag(t) + scen_tag(s),
                         LinExpr().add(ix.qchp[t][s], chp.xi).add(ix.p[t][s], -1),
                         Sense::LessEqual, 0);

            m.add_constr("bal" + week_tag(t) + scen_tag(s),
                         LinExpr().add(ix.qchp[t][s], 1).add(ix.qaux[t][s], 1).add(ix.qmiss[t][s], 1),
                         Sense::Equal, scen.demand[t]);
            m.add_constr("bm_share" + week_tag(t) + scen_tag(s),
                         LinExpr().add(ix.qchp[t][s], 1).add(ix.qbm[t][s], 1),
                         Sense::GreaterEqual, costs.biomass_share_target * scen.demand[t]);
        }
        m.add_constr("sto_end" + scen_tag(s),
                     LinExpr().add(ix.del[T - 1][s], 1).add(ix.delT[s], -1), Sense::LessEqual,
                     silo.initial);
    }

    // objective
    LinExpr obj;
    for (int j = 0; j < J; ++j) {
        const ContractSpec& c = config.contracts[j];
        for (int t = 0; t < T; ++t) {
            obj.add(ix.b[j][t], c.base_price);
            obj.add(ix.bp[j][t], c.up_price - psi[t]);
            obj.add(ix.bm[j][t], c.down_price - psi[t]);
            for (int s = 0; s < S; ++s) {
                double prob = weekly.scenarios[s].probability;
                obj.add(ix.rbp[j][t][s], prob * c.base_price);
                obj.add(ix.rbm[j][t][s], -prob * c.base_price);
            }
        }
    }
    for (int s = 0; s < S; ++s) {
        double prob = weekly.scenarios[s].probability;
        for (int t = 0; t < T; ++t) {
            obj.add(ix.p[t][s], prob * (costs.chp_op + expected_elec_cost[t]));
            obj.add(ix.qchp[t][s], prob * (-chp.theta) * costs.chp_op);
            obj.add(ix.qaux[t][s], prob * expected_aux_cost[t] / config.aux.eff);
            obj.add(ix.del[t][s], prob * silo.inventory_cost);
            obj.add(ix.qmiss[t][s], prob * costs.penalty_miss);
            obj.add(ix.qbm[t][s], prob * costs.penalty_bm);
        }
        obj.add(ix.delT[s], prob * costs.penalty_store);
    }
    m.set_objective(std::move(obj));
    return out;
}

/**
 * Reads the first-stage decisions out of a solved assignment, rounding
 * integer values within tolerance, and re-verifies every ContractPlan
 * invariant against the contract specs.
 */
inline ContractPlan extract_contract_plan(const Phase1Index& ix, const milp::Assignment& solution,
                                          const std::vector<ContractSpec>& contracts) {
    detail::require(solution.solved(), "phase1.solution",
                    "assignment must be optimal or feasible-gap");

    auto round_int = [](double v, const std::string& what) {
        double r = std::round(v);
        if (std::abs(v - r) > 1e-6)
            throw ValidationError(what, "integrality violation beyond 1e-6");
        return static_cast<int>(r);
    };
    auto clean = [](double v) { return std::abs(v) < 1e-9 ? 0.0 : v; };

    ContractPlan plan;
    plan.n_weeks = ix.n_weeks;
    for (int j = 0; j < ix.n_contracts; ++j) {
        const ContractSpec& spec = contracts[j];
        plan.contract_ids.push_back(spec.id);
        plan.selected.push_back(round_int(solution.value(ix.u[j]), "u_" + spec.id) == 1);
        std::vector<ContractPlan::Row> rows(ix.n_weeks);
        double snap = 1e-6 * std::max(1.0, spec.amount_max);
        for (int t = 0; t < ix.n_weeks; ++t) {
            ContractPlan::Row& r = rows[t];
            r.deliveries = round_int(solution.value(ix.d[j][t]),
                                     "d_" + spec.id + "_w" + std::to_string(t + 1));
            r.base = clean(solution.value(ix.b[j][t]));
            r.up = clean(solution.value(ix.bp[j][t]));
            r.down = clean(solution.value(ix.bm[j][t]));
            // snap solver noise against the per-delivery box before the
            // re-verification; anything beyond the scaled tolerance is a
            // genuine violation and surfaces below
            double cap = spec.amount_max * r.deliveries;
            double floor_amt = spec.amount_min * r.deliveries;
            if (r.base + r.up > cap && r.base + r.up <= cap + snap) {
                r.base = std::max(floor_amt, cap - r.up);
                if (r.base + r.up > cap) r.up = cap - r.base;
            }
            if (r.base - r.down < floor_amt && r.base - r.down >= floor_amt - snap)
                r.down = std::max(0.0, r.base - floor_amt);
            if (r.up > spec.opt_up * r.base && r.up <= spec.opt_up * r.base + snap)
                r.up = spec.opt_up * r.base;
            if (r.down > spec.opt_down * r.base && r.down <= spec.opt_down * r.base + snap)
                r.down = spec.opt_down * r.base;
        }
        plan.rows.push_back(std::move(rows));
    }
    plan.validate(contracts);
    return plan;
}

/// Pins every first-stage variable to a given plan; the remaining solve
/// prices that plan on the model's own scenario set.
inline void fix_plan_in_model(Phase1Model& built, const ContractPlan& plan) {
    const Phase1Index& ix = built.index;
    detail::require(plan.n_contracts() == ix.n_contracts && plan.n_weeks == ix.n_weeks,
                    "phase1.fix_plan", "plan shape must match the model");
    for (int j = 0; j < ix.n_contracts; ++j) {
        built.model.fix_var(ix.u[j], plan.selected[j] ? 1 : 0);
        for (int t = 0; t < ix.n_weeks; ++t) {
            const ContractPlan::Row& r = plan.row(j, t);
            built.model.fix_var(ix.d[j][t], r.deliveries);
            built.model.fix_var(ix.b[j][t], r.base);
            built.model.fix_var(ix.bp[j][t], r.up);
            built.model.fix_var(ix.bm[j][t], r.down);
        }
    }
}

/** Largest deviation found by a linear re-scan of the storage recursion,
 *  heat balance and recourse-coupling families of a phase-1 solution. */
struct Phase1ScanReport {
    double storage_recursion = 0;
    double heat_balance = 0;
    double recourse_coupling = 0;
    double storage_bounds = 0;

    double worst() const {
        return std::max({storage_recursion, heat_balance, recourse_coupling, storage_bounds});
    }
};

inline Phase1ScanReport scan_phase1_solution(const PlantConfig& config, const ScenarioSet& weekly,
                                             const Phase1Index& ix,
                                             const milp::Assignment& sol) {
    Phase1ScanReport report;
    const BiomassStorageParams& silo = config.biomass_storage;
    for (int s = 0; s < ix.n_scenarios; ++s) {
        for (int t = 0; t < ix.n_weeks; ++t) {
            double prev = t == 0 ? silo.initial : sol.value(ix.del[t - 1][s]);
            double lhs = sol.value(ix.del[t][s]) -
                         (prev + sol.value(ix.delin[t][s]) - sol.value(ix.delout[t][s]));
            report.storage_recursion = std::max(report.storage_recursion, std::abs(lhs));

            double level = sol.value(ix.del[t][s]);
            report.storage_bounds =
                std::max({report.storage_bounds, silo.safety_level(t + 1) - level,
                          level - silo.cap});

            double balance = sol.value(ix.qchp[t][s]) + sol.value(ix.qaux[t][s]) +
                             sol.value(ix.qmiss[t][s]) - weekly.scenarios[s].demand[t];
            report.heat_balance = std::max(report.heat_balance, std::abs(balance));

            for (int j = 0; j < ix.n_contracts; ++j) {
                report.recourse_coupling =
                    std::max({report.recourse_coupling,
                              sol.value(ix.rbp[j][t][s]) - sol.value(ix.bp[j][t]),
                              sol.value(ix.rbm[j][t][s]) - sol.value(ix.bm[j][t])});
            }
        }
    }
    return report;
}

}  // namespace bioplan
