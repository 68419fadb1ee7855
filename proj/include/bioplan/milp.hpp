#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bioplan::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Integer, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

enum class SolveStatus { Optimal, FeasibleGap, Infeasible, Error };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::FeasibleGap: return "feasible-gap";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Error: return "error";
    }
    return "error";
}

struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

struct VarId {
    int index = -1;
    bool valid() const { return index >= 0; }
};

struct Term {
    int var;
    double coef;
};

/** Sparse linear expression over model variables. */
class LinExpr {
public:
    LinExpr() = default;

    LinExpr& add(VarId v, double coef) {
        if (!v.valid()) throw ModelError("term references an invalid variable id");
        if (coef != 0.0) terms_.push_back({v.index, coef});
        return *this;
    }

    LinExpr& add(const LinExpr& other, double scale = 1.0) {
        for (const Term& t : other.terms_)
            if (t.coef * scale != 0.0) terms_.push_back({t.var, t.coef * scale});
        return *this;
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    /// Sums duplicate variable entries; keeps first-appearance order.
    std::vector<Term> combined() const {
        std::vector<Term> out;
        std::unordered_map<int, size_t> pos;
        out.reserve(terms_.size());
        for (const Term& t : terms_) {
            auto it = pos.find(t.var);
            if (it == pos.end()) {
                pos.emplace(t.var, out.size());
                out.push_back(t);
            } else {
                out[it->second].coef += t.coef;
            }
        }
        return out;
    }

private:
    std::vector<Term> terms_;
};

struct Variable {
    std::string name;
    VarKind kind;
    double lb;
    double ub;
};

struct Constraint {
    std::string name;
    LinExpr expr;
    Sense sense;
    double rhs;
};

/**
 * Algebraic MILP model: named variables, linear constraints and a
 * minimization objective. Invariants (unique MPS-safe names, consistent
 * bounds, known variables in every row) are enforced at insertion time.
 * Immutable by convention once handed to a solver.
 */
class Model {
public:
    explicit Model(std::string name = "model") : name_(std::move(name)) {}

    VarId add_var(const std::string& name, VarKind kind, double lb, double ub) {
        check_name(name);
        if (var_index_.count(name)) throw ModelError("duplicate variable name: " + name);
        if (kind == VarKind::Binary) {
            lb = std::max(lb, 0.0);
            ub = std::min(ub, 1.0);
        }
        if (!(lb <= ub)) throw ModelError("inconsistent bounds on " + name);
        VarId id{static_cast<int>(vars_.size())};
        var_index_.emplace(name, id.index);
        vars_.push_back({name, kind, lb, ub});
        return id;
    }

    void add_constr(const std::string& name, LinExpr expr, Sense sense, double rhs) {
        check_name(name);
        if (constr_index_.count(name)) throw ModelError("duplicate constraint name: " + name);
        for (const Term& t : expr.terms())
            if (t.var < 0 || t.var >= static_cast<int>(vars_.size()))
                throw ModelError("constraint " + name + " references an unknown variable");
        constr_index_.emplace(name, constrs_.size());
        constrs_.push_back({name, std::move(expr), sense, rhs});
    }

    void set_objective(LinExpr expr, double constant = 0.0) {
        for (const Term& t : expr.terms())
            if (t.var < 0 || t.var >= static_cast<int>(vars_.size()))
                throw ModelError("objective references an unknown variable");
        objective_ = std::move(expr);
        objective_constant_ = constant;
    }

    void set_bounds(VarId v, double lb, double ub) {
        if (!(lb <= ub)) throw ModelError("inconsistent bounds on " + var(v).name);
        vars_[v.index].lb = lb;
        vars_[v.index].ub = ub;
    }

    void fix_var(VarId v, double value) { set_bounds(v, value, value); }

    /// Turns every integer/binary variable continuous (LP relaxation).
    void relax_integrality() {
        for (Variable& v : vars_) v.kind = VarKind::Continuous;
    }

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }
    const std::vector<Variable>& vars() const { return vars_; }
    const std::vector<Constraint>& constrs() const { return constrs_; }
    const LinExpr& objective() const { return objective_; }
    double objective_constant() const { return objective_constant_; }

    const Variable& var(VarId id) const { return vars_.at(id.index); }

    std::optional<VarId> find_var(const std::string& name) const {
        auto it = var_index_.find(name);
        if (it == var_index_.end()) return std::nullopt;
        return VarId{it->second};
    }

    size_t n_vars() const { return vars_.size(); }
    size_t n_constrs() const { return constrs_.size(); }

    size_t n_integer_vars() const {
        size_t n = 0;
        for (const Variable& v : vars_)
            if (v.kind != VarKind::Continuous) ++n;
        return n;
    }

    size_t n_binary_vars() const {
        size_t n = 0;
        for (const Variable& v : vars_)
            if (v.kind == VarKind::Binary) ++n;
        return n;
    }

private:
    static void check_name(const std::string& name) {
        if (name.empty() || name.size() > 255)
            throw ModelError("name must be 1..255 characters: '" + name + "'");
        for (char c : name)
            if (std::isspace(static_cast<unsigned char>(c)))
                throw ModelError("name contains whitespace: '" + name + "'");
    }

    std::string name_;
    std::vector<Variable> vars_;
    std::vector<Constraint> constrs_;
    LinExpr objective_;
    double objective_constant_ = 0.0;
    std::unordered_map<std::string, int> var_index_;
    std::unordered_map<std::string, size_t> constr_index_;
};

/** Solver output bound to a model's variables. */
struct Assignment {
    std::vector<double> values;
    double reported_objective = std::numeric_limits<double>::quiet_NaN();
    SolveStatus status = SolveStatus::Error;
    double gap = 0.0;
    bool missing_values_defaulted = false;
    std::string diagnostics;

    double value(VarId v) const { return values.at(v.index); }
    bool solved() const {
        return status == SolveStatus::Optimal || status == SolveStatus::FeasibleGap;
    }
};

namespace detail {

inline std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void append_field(std::string& line, const std::string& text, size_t min_width) {
    line += text;
    if (text.size() < min_width)
        line.append(min_width - text.size(), ' ');
    else
        line += ' ';
}

}  // namespace detail

/**
 * Emits the model as fixed-format MPS (extended names). Sections in
 * ROWS/COLUMNS/RHS/BOUNDS order, integer variables bracketed by
 * INTORG/INTEND markers, objective constant carried as -constant on the
 * RHS of the objective row. Output depends only on insertion order.
 */
inline std::string emit_mps(const Model& model) {
    if (model.n_vars() == 0) throw ModelError("cannot emit an empty model");

    std::string out;
    out.reserve(model.n_vars() * 64 + model.n_constrs() * 32);

    out += "NAME          " + model.name() + "\n";
    out += "ROWS\n";
    out += " N  COST\n";
    for (const Constraint& c : model.constrs()) {
        char sense = c.sense == Sense::LessEqual ? 'L' : (c.sense == Sense::Equal ? 'E' : 'G');
        out += ' ';
        out += sense;
        out += "  " + c.name + "\n";
    }

    // column-major coefficient lists
    std::vector<std::vector<std::pair<const std::string*, double>>> columns(model.n_vars());
    {
        std::vector<double> obj(model.n_vars(), 0.0);
        static const std::string kCost = "COST";
        for (const Term& t : model.objective().combined()) obj[t.var] += t.coef;
        for (size_t j = 0; j < model.n_vars(); ++j)
            if (obj[j] != 0.0) columns[j].push_back({&kCost, obj[j]});
        for (const Constraint& c : model.constrs())
            for (const Term& t : c.expr.combined())
                if (t.coef != 0.0) columns[t.var].push_back({&c.name, t.coef});
        // declare otherwise-empty columns via a zero objective entry
        for (size_t j = 0; j < model.n_vars(); ++j)
            if (columns[j].empty()) columns[j].push_back({&kCost, 0.0});
    }

    out += "COLUMNS\n";
    bool in_integer = false;
    int marker_count = 0;
    auto emit_marker = [&](bool enter) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "    MARKER%04d  'MARKER'                 '%s'\n",
                      marker_count++, enter ? "INTORG" : "INTEND");
        out += buf;
    };
    for (size_t j = 0; j < model.n_vars(); ++j) {
        const Variable& v = model.vars()[j];
        bool integral = v.kind != VarKind::Continuous;
        if (integral && !in_integer) {
            emit_marker(true);
            in_integer = true;
        } else if (!integral && in_integer) {
            emit_marker(false);
            in_integer = false;
        }
        for (const auto& [row, coef] : columns[j]) {
            std::string line = "    ";
            detail::append_field(line, v.name, 10);
            detail::append_field(line, *row, 10);
            line += detail::format_number(coef);
            line += '\n';
            out += line;
        }
    }
    if (in_integer) emit_marker(false);

    out += "RHS\n";
    if (model.objective_constant() != 0.0) {
        std::string line = "    RHS       ";
        detail::append_field(line, "COST", 10);
        line += detail::format_number(-model.objective_constant());
        line += '\n';
        out += line;
    }
    for (const Constraint& c : model.constrs()) {
        if (c.rhs == 0.0) continue;
        std::string line = "    RHS       ";
        detail::append_field(line, c.name, 10);
        line += detail::format_number(c.rhs);
        line += '\n';
        out += line;
    }

    out += "BOUNDS\n";
    for (const Variable& v : model.vars()) {
        auto bound_line = [&](const char* type, bool with_value, double value) {
            std::string line = " ";
            line += type;
            line += " BND       ";
            detail::append_field(line, v.name, 10);
            if (with_value) line += detail::format_number(value);
            while (!line.empty() && line.back() == ' ') line.pop_back();
            line += '\n';
            out += line;
        };
        if (v.lb == v.ub) {
            bound_line("FX", true, v.lb);
            continue;
        }
        if (v.lb == -kInfinity && v.ub == kInfinity) {
            bound_line("FR", false, 0.0);
            continue;
        }
        if (v.lb == -kInfinity)
            bound_line("MI", false, 0.0);
        else if (v.lb != 0.0 || v.kind != VarKind::Continuous)
            bound_line("LO", true, v.lb);
        if (v.ub != kInfinity)
            bound_line("UP", true, v.ub);
        else if (v.kind != VarKind::Continuous)
            bound_line("PL", false, 0.0);
    }
    out += "ENDATA\n";
    return out;
}

struct Evaluation {
    double objective = 0.0;
    double max_violation = 0.0;
    std::string worst_constraint;
};

/**
 * Recomputes the objective from the model expression and reports the
 * largest constraint/bound violation. Independent of any solver-reported
 * numbers, so it doubles as a cross-check on external solves.
 */
inline Evaluation evaluate_solution(const Model& model, const Assignment& assignment) {
    if (assignment.values.size() != model.n_vars())
        throw ModelError("assignment does not cover all variables");

    Evaluation eval;
    eval.objective = model.objective_constant();
    for (const Term& t : model.objective().terms())
        eval.objective += t.coef * assignment.values[t.var];

    auto note = [&](double violation, const std::string& where) {
        if (violation > eval.max_violation) {
            eval.max_violation = violation;
            eval.worst_constraint = where;
        }
    };

    for (const Constraint& c : model.constrs()) {
        double lhs = 0.0;
        for (const Term& t : c.expr.terms()) lhs += t.coef * assignment.values[t.var];
        switch (c.sense) {
            case Sense::LessEqual: note(lhs - c.rhs, c.name); break;
            case Sense::GreaterEqual: note(c.rhs - lhs, c.name); break;
            case Sense::Equal: note(std::abs(lhs - c.rhs), c.name); break;
        }
    }
    for (size_t j = 0; j < model.n_vars(); ++j) {
        const Variable& v = model.vars()[j];
        note(v.lb - assignment.values[j], "lb(" + v.name + ")");
        note(assignment.values[j] - v.ub, "ub(" + v.name + ")");
    }
    eval.max_violation = std::max(eval.max_violation, 0.0);
    return eval;
}

}  // namespace bioplan::milp
