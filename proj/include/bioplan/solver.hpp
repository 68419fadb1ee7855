#pragma once

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bioplan/milp.hpp"

namespace bioplan::milp {

/**
 * External solver boundary: a subprocess + files contract. The command
 * template names any MPS-capable solver; placeholders {mps}, {sol},
 * {gap} and {timelimit} are substituted before invocation.
 */
struct SolverConfig {
    std::string command;
    double gap = 1e-4;
    double time_limit_sec = 600.0;
    std::filesystem::path work_dir;  // empty: fresh directory under the system temp path
    bool keep_files = false;

    /// Reads the command template from PLANNER_SOLVER_CMD.
    static SolverConfig from_env() {
        SolverConfig cfg;
        if (const char* cmd = std::getenv("PLANNER_SOLVER_CMD")) cfg.command = cmd;
        return cfg;
    }
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string substitute_placeholders(const std::string& tmpl,
                                           const std::unordered_map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() + 64);
    for (size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            size_t close = tmpl.find('}', i);
            if (close != std::string::npos) {
                auto it = values.find(tmpl.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

inline std::filesystem::path make_work_dir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    std::ostringstream name;
    name << "bioplan-" << std::hex << rd() << "-" << counter++;
    std::filesystem::path dir = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::create_directories(dir);
    return dir;
}

inline bool parse_double(const std::string& token, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(token, &pos);
        return pos == token.size();
    } catch (...) {
        return false;
    }
}

inline std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace detail

/**
 * Parses a solution file by variable-name matching. Accepts plain
 * `<name> <value>` pairs as well as the Columns-section dialect; any token
 * that names a model variable followed by a numeric token is taken as its
 * value. Status keywords (optimal/infeasible/...) are picked up from the
 * surrounding text.
 */
inline Assignment parse_solution_text(const Model& model, const std::string& text, double gap_limit) {
    Assignment result;
    result.values.assign(model.n_vars(), 0.0);
    std::vector<bool> seen(model.n_vars(), false);

    bool status_found = false;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        for (std::string tok; ls >> tok;) tokens.push_back(tok);
        if (tokens.empty()) continue;

        std::string low = detail::lowercase(line);
        if (!status_found) {
            if (low.find("infeasible") != std::string::npos) {
                result.status = SolveStatus::Infeasible;
                status_found = true;
            } else if (low.find("unbounded") != std::string::npos || low.find("error") != std::string::npos) {
                result.status = SolveStatus::Error;
                status_found = true;
            } else if (low.find("feasiblegap") != std::string::npos ||
                       low.find("time limit") != std::string::npos) {
                result.status = SolveStatus::FeasibleGap;
                status_found = true;
            } else if (low.find("optimal") != std::string::npos) {
                result.status = SolveStatus::Optimal;
                status_found = true;
            }
        }

        for (size_t i = 0; i + 1 < tokens.size(); ++i) {
            if (tokens[i] == "Objective" || tokens[i] == "objective") {
                double v;
                if (detail::parse_double(tokens[i + 1], v)) result.reported_objective = v;
            } else if (tokens[i] == "Gap" || tokens[i] == "gap") {
                double v;
                if (detail::parse_double(tokens[i + 1], v)) result.gap = v;
            } else if (auto id = model.find_var(tokens[i])) {
                double v;
                if (detail::parse_double(tokens[i + 1], v)) {
                    result.values[id->index] = v;
                    seen[id->index] = true;
                }
            }
        }
    }

    if (result.status == SolveStatus::Optimal && result.gap > gap_limit + 1e-12)
        result.status = SolveStatus::FeasibleGap;

    if (result.solved()) {
        for (size_t j = 0; j < seen.size(); ++j)
            if (!seen[j]) result.missing_values_defaulted = true;
    }
    return result;
}

namespace detail {

inline void validate_assignment(const Model& model, Assignment& result) {
    constexpr double tol = 1e-6;
    for (size_t j = 0; j < model.n_vars(); ++j) {
        const Variable& v = model.vars()[j];
        double x = result.values[j];
        if (x < v.lb - tol || x > v.ub + tol) {
            result.status = SolveStatus::Error;
            result.diagnostics += "value of " + v.name + " violates bounds; ";
            return;
        }
        if (v.kind != VarKind::Continuous && std::abs(x - std::round(x)) > tol) {
            result.status = SolveStatus::Error;
            result.diagnostics += "value of " + v.name + " is fractional; ";
            return;
        }
    }
}

}  // namespace detail

/**
 * Writes the model to a temporary MPS file, invokes the backend command and
 * binds the parsed solution back to the model's variables. Backend failures
 * surface as status Error with the captured log in `diagnostics`.
 */
inline Assignment solve_external(const Model& model, const SolverConfig& config) {
    if (config.command.empty())
        throw SolverError("no solver command configured (set PLANNER_SOLVER_CMD or the manifest entry)");

    namespace fs = std::filesystem;
    fs::path dir = config.work_dir.empty() ? detail::make_work_dir() : config.work_dir;
    fs::create_directories(dir);
    fs::path mps_path = dir / (model.name() + ".mps");
    fs::path sol_path = dir / (model.name() + ".sol");
    fs::path log_path = dir / (model.name() + ".log");

    {
        std::ofstream mps(mps_path);
        if (!mps) throw SolverError("cannot write " + mps_path.string());
        mps << emit_mps(model);
    }

    std::string cmd = detail::substitute_placeholders(
        config.command, {{"mps", mps_path.string()},
                         {"sol", sol_path.string()},
                         {"gap", detail::format_number(config.gap)},
                         {"timelimit", detail::format_number(config.time_limit_sec)}});
    cmd += " > " + log_path.string() + " 2>&1";

    int rc = std::system(cmd.c_str());

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    Assignment result;
    if (rc != 0) {
        result.status = SolveStatus::Error;
        result.diagnostics = "backend exited with code " + std::to_string(rc) + "\n" + slurp(log_path);
    } else if (!fs::exists(sol_path)) {
        result.status = SolveStatus::Error;
        result.diagnostics = "backend produced no solution file\n" + slurp(log_path);
    } else {
        result = parse_solution_text(model, slurp(sol_path), config.gap);
        if (result.status == SolveStatus::Error && result.diagnostics.empty())
            result.diagnostics = "unparsable solution file\n" + slurp(log_path);
        if (result.solved()) detail::validate_assignment(model, result);
    }

    if (!config.keep_files && config.work_dir.empty()) {
        std::error_code ec;
        if (result.status != SolveStatus::Error) fs::remove_all(dir, ec);
    }
    if (result.status == SolveStatus::Error && result.diagnostics.find(dir.string()) == std::string::npos)
        result.diagnostics += "\nsolver files kept at " + dir.string();
    return result;
}

}  // namespace bioplan::milp
