#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bioplan/domain.hpp"

namespace bioplan::csv {

struct CsvError : std::runtime_error {
    explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline std::string format_value(double v) {
    if (v == 0.0) v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/**
 * Reads a `timestamp,value` series file (hourly ISO-8601 timestamps).
 * Values are returned in file order; the timestamps define alignment by
 * position only.
 */
inline std::vector<double> read_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw CsvError(path.string() + ": empty file");
    if (split_line(line) != std::vector<std::string>{"timestamp", "value"})
        throw CsvError(path.string() + ": expected header 'timestamp,value'");
    std::vector<double> values;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != 2)
            throw CsvError(path.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
        try {
            values.push_back(std::stod(fields[1]));
        } catch (...) {
            throw CsvError(path.string() + ":" + std::to_string(line_no) + ": bad value '" +
                           fields[1] + "'");
        }
    }
    if (values.empty()) throw CsvError(path.string() + ": no data rows");
    return values;
}

/// Synthetic ISO-8601 hourly timestamps starting at the nominal period begin.
inline std::string hour_timestamp(int hour_index, int start_year = 2016) {
    static const int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int days = hour_index / 24;
    int hour = hour_index % 24;
    int year = start_year;
    int month = 5;  // 0-based June
    int day = days;
    for (;;) {
        int dim = days_in_month[month] + (month == 1 && year % 4 == 0 ? 1 : 0);
        if (day < dim) break;
        day -= dim;
        if (++month == 12) {
            month = 0;
            ++year;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00", year, month + 1, day + 1, hour);
    return buf;
}

inline void write_series(const std::filesystem::path& path, const std::vector<double>& values,
                         int start_year = 2016) {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot write " + path.string());
    out << "timestamp,value\n";
    for (size_t i = 0; i < values.size(); ++i)
        out << hour_timestamp(static_cast<int>(i), start_year) << ',' << format_value(values[i])
            << '\n';
}

// ---------------------------------------------------------------------------
// Scenario set exchange format
// ---------------------------------------------------------------------------

inline void write_scenario_set(const std::filesystem::path& path, const ScenarioSet& set) {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot write " + path.string());
    out << "scenario,probability,period,demand,elec_price,fuel_price\n";
    for (size_t s = 0; s < set.scenarios.size(); ++s) {
        const Scenario& sc = set.scenarios[s];
        for (int t = 0; t < set.grid.n_periods; ++t)
            out << s + 1 << ',' << format_value(sc.probability) << ',' << t + 1 << ','
                << format_value(sc.demand[t]) << ',' << format_value(sc.elec_price[t]) << ','
                << format_value(sc.fuel_price[t]) << '\n';
    }
}

inline ScenarioSet read_scenario_set(const std::filesystem::path& path, const TimeGrid& grid) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        split_line(line) !=
            std::vector<std::string>{"scenario", "probability", "period", "demand", "elec_price",
                                     "fuel_price"})
        throw CsvError(path.string() + ": bad scenario header");

    ScenarioSet set;
    set.grid = grid;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_line(line);
        if (f.size() != 6)
            throw CsvError(path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
        size_t idx = std::stoul(f[0]);
        while (set.scenarios.size() < idx) set.scenarios.emplace_back();
        Scenario& sc = set.scenarios[idx - 1];
        sc.probability = std::stod(f[1]);
        sc.demand.push_back(std::stod(f[3]));
        sc.elec_price.push_back(std::stod(f[4]));
        sc.fuel_price.push_back(std::stod(f[5]));
    }
    set.validate();
    return set;
}

}  // namespace bioplan::csv
