#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "bioplan/domain.hpp"

namespace bioplan {

namespace detail {

inline const nlohmann::json& member(const nlohmann::json& j, const std::string& key,
                                    const std::string& path) {
    if (!j.contains(key)) throw ValidationError(path + "." + key, "missing field");
    return j.at(key);
}

inline double num(const nlohmann::json& j, const std::string& key, const std::string& path) {
    const auto& v = member(j, key, path);
    if (!v.is_number()) throw ValidationError(path + "." + key, "must be a number");
    return v.get<double>();
}

inline int integer(const nlohmann::json& j, const std::string& key, const std::string& path) {
    const auto& v = member(j, key, path);
    if (!v.is_number_integer()) throw ValidationError(path + "." + key, "must be an integer");
    return v.get<int>();
}

}  // namespace detail

/**
 * Parses one municipality document (see README for the schema) and runs
 * every type invariant. Violations are reported with their field paths;
 * nothing is ever silently clamped.
 */
inline PlantConfig load_plant_config(const nlohmann::json& doc) {
    using detail::integer;
    using detail::member;
    using detail::num;

    PlantConfig cfg;
    if (!doc.contains("name") || !doc.at("name").is_string())
        throw ValidationError("name", "missing field");
    cfg.name = doc.at("name").get<std::string>();

    {
        const auto& j = member(doc, "chp", "");
        ChpParams& c = cfg.chp;
        c.p_max = num(j, "p_max", "chp");
        c.p_min = num(j, "p_min", "chp");
        c.q_max = num(j, "q_max", "chp");
        c.theta = num(j, "theta", "chp");
        c.xi = num(j, "xi", "chp");
        c.ramp_up = num(j, "ramp_up", "chp");
        c.ramp_down = num(j, "ramp_down", "chp");
        c.eff_power = num(j, "eff_power", "chp");
        c.eff_heat = num(j, "eff_heat", "chp");
        c.min_up = integer(j, "min_up", "chp");
        c.min_down = integer(j, "min_down", "chp");
    }
    {
        const auto& j = member(doc, "aux_boiler", "");
        AuxBoilerParams& a = cfg.aux;
        a.q_max = num(j, "q_max", "aux_boiler");
        a.eff = num(j, "eff", "aux_boiler");
        a.om_cost = num(j, "om_cost", "aux_boiler");
        a.tax = num(j, "tax", "aux_boiler");
        a.co2_tax = num(j, "co2_tax", "aux_boiler");
    }
    {
        const auto& j = member(doc, "biomass_storage", "");
        BiomassStorageParams& b = cfg.biomass_storage;
        b.cap = num(j, "cap", "biomass_storage");
        b.safety_heating = num(j, "safety_level_heating", "biomass_storage");
        b.safety_other = num(j, "safety_level_other", "biomass_storage");
        if (j.contains("heating_weeks")) {
            const auto& w = j.at("heating_weeks");
            if (!w.is_array() || w.size() != 2)
                throw ValidationError("biomass_storage.heating_weeks", "must be [first, last]");
            b.heating_first = w.at(0).get<int>();
            b.heating_last = w.at(1).get<int>();
        }
        b.max_outflow = num(j, "max_outflow", "biomass_storage");
        b.delivery_gap = num(j, "delivery_gap", "biomass_storage");
        b.initial = num(j, "initial", "biomass_storage");
        b.calorific = num(j, "calorific", "biomass_storage");
        b.inventory_cost = num(j, "inventory_cost", "biomass_storage");
    }
    {
        const auto& j = member(doc, "thermal_storage", "");
        ThermalStorageParams& t = cfg.thermal_storage;
        t.cap_min = num(j, "cap_min", "thermal_storage");
        t.cap_max = num(j, "cap_max", "thermal_storage");
        t.max_flow = num(j, "max_flow", "thermal_storage");
        t.initial = num(j, "initial", "thermal_storage");
    }
    {
        const auto& j = member(doc, "costs", "");
        CostParams& c = cfg.costs;
        c.chp_op = num(j, "chp_op", "costs");
        c.startup = num(j, "startup", "costs");
        c.shutdown = num(j, "shutdown", "costs");
        c.elec_tax = num(j, "elec_tax", "costs");
        c.biomass_incentive = num(j, "biomass_incentive", "costs");
        c.biomass_share_target = num(j, "biomass_share_target", "costs");
        c.penalty_store = num(j, "penalty_store", "costs");
        c.penalty_miss = num(j, "penalty_miss", "costs");
        c.penalty_bm = num(j, "penalty_bm", "costs");
    }
    {
        const auto& arr = member(doc, "contracts", "");
        if (!arr.is_array()) throw ValidationError("contracts", "must be an array");
        for (size_t i = 0; i < arr.size(); ++i) {
            const auto& j = arr.at(i);
            std::string path = "contracts[" + std::to_string(i) + "]";
            ContractSpec s;
            s.id = j.contains("id") ? j.at("id").get<std::string>() : std::to_string(i + 1);
            s.base_price = num(j, "base_price", path);
            s.up_price = num(j, "up_price", path);
            s.down_price = num(j, "down_price", path);
            s.opt_up = num(j, "opt_up", path);
            s.opt_down = num(j, "opt_down", path);
            s.amount_max = num(j, "amount_max", path);
            s.amount_min = num(j, "amount_min", path);
            s.freq = num(j, "freq", path);
            s.deliveries_max = integer(j, "deliveries_max", path);
            s.deliveries_min = integer(j, "deliveries_min", path);
            cfg.contracts.push_back(s);
        }
    }

    cfg.validate();
    return cfg;
}

inline PlantConfig load_plant_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open configuration file");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string(), std::string("JSON parse failure: ") + e.what());
    }
    return load_plant_config(doc);
}

}  // namespace bioplan
