#pragma once

// Run manifest: tool version, the exact configuration echo (canonical text,
// re-parseable), free-form notes (scheme, stability ratio, tolerances...),
// the list of produced files, wall-clock, and one pass/fail entry per enabled
// check.  Serialized as JSON and written atomically.

#include <json.hpp>

#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"

namespace enslab {

inline const char* kToolName = "enslab";
inline const char* kToolVersion = "1.0.0";

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
};

struct RunManifest {
    std::string tool = kToolName;
    std::string version = kToolVersion;
    ExperimentConfig config;
    std::map<std::string, std::string> notes;
    std::vector<CheckResult> checks;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    void check(const std::string& name, double value, double tolerance) {
        checks.push_back({name, value <= tolerance, value, tolerance});
    }
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["config"] = serialize_config(m.config);
    j["notes"] = m.notes;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : m.checks)
        j["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"value", c.value},
                               {"tolerance", c.tolerance}});
    j["outputs"] = m.outputs;
    j["wall_seconds"] = m.wall_seconds;
    write_text_atomic(path, j.dump(2) + "\n");
}

inline RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest error - cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("manifest error - '" + path + "': " + e.what());
    }
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.config = parse_config(j.at("config").get<std::string>(), path + "#config");
    m.notes = j.at("notes").get<std::map<std::string, std::string>>();
    for (const auto& c : j.at("checks")) {
        CheckResult r;
        r.name = c.at("name").get<std::string>();
        r.passed = c.at("passed").get<bool>();
        r.value = c.at("value").get<double>();
        r.tolerance = c.at("tolerance").get<double>();
        m.checks.push_back(r);
    }
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    return m;
}

}  // namespace enslab
