#pragma once

// Sectioned key = value experiment configuration.
//
// Grammar (see docs/config.md): '#' starts a comment anywhere on a line;
// blank lines are ignored; '[name]' opens a section from the known set
// {grid, model, clebsch, solver, initial-data, output, runs}; every other
// line is 'key = value' inside the current section.  The two keys allowed
// before any section are 'scenario' and 'seed'.  Parse errors carry the
// origin and line number; typed accessors name the offending section.key.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace enslab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string scenario;
    std::uint64_t seed = 0;
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool operator==(const ExperimentConfig& o) const {
        return scenario == o.scenario && seed == o.seed && sections == o.sections;
    }

    bool has(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        return s != sections.end() && s->second.find(key) != s->second.end();
    }

    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const {
        auto s = sections.find(sec);
        if (s == sections.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }

    double get_num(const std::string& sec, const std::string& key, double fallback) const {
        if (!has(sec, key)) return fallback;
        const std::string& v = sections.at(sec).at(key);
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw ConfigError("config error - " + sec + "." + key + ": not a number: '" + v + "'");
        return x;
    }

    long get_int(const std::string& sec, const std::string& key, long fallback) const {
        const double x = get_num(sec, key, static_cast<double>(fallback));
        const long n = static_cast<long>(x);
        if (static_cast<double>(n) != x)
            throw ConfigError("config error - " + sec + "." + key + ": not an integer: '" +
                              get(sec, key, "") + "'");
        return n;
    }
};

namespace detail {

inline const std::set<std::string>& known_sections() {
    static const std::set<std::string> s{"grid",    "model",  "clebsch", "solver",
                                         "initial-data", "output", "runs"};
    return s;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text,
                                     const std::string& origin = "<config>") {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string rawline, section;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw ConfigError("config error - " + origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    bool have_scenario = false;
    while (std::getline(in, rawline)) {
        ++lineno;
        std::string line = rawline;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            const std::string name = detail::trim(line.substr(1, line.size() - 2));
            if (detail::known_sections().count(name) == 0)
                fail("unknown section '" + name + "'");
            if (cfg.sections.count(name) != 0) fail("duplicate section '" + name + "'");
            cfg.sections[name];
            section = name;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (value.empty()) fail("empty value for key '" + key + "'");
        if (section.empty()) {
            if (key == "scenario") {
                if (have_scenario) fail("duplicate key 'scenario'");
                cfg.scenario = value;
                have_scenario = true;
            } else if (key == "seed") {
                try {
                    if (value.find('-') != std::string::npos)  // stoull would wrap silently
                        throw std::invalid_argument("negative");
                    std::size_t used = 0;
                    cfg.seed = std::stoull(value, &used);
                    if (used != value.size()) throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    fail("seed is not an unsigned integer: '" + value + "'");
                }
            } else {
                fail("key '" + key + "' outside a section (only scenario and seed may be)");
            }
            continue;
        }
        auto& sec = cfg.sections[section];
        if (sec.count(key) != 0) fail("duplicate key '" + key + "' in section [" + section + "]");
        sec[key] = value;
    }
    if (!have_scenario)
        throw ConfigError("config error - " + origin + ": missing top-level 'scenario' key");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error - cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

// Canonical text form: sections and keys in sorted order, so that
// parse_config(serialize_config(c)) == c and the bytes are deterministic.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "scenario = " << cfg.scenario << "\n";
    out << "seed = " << cfg.seed << "\n";
    for (const auto& [name, sec] : cfg.sections) {
        out << "\n[" << name << "]\n";
        for (const auto& [k, v] : sec) out << k << " = " << v << "\n";
    }
    return out.str();
}

}  // namespace enslab
