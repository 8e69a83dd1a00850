#include "plab/cli/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

bool parse_real(const std::string& s, double& x) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    return ec == std::errc() && p == end && !s.empty();
}

bool parse_integer(const std::string& s, long& x) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    return ec == std::errc() && p == end && !s.empty();
}

bool parse_boolean(const std::string& s, bool& x) {
    if (s == "true" || s == "1" || s == "yes") return x = true, true;
    if (s == "false" || s == "0" || s == "no") return x = false, true;
    return false;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& p : v) s += (s.empty() ? "" : "; ") + p;
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config: " + join(problems)), problems_(std::move(problems)) {}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig cfg;
    std::vector<std::string> problems;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                problems.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            problems.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        if (!section.empty()) key = section + "." + key;
        if (key == "experiment") {
            cfg.experiment = value;
        } else if (key == "seed") {
            long s = 0;
            if (!parse_integer(value, s) || s < 0)
                problems.push_back("seed: expected a non-negative integer, got '" + value + "'");
            else
                cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "out" || key == "output.dir") {
            cfg.out_dir = value;
        } else {
            if (cfg.values.count(key)) problems.push_back("line " + std::to_string(lineno) + ": duplicate key " + key);
            cfg.values[key] = value;
        }
    }
    if (cfg.experiment.empty()) problems.push_back("missing key: experiment");
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open " + path});
    return parse(in);
}

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    double x = 0;
    if (!parse_real(it->second, x)) throw ConfigError({key + ": expected a number, got '" + it->second + "'"});
    return x;
}

long ExperimentConfig::get_int(const std::string& key, long fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    long x = 0;
    if (!parse_integer(it->second, x)) throw ConfigError({key + ": expected an integer, got '" + it->second + "'"});
    return x;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    bool x = false;
    if (!parse_boolean(it->second, x)) throw ConfigError({key + ": expected true or false, got '" + it->second + "'"});
    return x;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) {
        double x = 0;
        if (!parse_real(item, x)) throw ConfigError({key + ": expected a list of numbers, got '" + it->second + "'"});
        out.push_back(x);
    }
    return out;
}

std::vector<long> ExperimentConfig::get_ints(const std::string& key, const std::vector<long>& fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::vector<long> out;
    for (const auto& item : split_list(it->second)) {
        long x = 0;
        if (!parse_integer(item, x)) throw ConfigError({key + ": expected a list of integers, got '" + it->second + "'"});
        out.push_back(x);
    }
    return out;
}

std::string ExperimentConfig::canonical() const {
    std::string s = "experiment = " + experiment + "\nseed = " + std::to_string(seed) + "\n";
    for (const auto& [k, v] : values) s += k + " = " + v + "\n";
    return s;
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate(const ExperimentConfig& cfg, const ConfigSchema& schema) {
    std::vector<std::string> problems;
    for (const auto& [key, value] : cfg.values) {
        const auto it = schema.find(key);
        if (it == schema.end()) {
            problems.push_back("unknown key for " + cfg.experiment + ": " + key);
            continue;
        }
        double d;
        long l;
        bool b;
        bool ok = true;
        switch (it->second) {
            case KeyType::text: break;
            case KeyType::real: ok = parse_real(value, d); break;
            case KeyType::integer: ok = parse_integer(value, l); break;
            case KeyType::boolean: ok = parse_boolean(value, b); break;
            case KeyType::reals:
                for (const auto& item : split_list(value)) ok = ok && parse_real(item, d);
                break;
            case KeyType::integers:
                for (const auto& item : split_list(value)) ok = ok && parse_integer(item, l);
                break;
        }
        if (!ok) problems.push_back(key + ": cannot parse '" + value + "'");
    }
    if (!problems.empty()) throw ConfigError(problems);
}

}  // namespace plab
