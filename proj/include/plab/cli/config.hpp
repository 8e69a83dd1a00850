#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace plab {

// Every problem found while reading or validating a config, one message per entry.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

// Flat key-value text. "[section]" prefixes the keys below it with "section.", '#' starts a
// comment, and lists are comma separated:
//
//   experiment = flow_monotonicity
//   seed = 7
//   [backend]
//   kind = torus
//   nx = 64
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::map<std::string, std::string> values;  // everything else, keys with their section prefix

    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig parse_string(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<long> get_ints(const std::string& key, const std::vector<long>& fallback) const;
    void set(const std::string& key, const std::string& value) { values[key] = value; }

    // Sorted "key = value" lines including experiment and seed; the output directory is left
    // out so that reruns elsewhere hash the same.
    std::string canonical() const;
    std::string hash() const;  // 16 hex digits of FNV-1a over canonical()
};

// Throws ConfigError listing unknown keys and values that do not parse as their declared type.
enum class KeyType { text, real, integer, boolean, reals, integers };
using ConfigSchema = std::map<std::string, KeyType>;
void validate(const ExperimentConfig& cfg, const ConfigSchema& schema);

}  // namespace plab
