#pragma once
// Flat sectioned key-value configuration. `[section]` headers prefix the keys
// that follow ("design.frame.1.n = 2"); every key can be overridden from the
// command line by a long flag of the same dotted name.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfy/design.hpp"
#include "mfy/simulate.hpp"

namespace mfy {

class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    void set(const std::string& dotted_key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_str(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key) const;

    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// Design from `design.frame.<a>.n` / `design.frame.<a>.m` (comma list,
// single broadcast value, or `realized`) and `design.seed` | `seed`.
DesignSpec design_from_config(const Config& cfg, const Population& pop);

SynthSpec synth_from_config(const Config& cfg);

} // namespace mfy
