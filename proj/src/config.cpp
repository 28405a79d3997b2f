#include "mfy/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfy {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line without '=': " + t);
        }
        std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("config line with empty key: " + t);
        if (!section.empty()) key = section + "." + key;
        cfg.values_[key] = value;
    }
    return cfg;
}

void Config::set(const std::string& dotted_key, const std::string& value) {
    values_[trim(dotted_key)] = trim(value);
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("missing config key '" + key + "'");
    return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key) const {
    const std::string v = get_str(key);
    char* end = nullptr;
    const long long r = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty()) {
        throw std::runtime_error("config key '" + key + "' is not an integer: '" + v + "'");
    }
    return r;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_str(key);
    char* end = nullptr;
    const unsigned long long r = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty()) {
        throw std::runtime_error("config key '" + key + "' is not an unsigned integer: '" + v + "'");
    }
    return r;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_str(key);
    char* end = nullptr;
    const double r = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) {
        throw std::runtime_error("config key '" + key + "' is not a number: '" + v + "'");
    }
    return r;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_str(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    const std::string v = get_str(key);
    std::vector<int> out;
    std::string cur;
    auto flush = [&]() {
        const std::string t = trim(cur);
        if (t.empty()) throw std::runtime_error("config key '" + key + "' has an empty list item");
        char* end = nullptr;
        const long long r = std::strtoll(t.c_str(), &end, 10);
        if (end != t.c_str() + t.size()) {
            throw std::runtime_error("config key '" + key + "' has a non-integer item '" + t + "'");
        }
        out.push_back(static_cast<int>(r));
        cur.clear();
    };
    for (char ch : v) {
        if (ch == ',') {
            flush();
        } else {
            cur += ch;
        }
    }
    flush();
    return out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    }
    return out;
}

DesignSpec design_from_config(const Config& cfg, const Population& pop) {
    DesignSpec design;
    design.seed = cfg.get_u64("design.seed", cfg.get_u64("seed", 0));
    for (const auto& frame : pop.frames) {
        const std::string base = "design.frame." + std::to_string(frame.id);
        FrameDesign fd;
        fd.frame_id = frame.id;
        const std::string m_key = base + ".m";
        const std::string m_value = cfg.get_str(m_key, "realized");
        if (m_value == "realized") {
            fd.policy = MPolicy::realized;
        } else {
            fd.policy = MPolicy::fixed;
            fd.n = static_cast<int>(cfg.get_int(base + ".n"));
            std::vector<int> m = cfg.get_int_list(m_key);
            if (static_cast<int>(m.size()) == 1 && frame.psu_count() > 1) {
                m.assign(static_cast<std::size_t>(frame.psu_count()), m[0]);
            }
            fd.m = std::move(m);
        }
        design.frames.push_back(std::move(fd));
    }
    return design;
}

SynthSpec synth_from_config(const Config& cfg) {
    SynthSpec s;
    s.grid_w = static_cast<int>(cfg.get_int("synth.grid_w", s.grid_w));
    s.grid_h = static_cast<int>(cfg.get_int("synth.grid_h", s.grid_h));
    s.bands = static_cast<int>(cfg.get_int("synth.bands", s.bands));
    s.list_psus = static_cast<int>(cfg.get_int("synth.list_psus", s.list_psus));
    s.list_psu_size = static_cast<int>(cfg.get_int("synth.list_psu_size", s.list_psu_size));
    s.list_n = static_cast<int>(cfg.get_int("synth.list_n", s.list_n));
    s.list_m = static_cast<int>(cfg.get_int("synth.list_m", s.list_m));
    if (cfg.has("synth.cluster_counts")) {
        s.cluster_counts = cfg.get_int_list("synth.cluster_counts");
    }
    s.yield_base = cfg.get_double("synth.yield_base", s.yield_base);
    s.trend = cfg.get_double("synth.trend", s.trend);
    s.yield_noise = cfg.get_double("synth.yield_noise", s.yield_noise);
    s.band_noise = cfg.get_double("synth.band_noise", s.band_noise);
    s.seed = cfg.get_u64("synth.seed", cfg.get_u64("seed", s.seed));
    return s;
}

} // namespace mfy
