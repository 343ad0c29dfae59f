#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kho/common.hpp"

namespace kho {

struct ConfigError : Error {
    using Error::Error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Plain decimal, or a multiple of pi written as "pi", "0.7pi", "-pi".
inline double parse_number(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError(where + ": empty number");
    if (s == "pi") return pi;
    if (s == "-pi") return -pi;
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ConfigError(where + ": not a number: '" + s + "'");
    const std::string rest = trim(std::string(end));
    if (rest.empty()) return v;
    if (rest == "pi") return v * pi;
    throw ConfigError(where + ": trailing text after number: '" + s + "'");
}

inline bool parse_bool(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError(where + ": expected true/false, got '" + s + "'");
}

}  // namespace detail

// Before-or-after tag on a kick index: "36-" is the state entering kick 36,
// "36+" the state leaving it.
struct SnapshotSel {
    long n = 0;
    bool after = false;

    std::string label() const { return std::to_string(n) + (after ? "+" : "-"); }
    friend bool operator<(const SnapshotSel& a, const SnapshotSel& b) {
        return a.n != b.n ? a.n < b.n : a.after < b.after;
    }
    friend bool operator==(const SnapshotSel& a, const SnapshotSel& b) {
        return a.n == b.n && a.after == b.after;
    }
};

inline std::vector<SnapshotSel> parse_snapshots(const std::string& raw) {
    std::vector<SnapshotSel> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = detail::trim(item);
        if (t.empty()) continue;
        const char tag = t.back();
        if (t.size() < 2 || (tag != '+' && tag != '-'))
            throw ConfigError("snapshot selector '" + t + "': want e.g. 36- or 36+");
        const std::string num = t.substr(0, t.size() - 1);
        char* end = nullptr;
        const long n = std::strtol(num.c_str(), &end, 10);
        if (*end != '\0' || n < 1)
            throw ConfigError("snapshot selector '" + t + "': bad kick index");
        out.push_back({n, tag == '+'});
    }
    return out;
}

// key = value lines; '#' starts a comment; duplicate keys are rejected so a
// typo cannot silently shadow an earlier setting. Accessors mark keys used,
// and unknown_keys() reports what was never consulted.
class Config {
public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config c;
        c.origin_ = origin;
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string val = detail::trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (c.kv_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
            c.kv_[key] = val;
        }
        return c;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open config: " + path);
        std::ostringstream ss;
        ss << is.rdbuf();
        return parse_string(ss.str(), path);
    }

    bool has(const std::string& key) const {
        used_.insert(key);
        return kv_.count(key) != 0;
    }

    std::string get_string(const std::string& key) const {
        used_.insert(key);
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        return has(key) ? get_string(key) : dflt;
    }

    double get_number(const std::string& key) const {
        return detail::parse_number(get_string(key), origin_ + ": " + key);
    }
    double get_number(const std::string& key, double dflt) const {
        return has(key) ? get_number(key) : dflt;
    }

    long get_int(const std::string& key) const {
        const double v = get_number(key);
        const long n = std::lround(v);
        if (std::abs(v - double(n)) > 1e-9)
            throw ConfigError(origin_ + ": " + key + ": expected an integer");
        return n;
    }
    long get_int(const std::string& key, long dflt) const {
        return has(key) ? get_int(key) : dflt;
    }

    bool get_bool(const std::string& key, bool dflt) const {
        return has(key) ? detail::parse_bool(get_string(key), origin_ + ": " + key) : dflt;
    }

    std::vector<double> get_list(const std::string& key) const {
        const std::string raw = get_string(key);
        std::vector<double> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = detail::trim(item);
            if (t.empty()) continue;
            out.push_back(detail::parse_number(t, origin_ + ": " + key));
        }
        return out;
    }

    std::vector<std::string> unknown_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : kv_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> used_;
};

}  // namespace kho
