#pragma once

// Engine configuration. Read from a TOML document restricted to what the
// engine needs: [table] headers, `key = value` pairs with strings, integers,
// floats, booleans and single-line arrays of those, and `#` comments.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ais/clonal.hpp"
#include "ais/dca.hpp"
#include "ais/error.hpp"
#include "ais/hash.hpp"
#include "ais/lifecycle.hpp"
#include "ais/negsel.hpp"
#include "ais/synth.hpp"

namespace ais {

namespace toml {

using Scalar = std::variant<bool, std::int64_t, double, std::string>;
using Value = std::variant<Scalar, std::vector<Scalar>>;
// table name ("" for top level) -> key -> value
using Document = std::map<std::string, std::map<std::string, Value>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool bare_key(std::string_view k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

class Cursor {
public:
    Cursor(std::string_view text, std::size_t line) : s_(text), line_(line) {}

    void skip_ws() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
    }
    bool done() {
        skip_ws();
        return i_ == s_.size() || s_[i_] == '#';
    }
    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }

    Value value() {
        skip_ws();
        if (peek() == '[') {
            ++i_;
            std::vector<Scalar> items;
            skip_ws();
            if (peek() == ']') {
                ++i_;
                return items;
            }
            for (;;) {
                items.push_back(scalar());
                skip_ws();
                if (peek() == ',') {
                    ++i_;
                    skip_ws();
                    if (peek() == ']') {
                        ++i_;
                        return items;
                    }
                    continue;
                }
                if (peek() == ']') {
                    ++i_;
                    return items;
                }
                fail("expected ',' or ']' in array");
            }
        }
        return scalar();
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + what);
    }

private:
    Scalar scalar() {
        skip_ws();
        if (peek() == '"') return string();
        const std::size_t start = i_;
        while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != ']' && s_[i_] != '#' && s_[i_] != ' ' && s_[i_] != '\t')
            ++i_;
        std::string tok(s_.substr(start, i_ - start));
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::string digits;
        for (char c : tok)
            if (c != '_') digits.push_back(c);
        if (digits.empty()) fail("missing value");
        const bool is_float = digits.find_first_of(".eE") != std::string::npos;
        if (!is_float) {
            std::int64_t v = 0;
            const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
            auto [p, ec] = std::from_chars(b, digits.data() + digits.size(), v);
            if (ec == std::errc{} && p == digits.data() + digits.size()) return v;
            fail("bad integer '" + tok + "'");
        }
        const auto v = parse_number(digits);
        if (!v) fail("bad number '" + tok + "'");
        return *v;
    }

    Scalar string() {
        ++i_;  // opening quote
        std::string out;
        while (i_ < s_.size() && s_[i_] != '"') {
            char c = s_[i_++];
            if (c == '\\') {
                if (i_ == s_.size()) break;
                const char e = s_[i_++];
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out.push_back(c);
            }
        }
        if (i_ == s_.size()) fail("unterminated string");
        ++i_;
        return out;
    }

    std::string_view s_;
    std::size_t i_ = 0;
    std::size_t line_;
};

}  // namespace detail

inline Document parse(std::istream& in) {
    Document doc;
    doc[""];
    std::string table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto s = detail::trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (s.front() == '[') {
            const auto close = s.find(']');
            if (close == std::string_view::npos)
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated table header");
            auto rest = detail::trim(s.substr(close + 1));
            if (!rest.empty() && rest.front() != '#')
                throw ConfigError("config line " + std::to_string(line_no) + ": text after table header");
            table = std::string(detail::trim(s.substr(1, close - 1)));
            if (!detail::bare_key(table))
                throw ConfigError("config line " + std::to_string(line_no) + ": bad table name '" + table + "'");
            if (doc.count(table) && !doc[table].empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": table [" + table + "] defined twice");
            doc[table];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(detail::trim(s.substr(0, eq)));
        if (!detail::bare_key(key))
            throw ConfigError("config line " + std::to_string(line_no) + ": bad key '" + key + "'");
        detail::Cursor cur(s.substr(eq + 1), line_no);
        Value v = cur.value();
        if (!cur.done()) cur.fail("unexpected text after value");
        if (!doc[table].emplace(key, std::move(v)).second) cur.fail("duplicate key '" + key + "'");
    }
    return doc;
}

inline Document parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
}

}  // namespace toml

struct RepresentationConfig {
    unsigned bits_per_feature = 8;
    bool lenient = false;
    std::vector<std::string> categorical;
    std::string id_column = "id";
    std::string label_column = "label";
};

struct NegselConfig {
    Variant variant = Variant::Fixed;
    double radius = 0.1;
    double self_radius = 0.05;
    std::size_t target_count = 500;
    double target_coverage = 0.95;   // V-detector stop rule
    bool stop_at_coverage = false;   // fixed variant: also stop at target_coverage
    std::uint64_t seed = 1;
    std::size_t max_attempts = 0;    // 0 -> module default
    std::size_t max_detectors = 100000;
};

struct ClonalConfig {
    bool enabled = false;
    MaturationConfig maturation;
    std::size_t snapshot_every = 10;
};

struct DcaConfig {
    DcaParams params;
    double anomaly_threshold = 0.5;
    std::string timestamp_column = "timestamp";
    std::string pamp_column = "pamp";
    std::string danger_column = "danger";
    std::string safe_column = "safe";
    std::string antigens_column = "antigens";
};

struct LifecycleConfig {
    LifecyclePolicy policy;
    std::uint64_t seed = 1;
};

enum class Mode { SelfNonself, Danger };

struct EngineConfig {
    Mode mode = Mode::SelfNonself;
    RepresentationConfig representation;
    NegselConfig negsel;
    ClonalConfig clonal;
    DcaConfig dca;
    LifecycleConfig lifecycle;
    ScenarioSpec synth;

    void validate() const {
        if (representation.bits_per_feature == 0 || representation.bits_per_feature > 32)
            throw ConfigError("representation.bits_per_feature must be in [1, 32]");
        if (!(negsel.radius > 0.0)) throw ConfigError("negsel.radius must be > 0");
        if (!(negsel.self_radius >= 0.0)) throw ConfigError("negsel.self_radius must be >= 0");
        if (negsel.target_count == 0) throw ConfigError("negsel.target_count must be > 0");
        if (!(negsel.target_coverage > 0.0 && negsel.target_coverage < 1.0))
            throw ConfigError("negsel.target_coverage must be in (0, 1)");
        if (dca.params.pool_size == 0) throw ConfigError("dca.pool_size must be > 0");
        if (!(dca.params.threshold_lo > 0.0 && dca.params.threshold_lo <= dca.params.threshold_hi))
            throw ConfigError("dca thresholds must satisfy 0 < threshold_lo <= threshold_hi");
        if (!(dca.anomaly_threshold >= 0.0 && dca.anomaly_threshold <= 1.0))
            throw ConfigError("dca.anomaly_threshold must be in [0, 1]");
        if (clonal.snapshot_every == 0) throw ConfigError("clonal.snapshot_every must be > 0");
        try {
            lifecycle.policy.validate();
            synth.validate();
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }

    void override_seed(std::uint64_t seed) {
        negsel.seed = seed;
        clonal.maturation.rng_seed = seed;
        dca.params.seed = seed;
        lifecycle.seed = seed;
        synth.seed = seed;
    }

    void set_threads(unsigned threads) {
        clonal.maturation.threads = threads;
        dca.params.threads = threads;
    }
};

inline nlohmann::json to_json(const EngineConfig& c) {
    const auto& m = c.clonal.maturation;
    const auto& w = c.dca.params.weights;
    const auto& p = c.lifecycle.policy;
    const auto& s = c.synth;
    return {
        {"mode", c.mode == Mode::SelfNonself ? "selfnonself" : "danger"},
        {"representation",
         {{"bits_per_feature", c.representation.bits_per_feature},
          {"lenient", c.representation.lenient},
          {"categorical", c.representation.categorical},
          {"id_column", c.representation.id_column},
          {"label_column", c.representation.label_column}}},
        {"negsel",
         {{"variant", std::string(to_string(c.negsel.variant))},
          {"radius", c.negsel.radius},
          {"self_radius", c.negsel.self_radius},
          {"target_count", c.negsel.target_count},
          {"target_coverage", c.negsel.target_coverage},
          {"stop_at_coverage", c.negsel.stop_at_coverage},
          {"seed", c.negsel.seed},
          {"max_attempts", c.negsel.max_attempts},
          {"max_detectors", c.negsel.max_detectors}}},
        {"clonal",
         {{"enabled", c.clonal.enabled},
          {"n_select", m.n_select},
          {"beta", m.beta},
          {"rho", m.rho},
          {"d_replace", m.d_replace},
          {"generations", m.generations},
          {"seed", m.rng_seed},
          {"fresh_radius", m.fresh_radius},
          {"fresh_attempts", m.fresh_attempts},
          {"snapshot_every", c.clonal.snapshot_every}}},
        {"dca",
         {{"pool_size", c.dca.params.pool_size},
          {"threshold_lo", c.dca.params.threshold_lo},
          {"threshold_hi", c.dca.params.threshold_hi},
          {"seed", c.dca.params.seed},
          {"anomaly_threshold", c.dca.anomaly_threshold},
          {"w_csm_pamp", w.csm_pamp},
          {"w_csm_danger", w.csm_danger},
          {"w_csm_safe", w.csm_safe},
          {"w_k_pamp", w.k_pamp},
          {"w_k_danger", w.k_danger},
          {"w_k_safe", w.k_safe},
          {"timestamp_column", c.dca.timestamp_column},
          {"pamp_column", c.dca.pamp_column},
          {"danger_column", c.dca.danger_column},
          {"safe_column", c.dca.safe_column},
          {"antigens_column", c.dca.antigens_column}}},
        {"lifecycle",
         {{"max_age", p.max_age},
          {"min_matches_by_age", p.min_matches_by_age},
          {"revalidation_interval", p.revalidation_interval},
          {"library_seed_fraction", p.library_seed_fraction},
          {"seed_mutation_scale", p.seed_mutation_scale},
          {"library_capacity", p.library_capacity},
          {"seed", c.lifecycle.seed}}},
        {"synth",
         {{"dims", s.dims},
          {"n_self_train", s.n_self_train},
          {"n_self_test", s.n_self_test},
          {"n_anomaly", s.n_anomaly},
          {"self_spread", s.self_spread},
          {"anomaly_spread", s.anomaly_spread},
          {"drift", s.drift},
          {"feature_scale", s.feature_scale},
          {"episode_length", s.episode_length},
          {"antigens_per_frame", s.antigens_per_frame},
          {"seed", s.seed}}},
    };
}

// Stamp for every artifact; thread count is not part of it.
inline std::string config_digest(const EngineConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

namespace detail {

class TableReader {
public:
    TableReader(const toml::Document& doc, const std::string& table) : table_(table) {
        const auto it = doc.find(table);
        if (it != doc.end()) values_ = &it->second;
    }

    // Rejects keys in the table that no read() asked for.
    void finish() const {
        if (!values_) return;
        for (const auto& [k, v] : *values_)
            if (!used_.count(k)) throw ConfigError("unknown config key '" + qualified(k) + "'");
    }

    template <typename T>
    void read(const char* key, T& out) {
        const toml::Scalar* s = scalar(key);
        if (!s) return;
        if constexpr (std::is_same_v<T, bool>) {
            if (!std::holds_alternative<bool>(*s)) type_error(key, "a boolean");
            out = std::get<bool>(*s);
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!std::holds_alternative<std::string>(*s)) type_error(key, "a string");
            out = std::get<std::string>(*s);
        } else if constexpr (std::is_floating_point_v<T>) {
            if (const auto* i = std::get_if<std::int64_t>(s)) out = static_cast<T>(*i);
            else if (const auto* d = std::get_if<double>(s)) out = static_cast<T>(*d);
            else type_error(key, "a number");
        } else {
            const auto* i = std::get_if<std::int64_t>(s);
            if (!i) type_error(key, "an integer");
            if (std::is_unsigned_v<T> && *i < 0) type_error(key, "a non-negative integer");
            out = static_cast<T>(*i);
        }
    }

    void read_strings(const char* key, std::vector<std::string>& out) {
        const toml::Value* v = find(key);
        if (!v) return;
        const auto* arr = std::get_if<std::vector<toml::Scalar>>(v);
        if (!arr) type_error(key, "an array of strings");
        out.clear();
        for (const auto& s : *arr) {
            if (!std::holds_alternative<std::string>(s)) type_error(key, "an array of strings");
            out.push_back(std::get<std::string>(s));
        }
    }

    std::optional<std::string> read_string(const char* key) {
        std::string s;
        if (!find(key)) return std::nullopt;
        read(key, s);
        return s;
    }

private:
    std::string qualified(const std::string& k) const { return table_.empty() ? k : table_ + "." + k; }

    const toml::Value* find(const char* key) {
        if (!values_) return nullptr;
        const auto it = values_->find(key);
        if (it == values_->end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }

    const toml::Scalar* scalar(const char* key) {
        const toml::Value* v = find(key);
        if (!v) return nullptr;
        const auto* s = std::get_if<toml::Scalar>(v);
        if (!s) type_error(key, "a scalar");
        return s;
    }

    [[noreturn]] void type_error(const char* key, const char* want) const {
        throw ConfigError("config key '" + qualified(key) + "' must be " + want);
    }

    std::string table_;
    const std::map<std::string, toml::Value>* values_ = nullptr;
    std::set<std::string> used_;
};

}  // namespace detail

inline EngineConfig config_from_toml(const toml::Document& doc) {
    static const std::set<std::string> known{"", "representation", "negsel", "clonal", "dca", "lifecycle", "synth"};
    for (const auto& [t, unused] : doc)
        if (!known.count(t)) throw ConfigError("unknown config table [" + t + "]");

    EngineConfig c;
    {
        detail::TableReader top(doc, "");
        if (auto m = top.read_string("mode")) {
            if (*m == "selfnonself") c.mode = Mode::SelfNonself;
            else if (*m == "danger") c.mode = Mode::Danger;
            else throw ConfigError("mode must be 'selfnonself' or 'danger'");
        }
        top.finish();
    }
    {
        detail::TableReader t(doc, "representation");
        t.read("bits_per_feature", c.representation.bits_per_feature);
        t.read("lenient", c.representation.lenient);
        t.read_strings("categorical", c.representation.categorical);
        t.read("id_column", c.representation.id_column);
        t.read("label_column", c.representation.label_column);
        t.finish();
    }
    {
        detail::TableReader t(doc, "negsel");
        if (auto v = t.read_string("variant")) {
            if (*v == "fixed") c.negsel.variant = Variant::Fixed;
            else if (*v == "vdetector") c.negsel.variant = Variant::VDetector;
            else throw ConfigError("negsel.variant must be 'fixed' or 'vdetector'");
        }
        t.read("radius", c.negsel.radius);
        t.read("self_radius", c.negsel.self_radius);
        t.read("target_count", c.negsel.target_count);
        t.read("target_coverage", c.negsel.target_coverage);
        t.read("stop_at_coverage", c.negsel.stop_at_coverage);
        t.read("seed", c.negsel.seed);
        t.read("max_attempts", c.negsel.max_attempts);
        t.read("max_detectors", c.negsel.max_detectors);
        t.finish();
    }
    {
        detail::TableReader t(doc, "clonal");
        auto& m = c.clonal.maturation;
        t.read("enabled", c.clonal.enabled);
        t.read("n_select", m.n_select);
        t.read("beta", m.beta);
        t.read("rho", m.rho);
        t.read("d_replace", m.d_replace);
        t.read("generations", m.generations);
        t.read("seed", m.rng_seed);
        t.read("fresh_radius", m.fresh_radius);
        t.read("fresh_attempts", m.fresh_attempts);
        t.read("snapshot_every", c.clonal.snapshot_every);
        t.finish();
    }
    {
        detail::TableReader t(doc, "dca");
        auto& p = c.dca.params;
        t.read("pool_size", p.pool_size);
        t.read("threshold_lo", p.threshold_lo);
        t.read("threshold_hi", p.threshold_hi);
        t.read("seed", p.seed);
        t.read("anomaly_threshold", c.dca.anomaly_threshold);
        t.read("w_csm_pamp", p.weights.csm_pamp);
        t.read("w_csm_danger", p.weights.csm_danger);
        t.read("w_csm_safe", p.weights.csm_safe);
        t.read("w_k_pamp", p.weights.k_pamp);
        t.read("w_k_danger", p.weights.k_danger);
        t.read("w_k_safe", p.weights.k_safe);
        t.read("timestamp_column", c.dca.timestamp_column);
        t.read("pamp_column", c.dca.pamp_column);
        t.read("danger_column", c.dca.danger_column);
        t.read("safe_column", c.dca.safe_column);
        t.read("antigens_column", c.dca.antigens_column);
        t.finish();
    }
    {
        detail::TableReader t(doc, "lifecycle");
        auto& p = c.lifecycle.policy;
        t.read("max_age", p.max_age);
        t.read("min_matches_by_age", p.min_matches_by_age);
        t.read("revalidation_interval", p.revalidation_interval);
        t.read("library_seed_fraction", p.library_seed_fraction);
        t.read("seed_mutation_scale", p.seed_mutation_scale);
        t.read("library_capacity", p.library_capacity);
        t.read("seed", c.lifecycle.seed);
        t.finish();
    }
    {
        detail::TableReader t(doc, "synth");
        auto& s = c.synth;
        t.read("dims", s.dims);
        t.read("n_self_train", s.n_self_train);
        t.read("n_self_test", s.n_self_test);
        t.read("n_anomaly", s.n_anomaly);
        t.read("self_spread", s.self_spread);
        t.read("anomaly_spread", s.anomaly_spread);
        t.read("drift", s.drift);
        t.read("feature_scale", s.feature_scale);
        t.read("episode_length", s.episode_length);
        t.read("antigens_per_frame", s.antigens_per_frame);
        t.read("seed", s.seed);
        t.finish();
    }
    c.validate();
    return c;
}

inline EngineConfig config_from_toml(std::string_view text) { return config_from_toml(toml::parse(text)); }

}  // namespace ais
