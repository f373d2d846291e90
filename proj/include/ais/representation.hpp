#pragma once

// Antigen encoding: schema fitting over raw feature records, min-max
// normalization with clamping, one-hot categorical expansion, bit-string
// quantization and the affinity measures used by the detection modules.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "ais/error.hpp"

namespace ais {

// One raw observation: ordered (name, value) text fields plus an identity tag.
struct RawRecord {
    std::string id;
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* find(std::string_view name) const {
        for (const auto& [k, v] : fields)
            if (k == name) return &v;
        return nullptr;
    }
};

enum class FeatureKind { Continuous, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    double min = 0.0;
    double max = 0.0;
    bool constant = false;                 // continuous with min == max
    std::vector<std::string> vocabulary;   // categorical, sorted lexicographically

    std::size_t width() const { return kind == FeatureKind::Continuous ? 1 : vocabulary.size(); }
};

struct FeatureSchema {
    std::vector<FeatureSpec> features;

    std::size_t dimension() const {
        std::size_t d = 0;
        for (const auto& f : features) d += f.width();
        return d;
    }

    const FeatureSpec* find(std::string_view name) const {
        for (const auto& f : features)
            if (f.name == name) return &f;
        return nullptr;
    }

    // Throws SchemaError if any type invariant is broken.
    void validate() const {
        std::set<std::string_view> seen;
        for (const auto& f : features) {
            if (f.name.empty()) throw SchemaError("feature name is empty");
            if (!seen.insert(f.name).second)
                throw SchemaError("duplicate feature name '" + f.name + "'");
            if (f.kind == FeatureKind::Continuous) {
                if (!(f.min <= f.max))
                    throw SchemaError("feature '" + f.name + "' has min > max");
            } else {
                if (f.vocabulary.empty())
                    throw SchemaError("categorical feature '" + f.name + "' has an empty vocabulary");
                if (!std::is_sorted(f.vocabulary.begin(), f.vocabulary.end()) ||
                    std::adjacent_find(f.vocabulary.begin(), f.vocabulary.end()) != f.vocabulary.end())
                    throw SchemaError("vocabulary of '" + f.name + "' is not sorted and unique");
            }
        }
    }
};

class BitString {
public:
    BitString() = default;
    explicit BitString(std::vector<bool> bits) : bits_(std::move(bits)) {}

    static BitString parse(std::string_view text) {
        std::vector<bool> bits;
        bits.reserve(text.size());
        for (char c : text) {
            if (c != '0' && c != '1') throw AffinityError("bit-string may only contain '0' and '1'");
            bits.push_back(c == '1');
        }
        return BitString(std::move(bits));
    }

    std::string str() const {
        std::string s;
        s.reserve(bits_.size());
        for (bool b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    std::size_t size() const { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i]; }
    void push_back(bool b) { bits_.push_back(b); }

    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::vector<bool> bits_;
};

struct Antigen {
    std::string id;
    std::vector<double> vector;
    std::optional<BitString> bits;
};

inline std::optional<double> parse_number(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Fits bounds and vocabularies. A column is continuous when every value parses
// as a finite number, unless it is named in `force_categorical`. Schema order
// follows the field order of the first record.
inline FeatureSchema fit_schema(std::span<const RawRecord> records,
                                const std::set<std::string>& force_categorical = {}) {
    if (records.empty()) throw SchemaError("cannot fit a schema to zero records");

    const auto& first = records.front().fields;
    std::set<std::string> names;
    for (const auto& [k, v] : first) {
        if (k.empty()) throw SchemaError("feature name is empty");
        if (!names.insert(k).second) throw SchemaError("duplicate feature name '" + k + "'");
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& fs = records[i].fields;
        bool same = fs.size() == first.size();
        for (std::size_t j = 0; same && j < fs.size(); ++j) same = names.count(fs[j].first) == 1;
        if (!same)
            throw SchemaError("record " + std::to_string(i) + " has a different field set than record 0");
    }

    FeatureSchema schema;
    for (const auto& [name, unused] : first) {
        FeatureSpec spec;
        spec.name = name;
        bool numeric = force_categorical.count(name) == 0;
        std::set<std::string> vocab;
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (const auto& r : records) {
            const std::string& raw = *r.find(name);
            vocab.insert(raw);
            if (!numeric) continue;
            auto v = parse_number(raw);
            if (!v) {
                numeric = false;
                continue;
            }
            if (!any) {
                lo = hi = *v;
                any = true;
            } else {
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
        }
        if (numeric) {
            spec.kind = FeatureKind::Continuous;
            spec.min = lo;
            spec.max = hi;
            spec.constant = lo == hi;
        } else {
            spec.kind = FeatureKind::Categorical;
            spec.vocabulary.assign(vocab.begin(), vocab.end());
        }
        schema.features.push_back(std::move(spec));
    }
    return schema;
}

enum class UnknownCategory { Throw, ZeroOneHot };

inline double normalize_value(double v, const FeatureSpec& f) {
    if (f.constant || f.max == f.min) return 0.0;
    return std::clamp((v - f.min) / (f.max - f.min), 0.0, 1.0);
}

// Under UnknownCategory::ZeroOneHot an unseen category encodes as all zeros and
// a description is appended to `warnings` when provided.
inline Antigen encode(const RawRecord& record, const FeatureSchema& schema,
                      UnknownCategory policy = UnknownCategory::Throw,
                      std::vector<std::string>* warnings = nullptr) {
    Antigen a;
    a.id = record.id;
    a.vector.reserve(schema.dimension());
    for (const auto& f : schema.features) {
        const std::string* raw = record.find(f.name);
        if (!raw) throw EncodeError(f.name, "", "record is missing a schema feature");
        if (f.kind == FeatureKind::Continuous) {
            auto v = parse_number(*raw);
            if (!v) throw EncodeError(f.name, *raw, "value is not a finite number");
            a.vector.push_back(normalize_value(*v, f));
            continue;
        }
        auto it = std::lower_bound(f.vocabulary.begin(), f.vocabulary.end(), *raw);
        const bool known = it != f.vocabulary.end() && *it == *raw;
        if (!known) {
            if (policy == UnknownCategory::Throw) throw EncodeError(f.name, *raw, "unknown category");
            if (warnings)
                warnings->push_back("record '" + record.id + "': unknown category '" + *raw +
                                    "' for feature '" + f.name + "' encoded as all zeros");
        }
        const auto hot = static_cast<std::size_t>(it - f.vocabulary.begin());
        for (std::size_t j = 0; j < f.vocabulary.size(); ++j)
            a.vector.push_back(known && j == hot ? 1.0 : 0.0);
    }
    return a;
}

// Maps a normalized antigen back to raw text values (inverse of encode for
// in-range values; categorical features take the hottest position).
inline RawRecord decode(const Antigen& antigen, const FeatureSchema& schema) {
    if (antigen.vector.size() != schema.dimension())
        throw DimensionError("antigen dimension does not match schema");
    RawRecord r;
    r.id = antigen.id;
    std::size_t pos = 0;
    for (const auto& f : schema.features) {
        if (f.kind == FeatureKind::Continuous) {
            const double v = f.min + antigen.vector[pos++] * (f.max - f.min);
            char buf[40];
            auto res = std::to_chars(buf, buf + sizeof buf, v);
            r.fields.emplace_back(f.name, std::string(buf, res.ptr));
        } else {
            std::size_t best = 0;
            for (std::size_t j = 1; j < f.vocabulary.size(); ++j)
                if (antigen.vector[pos + j] > antigen.vector[pos + best]) best = j;
            r.fields.emplace_back(f.name, f.vocabulary[best]);
            pos += f.vocabulary.size();
        }
    }
    return r;
}

// Quantizes each component to round-half-up(v * (2^b - 1)) and writes it as b
// big-endian bits, in vector order.
inline BitString to_bits(std::span<const double> vector, unsigned bits_per_feature) {
    if (bits_per_feature == 0 || bits_per_feature > 32)
        throw AffinityError("bits_per_feature must be in [1, 32]");
    const double levels = std::ldexp(1.0, static_cast<int>(bits_per_feature)) - 1.0;
    BitString out;
    for (double v : vector) {
        const auto q = static_cast<std::uint64_t>(std::floor(std::clamp(v, 0.0, 1.0) * levels + 0.5));
        for (unsigned b = bits_per_feature; b-- > 0;) out.push_back(((q >> b) & 1u) != 0);
    }
    return out;
}

inline BitString to_bits(const Antigen& antigen, unsigned bits_per_feature) {
    return to_bits(std::span<const double>(antigen.vector), bits_per_feature);
}

// --- affinity -------------------------------------------------------------

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw AffinityError("euclidean affinity on vectors of length " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline std::size_t hamming(const BitString& a, const BitString& b) {
    if (a.size() != b.size()) throw AffinityError("hamming affinity on bit-strings of unequal length");
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
    return n;
}

// True iff some run of at least r consecutive positions agrees bitwise.
inline bool r_contiguous(const BitString& a, const BitString& b, std::size_t r) {
    if (a.size() != b.size()) throw AffinityError("r-contiguous affinity on bit-strings of unequal length");
    if (r == 0 || r > a.size())
        throw AffinityError("r-contiguous window must satisfy 1 <= r <= " + std::to_string(a.size()));
    std::size_t run = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        run = a[i] == b[i] ? run + 1 : 0;
        if (run >= r) return true;
    }
    return false;
}

struct AffinityMeasure {
    enum class Kind { Euclidean, Hamming, RContiguous };
    Kind kind = Kind::Euclidean;
    std::size_t r = 1;
};

using AffinityValue = std::variant<double, bool>;

inline AffinityValue affinity(std::span<const double> a, std::span<const double> b,
                              const AffinityMeasure& m) {
    if (m.kind != AffinityMeasure::Kind::Euclidean)
        throw AffinityError("hamming and r-contiguous apply only to bit-strings");
    return euclidean(a, b);
}

inline AffinityValue affinity(const BitString& a, const BitString& b, const AffinityMeasure& m) {
    switch (m.kind) {
        case AffinityMeasure::Kind::Hamming:
            return static_cast<double>(hamming(a, b));
        case AffinityMeasure::Kind::RContiguous:
            return r_contiguous(a, b, m.r);
        case AffinityMeasure::Kind::Euclidean:
            break;
    }
    throw AffinityError("euclidean applies only to real vectors");
}

}  // namespace ais
