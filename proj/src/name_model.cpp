#include "blendopt/name_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "blendopt/errors.hpp"

namespace blendopt {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatTag = "blendopt-name-model";
constexpr int kFormatVersion = 1;

json parse_json(std::string_view bytes, const char* what) {
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ParseError(what, e.what());
    }
}

double number_at(const json& arr, std::size_t i, const std::string& where) {
    if (!arr[i].is_number()) throw ParseError(where, "expected a number");
    const double v = arr[i].get<double>();
    if (!std::isfinite(v)) throw ParseError(where, "non-finite value");
    return v;
}

std::uint64_t count_at(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) throw ParseError(where, "negative count");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d < 0.0 || d != std::floor(d)) throw ParseError(where, "count must be a non-negative integer");
        return static_cast<std::uint64_t>(d);
    }
    throw ParseError(where, "count must be a non-negative integer");
}

std::size_t index_at(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ParseError(where, "expected a non-negative index");
    return static_cast<std::size_t>(v.get<std::int64_t>());
}

}  // namespace

std::string_view to_string(SimilarityMeasure m) {
    switch (m) {
        case SimilarityMeasure::Name: return "name";
        case SimilarityMeasure::Color: return "color";
        case SimilarityMeasure::Luminance: return "luminance";
        case SimilarityMeasure::Hue: return "hue";
    }
    return "name";
}

SimilarityMeasure parse_similarity_measure(std::string_view text) {
    if (text == "name") return SimilarityMeasure::Name;
    if (text == "color") return SimilarityMeasure::Color;
    if (text == "luminance") return SimilarityMeasure::Luminance;
    if (text == "hue") return SimilarityMeasure::Hue;
    throw ParseError("similarity", "unknown measure '" + std::string(text) + "'");
}

struct NameModel::Memo {
    static constexpr std::size_t kShards = 16;
    struct Shard {
        std::mutex mutex;
        std::unordered_map<std::uint32_t, std::uint32_t> map;
    };
    std::array<Shard, kShards> shards;
};

NameModel::NameModel(std::vector<LabColor> bins, std::vector<std::string> terms,
                     const std::vector<CountEntry>& counts)
    : bins_(std::move(bins)), terms_(std::move(terms)), memo_(std::make_shared<Memo>()) {
    if (bins_.empty() || terms_.empty() || counts.empty()) {
        throw ValidationError("name model: empty count matrix");
    }
    dense_.assign(bins_.size() * terms_.size(), 0.0);
    for (const auto& e : counts) {
        if (e.bin >= bins_.size() || e.term >= terms_.size()) {
            throw ValidationError("name model: count entry (" + std::to_string(e.bin) + ", " +
                                  std::to_string(e.term) + ") out of range");
        }
        dense_[e.bin * terms_.size() + e.term] += static_cast<double>(e.count);
    }
    norms_.resize(bins_.size());
    for (std::size_t b = 0; b < bins_.size(); ++b) {
        double sq = 0.0;
        for (double v : row(b)) sq += v * v;
        if (sq == 0.0) {
            throw ValidationError("name model: bin " + std::to_string(b) + " has no counts");
        }
        norms_[b] = std::sqrt(sq);
    }
}

std::span<const double> NameModel::row(std::size_t bin) const {
    return {dense_.data() + bin * terms_.size(), terms_.size()};
}

std::size_t NameModel::nearest_bin(const LabColor& c) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        const double d = ciede2000(c, bins_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::size_t NameModel::bin_for(Srgb8 c) const {
    const std::uint32_t key = c.packed();
    auto& shard = memo_->shards[key % Memo::kShards];
    {
        std::lock_guard lock(shard.mutex);
        if (auto it = shard.map.find(key); it != shard.map.end()) return it->second;
    }
    const auto bin = static_cast<std::uint32_t>(nearest_bin(srgb_to_lab(c)));
    std::lock_guard lock(shard.mutex);
    shard.map.emplace(key, bin);
    return bin;
}

double NameModel::bin_cosine(std::size_t b1, std::size_t b2) const {
    if (b1 == b2) return 1.0;
    const auto r1 = row(b1);
    const auto r2 = row(b2);
    double dot = 0.0;
    for (std::size_t t = 0; t < r1.size(); ++t) dot += r1[t] * r2[t];
    return std::clamp(dot / (norms_[b1] * norms_[b2]), 0.0, 1.0);
}

std::vector<CountEntry> NameModel::sparse_counts() const {
    std::vector<CountEntry> out;
    for (std::size_t b = 0; b < bins_.size(); ++b) {
        const auto r = row(b);
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (r[t] != 0.0) out.push_back({b, t, static_cast<std::uint64_t>(r[t])});
        }
    }
    return out;
}

NameModel load_name_model(std::string_view bytes) {
    const json doc = parse_json(bytes, "name model");
    if (!doc.is_object()) throw ParseError("name model", "expected an object");
    if (doc.contains("format") && doc["format"] != kFormatTag) {
        throw ParseError("format", "unexpected format tag");
    }
    if (doc.contains("version") && doc["version"] != kFormatVersion) {
        throw ParseError("version", "unsupported version");
    }
    for (const char* key : {"bins", "terms", "counts"}) {
        if (!doc.contains(key)) throw ParseError(key, "missing section");
        if (!doc[key].is_array()) throw ParseError(key, "expected an array");
    }

    const json& flat = doc["bins"];
    if (flat.size() % 3 != 0) throw ParseError("bins", "length is not a multiple of 3");
    std::vector<LabColor> bins;
    bins.reserve(flat.size() / 3);
    for (std::size_t i = 0; i < flat.size(); i += 3) {
        const std::string where = "bins[" + std::to_string(i / 3) + "]";
        bins.push_back({number_at(flat, i, where), number_at(flat, i + 1, where),
                        number_at(flat, i + 2, where)});
    }

    std::vector<std::string> terms;
    for (std::size_t i = 0; i < doc["terms"].size(); ++i) {
        const json& t = doc["terms"][i];
        if (!t.is_string()) throw ParseError("terms[" + std::to_string(i) + "]", "expected a string");
        terms.push_back(t.get<std::string>());
    }

    std::vector<CountEntry> counts;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t i = 0; i < doc["counts"].size(); ++i) {
        const std::string where = "counts[" + std::to_string(i) + "]";
        const json& rec = doc["counts"][i];
        if (!rec.is_array() || rec.size() != 3) throw ParseError(where, "expected [bin, term, count]");
        CountEntry e{index_at(rec[0], where), index_at(rec[1], where), count_at(rec[2], where)};
        if (e.bin >= bins.size()) throw ParseError(where, "bin index out of range");
        if (e.term >= terms.size()) throw ParseError(where, "term index out of range");
        if (!seen.emplace(e.bin, e.term).second) throw ParseError(where, "duplicate (bin, term) entry");
        counts.push_back(e);
    }
    return NameModel(std::move(bins), std::move(terms), counts);
}

std::string dump_name_model(const NameModel& model) {
    json flat = json::array();
    for (const auto& b : model.bins()) {
        flat.push_back(b.L);
        flat.push_back(b.a);
        flat.push_back(b.b);
    }
    json counts = json::array();
    for (const auto& e : model.sparse_counts()) counts.push_back({e.bin, e.term, e.count});
    json doc{{"format", kFormatTag},
             {"version", kFormatVersion},
             {"bins", std::move(flat)},
             {"terms", model.terms()},
             {"counts", std::move(counts)}};
    return doc.dump();
}

std::string convert_survey_export(std::string_view bytes) {
    const json doc = parse_json(bytes, "survey export");
    for (const char* key : {"color", "terms", "T"}) {
        if (!doc.contains(key) || !doc[key].is_array()) throw ParseError(key, "missing or not an array");
    }
    const json& color = doc["color"];
    if (color.size() % 3 != 0) throw ParseError("color", "length is not a multiple of 3");
    const std::size_t n_colors = color.size() / 3;
    const std::size_t n_terms = doc["terms"].size();
    if (n_terms == 0) throw ValidationError("survey export: no terms");

    const json& t = doc["T"];
    if (t.size() % 2 != 0) throw ParseError("T", "length is not a multiple of 2");
    std::vector<std::vector<std::pair<std::size_t, std::uint64_t>>> rows(n_colors);
    for (std::size_t i = 0; i < t.size(); i += 2) {
        const std::string where = "T[" + std::to_string(i) + "]";
        const std::size_t key = index_at(t[i], where);
        const std::uint64_t cnt = count_at(t[i + 1], where);
        if (key >= n_colors * n_terms) throw ParseError(where, "index out of range");
        if (cnt > 0) rows[key / n_terms].emplace_back(key % n_terms, cnt);
    }

    json bins = json::array();
    json counts = json::array();
    std::size_t out_bin = 0;
    for (std::size_t c = 0; c < n_colors; ++c) {
        if (rows[c].empty()) continue;
        const std::string where = "color[" + std::to_string(c) + "]";
        bins.push_back(number_at(color, 3 * c, where));
        bins.push_back(number_at(color, 3 * c + 1, where));
        bins.push_back(number_at(color, 3 * c + 2, where));
        std::sort(rows[c].begin(), rows[c].end());
        for (const auto& [term, cnt] : rows[c]) counts.push_back({out_bin, term, cnt});
        ++out_bin;
    }
    json out{{"format", kFormatTag},
             {"version", kFormatVersion},
             {"bins", std::move(bins)},
             {"terms", doc["terms"]},
             {"counts", std::move(counts)}};
    // Round-trip through the loader so a bad export fails here, not later.
    const std::string text = out.dump();
    (void)load_name_model(text);
    return text;
}

std::vector<double> name_vector(const NameModel& model, const LabColor& c) {
    const auto r = model.row(model.nearest_bin(c));
    return {r.begin(), r.end()};
}

double name_similarity(const NameModel& model, const LabColor& c1, const LabColor& c2) {
    return model.bin_cosine(model.nearest_bin(c1), model.nearest_bin(c2));
}

double alt_similarity(SimilarityMeasure kind, const LabColor& c1, const LabColor& c2) {
    switch (kind) {
        case SimilarityMeasure::Color:
            return std::clamp(1.0 - ciede2000(c1, c2) / 100.0, 0.0, 1.0);
        case SimilarityMeasure::Luminance:
            return std::clamp(1.0 - 0.01 * luminance_diff(c1, c2), 0.0, 1.0);
        case SimilarityMeasure::Hue: {
            double dh = std::abs(lch_hue(c1) - lch_hue(c2));
            if (dh > 180.0) dh = 360.0 - dh;
            return std::clamp(1.0 - dh / 180.0, 0.0, 1.0);
        }
        case SimilarityMeasure::Name: break;
    }
    throw ContractViolation("alt_similarity: the name measure needs a name model");
}

double similarity(const NameModel& model, SimilarityMeasure kind, const LabColor& c1,
                  const LabColor& c2) {
    if (kind == SimilarityMeasure::Name) return name_similarity(model, c1, c2);
    return alt_similarity(kind, c1, c2);
}

}  // namespace blendopt
