#include "blendopt/io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "blendopt/errors.hpp"
#include "blendopt/png_io.hpp"

namespace blendopt::io {
namespace {

std::string field(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : where + "." + std::string(key);
}

std::string item(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

void expect_object(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where, "expected an object");
}

const Json& require(const Json& j, std::string_view key, const std::string& where) {
    expect_object(j, where);
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(field(where, key), "missing field");
    return *it;
}

const Json* optional_field(const Json& j, std::string_view key) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

const Json& expect_array(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where, "expected an array");
    return j;
}

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(where, "non-finite value");
    return v;
}

std::uint64_t unsigned_integer(const Json& j, const std::string& where) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw ParseError(where, "expected a non-negative integer");
}

std::string text(const Json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where, "expected a string");
    return j.get<std::string>();
}

Srgb8 color(const Json& j, const std::string& where) {
    const auto c = parse_hex(text(j, where));
    if (!c) throw ParseError(where, "expected a #rrggbb color");
    return *c;
}

std::vector<double> numbers(const Json& j, const std::string& where) {
    expect_array(j, where);
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], item(where, i)));
    return out;
}

void check_format(const Json& j, std::string_view expected, const std::string& where) {
    const std::string got = text(require(j, "format", where), field(where, "format"));
    if (got != expected) {
        throw ParseError(field(where, "format"), "expected \"" + std::string(expected) + "\", got \"" + got + "\"");
    }
    if (const Json* v = optional_field(j, "version")) {
        if (unsigned_integer(*v, field(where, "version")) != 1) {
            throw ParseError(field(where, "version"), "unsupported version");
        }
    }
}

// Validation failures inside the scene builders carry no field path; attach
// the document path so callers can still point at the input.
template <typename F>
auto with_where(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ParseError(where, e.what());
    }
}

template <typename Enum, typename Parse>
Enum enum_field(const Json& j, const std::string& where, Parse parse) {
    const std::string s = text(j, where);
    try {
        return parse(s);
    } catch (const ParseError& e) {
        throw ParseError(where, "unknown value \"" + s + "\"");
    }
}

Json lab_json(const LabColor& c) { return Json::array({c.L, c.a, c.b}); }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Json parse_json(std::string_view bytes, const std::string& where) {
    try {
        return Json::parse(bytes);
    } catch (const Json::parse_error& e) {
        throw ParseError(where, std::string("invalid JSON: ") + e.what());
    }
}

HistogramSpec histogram_from_json(const Json& j, const std::string& where) {
    check_format(j, kHistogramFormat, where);
    HistogramSpec spec;
    if (const Json* bg = optional_field(j, "background")) spec.background = color(*bg, field(where, "background"));
    spec.bin_edges = numbers(require(j, "bin_edges", where), field(where, "bin_edges"));
    const std::string cw = field(where, "classes");
    const Json& classes = expect_array(require(j, "classes", where), cw);
    if (classes.empty()) throw ParseError(cw, "at least one class is required");
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const std::string at = item(cw, c);
        const Json& cls = classes[c];
        std::string label = std::string(1, static_cast<char>('A' + c % 26));
        if (const Json* l = optional_field(cls, "label")) label = text(*l, field(at, "label"));
        const std::string hw = field(at, "heights");
        std::vector<double> h = numbers(require(cls, "heights", at), hw);
        if (h.size() + 1 != spec.bin_edges.size()) throw ParseError(hw, "expected one height per bin");
        for (std::size_t b = 0; b < h.size(); ++b) {
            if (h[b] < 0.0) throw ParseError(item(hw, b), "height must be non-negative");
        }
        spec.class_labels.push_back(std::move(label));
        spec.heights.push_back(std::move(h));
    }
    return spec;
}

Json histogram_to_json(const HistogramSpec& spec) {
    Json classes = Json::array();
    for (std::size_t c = 0; c < spec.heights.size(); ++c) {
        classes.push_back({{"label", c < spec.class_labels.size() ? spec.class_labels[c] : std::string()},
                           {"heights", spec.heights[c]}});
    }
    return {{"format", kHistogramFormat},
            {"version", 1},
            {"background", to_hex(spec.background)},
            {"bin_edges", spec.bin_edges},
            {"classes", classes}};
}

LayerMaskSet mask_manifest_from_json(const Json& j, const std::filesystem::path& base_dir, MaskOptions* options,
                                     const std::string& where) {
    check_format(j, kMaskManifestFormat, where);
    LayerMaskSet set;
    if (const Json* bg = optional_field(j, "background")) set.background = color(*bg, field(where, "background"));
    if (const Json* f = optional_field(j, "min_region_fraction"); f && options) {
        options->min_region_fraction = number(*f, field(where, "min_region_fraction"));
    }
    const std::string lw = field(where, "layers");
    const Json& layers = expect_array(require(j, "layers", where), lw);
    if (layers.empty()) throw ParseError(lw, "at least one layer is required");
    for (std::size_t c = 0; c < layers.size(); ++c) {
        const std::string at = item(lw, c);
        const std::string file = text(require(layers[c], "file", at), field(at, "file"));
        std::string label = std::string(1, static_cast<char>('A' + c % 26));
        if (const Json* l = optional_field(layers[c], "label")) label = text(*l, field(at, "label"));
        Image8 img;
        try {
            img = read_png_gray((base_dir / file).string());
        } catch (const std::runtime_error& e) {
            throw ParseError(field(at, "file"), e.what());
        }
        if (c == 0) {
            set.width = img.width;
            set.height = img.height;
        } else if (img.width != set.width || img.height != set.height) {
            throw ParseError(field(at, "file"), "mask dimensions differ from the first layer");
        }
        std::vector<std::uint8_t> mask(img.pixels.size());
        for (std::size_t p = 0; p < mask.size(); ++p) mask[p] = img.pixels[p] >= 128 ? 1 : 0;
        set.masks.push_back(std::move(mask));
        set.class_labels.push_back(std::move(label));
    }
    return set;
}

SceneStructure scene_from_json(const Json& j, const std::filesystem::path& base_dir, const std::string& where) {
    const std::string format = text(require(j, "format", where), field(where, "format"));
    if (format == kHistogramFormat) {
        const HistogramSpec spec = histogram_from_json(j, where);
        return with_where(where, [&] { return scene_from_histograms(spec); });
    }
    if (format == kMaskManifestFormat) {
        MaskOptions options;
        const LayerMaskSet set = mask_manifest_from_json(j, base_dir, &options, where);
        return with_where(where, [&] { return scene_from_masks(set, options); });
    }
    throw ParseError(field(where, "format"), "unknown scene format \"" + format + "\"");
}

SceneStructure load_scene_file(const std::filesystem::path& path) {
    const Json j = parse_json(read_file(path), path.filename().string());
    return scene_from_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

Json scene_to_json(const SceneStructure& scene) {
    Json regions = Json::array();
    for (const auto& r : scene.regions) {
        Json labels = Json::array();
        for (std::size_t k : r.signature) labels.push_back(scene.class_labels.at(k));
        regions.push_back({{"id", r.id}, {"signature", r.signature}, {"classes", labels}, {"size", r.size}});
    }
    Json membership = Json::array();
    Json share = Json::array();
    for (std::size_t i = 0; i < scene.region_count(); ++i) {
        Json mrow = Json::array();
        for (std::size_t k = 0; k < scene.class_count; ++k) mrow.push_back(int{scene.membership(i, k)});
        membership.push_back(mrow);
        Json wrow = Json::array();
        for (std::size_t k = 0; k < scene.region_count(); ++k) wrow.push_back(scene.pair_share(i, k));
        share.push_back(wrow);
    }
    return {{"classes", scene.class_labels}, {"background", to_hex(scene.background)},
            {"regions", regions},            {"membership", membership},
            {"pair_share", share},           {"adjacency", scene.adjacency},
            {"warnings", scene.warnings}};
}

ObjectiveConfig config_from_json(const Json& j, const std::string& where) {
    ObjectiveConfig cfg;
    if (j.is_null()) return cfg;
    expect_object(j, where);
    if (const Json* w = optional_field(j, "weights")) {
        const std::string ww = field(where, "weights");
        const auto v = numbers(*w, ww);
        if (v.size() != 3) throw ParseError(ww, "expected three weights");
        for (std::size_t i = 0; i < 3; ++i) {
            if (v[i] < 0.0) throw ParseError(item(ww, i), "weight must be non-negative");
        }
        cfg.w_wa = v[0];
        cfg.w_bd = v[1];
        cfg.w_cs = v[2];
    }
    if (const Json* v = optional_field(j, "jnd_threshold")) {
        cfg.jnd_threshold = number(*v, field(where, "jnd_threshold"));
        if (cfg.jnd_threshold < 0.0) throw ParseError(field(where, "jnd_threshold"), "must be non-negative");
    }
    if (const Json* v = optional_field(j, "bg_contrast")) {
        cfg.bg_contrast = number(*v, field(where, "bg_contrast"));
        if (cfg.bg_contrast < 0.0) throw ParseError(field(where, "bg_contrast"), "must be non-negative");
    }
    if (const Json* v = optional_field(j, "similarity")) {
        cfg.similarity = enum_field<SimilarityMeasure>(*v, field(where, "similarity"), parse_similarity_measure);
    }
    if (const Json* v = optional_field(j, "separability_scale")) {
        cfg.separability_scale =
            enum_field<SeparabilityScale>(*v, field(where, "separability_scale"), parse_separability_scale);
    }
    if (const Json* v = optional_field(j, "blend_space")) {
        cfg.blend_space = enum_field<BlendSpace>(*v, field(where, "blend_space"), parse_blend_space);
    }
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        throw ParseError(where, e.what());
    }
    return cfg;
}

Json config_to_json(const ObjectiveConfig& cfg) {
    return {{"weights", {cfg.w_wa, cfg.w_bd, cfg.w_cs}},
            {"jnd_threshold", cfg.jnd_threshold},
            {"bg_contrast", cfg.bg_contrast},
            {"similarity", to_string(cfg.similarity)},
            {"separability_scale", to_string(cfg.separability_scale)},
            {"blend_space", to_string(cfg.blend_space)}};
}

AnnealSchedule schedule_from_json(const Json& j, const std::string& where) {
    AnnealSchedule s;
    if (j.is_null()) return s;
    expect_object(j, where);
    const auto num = [&](std::string_view key, double& dst) {
        if (const Json* v = optional_field(j, key)) dst = number(*v, field(where, key));
    };
    const auto integer = [&](std::string_view key, int& dst) {
        if (const Json* v = optional_field(j, key)) {
            const std::uint64_t u = unsigned_integer(*v, field(where, key));
            if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
                throw ParseError(field(where, key), "value too large");
            }
            dst = static_cast<int>(u);
        }
    };
    num("t_start", s.t_start);
    num("t_end", s.t_end);
    num("gamma", s.gamma);
    integer("rgb_step", s.rgb_step);
    num("alpha_step", s.alpha_step);
    num("alpha_min", s.alpha_min);
    num("alpha_max", s.alpha_max);
    integer("max_candidate_retries", s.max_candidate_retries);
    if (const Json* v = optional_field(j, "seed")) s.seed = unsigned_integer(*v, field(where, "seed"));
    if (const Json* d = optional_field(j, "discrete")) {
        const std::string dw = field(where, "discrete");
        DiscreteMoveSet set;
        const std::string aw = field(dw, "color_anchors");
        const Json& anchors = expect_array(require(*d, "color_anchors", dw), aw);
        for (std::size_t c = 0; c < anchors.size(); ++c) {
            const Json& list = expect_array(anchors[c], item(aw, c));
            std::vector<Srgb8> row;
            for (std::size_t k = 0; k < list.size(); ++k) row.push_back(color(list[k], item(item(aw, c), k)));
            set.color_anchors.push_back(std::move(row));
        }
        set.opacity_levels = numbers(require(*d, "opacity_levels", dw), field(dw, "opacity_levels"));
        s.discrete = std::move(set);
    }
    try {
        s.validate();
    } catch (const ValidationError& e) {
        throw ParseError(where, e.what());
    }
    return s;
}

Json schedule_to_json(const AnnealSchedule& s) {
    Json j = {{"t_start", s.t_start},
              {"t_end", s.t_end},
              {"gamma", s.gamma},
              {"rgb_step", s.rgb_step},
              {"alpha_step", s.alpha_step},
              {"alpha_min", s.alpha_min},
              {"alpha_max", s.alpha_max},
              {"max_candidate_retries", s.max_candidate_retries},
              {"iterations", s.iteration_count()}};
    if (s.discrete) {
        Json anchors = Json::array();
        for (const auto& row : s.discrete->color_anchors) {
            Json hex = Json::array();
            for (const Srgb8& c : row) hex.push_back(to_hex(c));
            anchors.push_back(hex);
        }
        j["discrete"] = {{"color_anchors", anchors}, {"opacity_levels", s.discrete->opacity_levels}};
    }
    return j;
}

PaletteOptions palette_options_from_json(const Json& j, std::size_t class_count, const std::string& where) {
    PaletteOptions p;
    if (j.is_null()) return p;
    expect_object(j, where);
    if (const Json* f = optional_field(j, "fixed")) {
        const std::string fw = field(where, "fixed");
        expect_array(*f, fw);
        if (f->size() != class_count) throw ParseError(fw, "expected one entry per class");
        for (std::size_t c = 0; c < f->size(); ++c) {
            if ((*f)[c].is_null()) {
                p.locked.emplace_back();
            } else {
                p.locked.emplace_back(color((*f)[c], item(fw, c)));
            }
        }
    }
    if (const Json* init = optional_field(j, "initial")) {
        const std::string iw = field(where, "initial");
        expect_array(*init, iw);
        if (init->size() != class_count) throw ParseError(iw, "expected one entry per class");
        for (std::size_t c = 0; c < init->size(); ++c) p.initial.push_back(color((*init)[c], item(iw, c)));
    }
    return p;
}

Solution solution_from_json(const Json& j, std::size_t class_count, const std::string& where) {
    Solution sol;
    const std::string pw = field(where, "palette");
    const Json& palette = expect_array(require(j, "palette", where), pw);
    if (palette.size() != class_count) throw ParseError(pw, "expected one color per class");
    for (std::size_t c = 0; c < palette.size(); ++c) sol.palette.push_back(color(palette[c], item(pw, c)));

    const std::string ow = field(where, "opacities");
    sol.opacities = numbers(require(j, "opacities", where), ow);
    if (sol.opacities.size() != class_count) throw ParseError(ow, "expected one opacity per class");
    for (std::size_t c = 0; c < class_count; ++c) {
        if (sol.opacities[c] <= 0.0 || sol.opacities[c] > 1.0) throw ParseError(item(ow, c), "opacity must be in (0, 1]");
    }

    const std::string rw = field(where, "order");
    const Json& order = expect_array(require(j, "order", where), rw);
    if (order.size() != class_count) throw ParseError(rw, "expected one entry per class");
    std::vector<std::size_t> pos;
    for (std::size_t k = 0; k < order.size(); ++k) pos.push_back(unsigned_integer(order[k], item(rw, k)));
    try {
        sol.order = RenderOrder(std::move(pos));
    } catch (const ContractViolation& e) {
        throw ParseError(rw, "order must be a permutation of class indices");
    }
    return sol;
}

Json solution_to_json(const Solution& sol) {
    Json palette = Json::array();
    for (const Srgb8& c : sol.palette) palette.push_back(to_hex(c));
    return {{"palette", palette}, {"opacities", sol.opacities}, {"order", sol.order.positions()}};
}

Json breakdown_to_json(const SceneStructure& scene, const ScoreBreakdown& b, const ObjectiveConfig& cfg) {
    Json colors = Json::array();
    for (std::size_t i = 0; i < b.region_colors.size(); ++i) {
        const auto& rc = b.region_colors[i];
        Json labels = Json::array();
        for (std::size_t k : scene.regions.at(i).signature) labels.push_back(scene.class_labels.at(k));
        colors.push_back({{"region", i}, {"classes", labels}, {"hex", to_hex(rc.srgb)}, {"lab", lab_json(rc.lab)}});
    }
    Json violations = Json::array();
    for (const auto& v : b.violations) {
        Json e = {{"kind", v.kind == ConstraintViolation::Kind::Jnd ? "jnd" : "background"},
                  {"region", v.i},
                  {"value", v.value}};
        if (v.kind == ConstraintViolation::Kind::Jnd) e["other_region"] = v.j;
        violations.push_back(e);
    }
    const std::array<std::pair<const char*, double>, 3> terms{
        {{"e_wa", cfg.w_wa * b.e_wa}, {"e_bd", -cfg.w_bd * b.e_bd}, {"e_cs", cfg.w_cs * b.e_cs}}};
    Json contributions = Json::object();
    Json excluded = Json::array();
    const std::array<double, 3> weights{cfg.w_wa, cfg.w_bd, cfg.w_cs};
    for (std::size_t t = 0; t < terms.size(); ++t) {
        contributions[terms[t].first] = terms[t].second;
        if (weights[t] == 0.0) excluded.push_back(terms[t].first);
    }
    return {{"e_wa", b.e_wa},
            {"e_bd", b.e_bd},
            {"e_cs", b.e_cs},
            {"total", b.total},
            {"contributions", contributions},
            {"excluded", excluded},
            {"constraints_ok", b.constraints_ok},
            {"region_colors", colors},
            {"violations", violations},
            {"notes", b.notes}};
}

StimulusParams stimulus_params_from_json(const Json& j, const std::string& where) {
    StimulusParams p;
    expect_object(j, where);
    if (const Json* v = optional_field(j, "classes")) p.classes = unsigned_integer(*v, field(where, "classes"));
    if (const Json* v = optional_field(j, "smoothness")) {
        p.smoothness = enum_field<Smoothness>(*v, field(where, "smoothness"), parse_smoothness);
    }
    if (const Json* v = optional_field(j, "bins")) p.bins = unsigned_integer(*v, field(where, "bins"));
    if (const Json* v = optional_field(j, "seed")) p.seed = unsigned_integer(*v, field(where, "seed"));
    if (p.classes < 2 || p.classes > 4) throw ParseError(field(where, "classes"), "must be 2, 3 or 4");
    if (p.bins < 3 || p.bins > 10000) throw ParseError(field(where, "bins"), "must be in [3, 10000]");
    return p;
}

std::string write_solution_document(const SceneStructure& scene, const Solution& sol, const ScoreBreakdown& b,
                                    const ObjectiveConfig& cfg, const AnnealSchedule& schedule, std::uint64_t seed) {
    Json doc = solution_to_json(sol);
    doc["format"] = kSolutionFormat;
    doc["version"] = 1;
    doc["classes"] = scene.class_labels;
    doc["seed"] = seed;
    doc["config"] = config_to_json(cfg);
    doc["schedule"] = schedule_to_json(schedule);
    doc["score"] = breakdown_to_json(scene, b, cfg);
    return doc.dump(2) + "\n";
}

SolutionDocument read_solution_document(std::string_view bytes) {
    const Json j = parse_json(bytes, "solution document");
    check_format(j, kSolutionFormat, "");
    SolutionDocument doc;
    const Json& classes = expect_array(require(j, "classes", ""), "classes");
    for (std::size_t c = 0; c < classes.size(); ++c) doc.classes.push_back(text(classes[c], item("classes", c)));
    doc.solution = solution_from_json(j, doc.classes.size(), "");
    if (const Json* c = optional_field(j, "config")) doc.config = config_from_json(*c, "config");
    if (const Json* s = optional_field(j, "schedule")) {
        Json sched = *s;
        sched.erase("iterations");
        doc.schedule = schedule_from_json(sched, "schedule");
    }
    if (const Json* s = optional_field(j, "seed")) doc.seed = unsigned_integer(*s, "seed");
    doc.schedule.seed = doc.seed;
    return doc;
}

}  // namespace blendopt::io
