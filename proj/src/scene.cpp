#include "blendopt/scene.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "blendopt/errors.hpp"

namespace blendopt {
namespace {

using Mask = std::uint64_t;
constexpr std::size_t kMaxClasses = 64;

Signature to_signature(Mask bits) {
    Signature s;
    for (std::size_t c = 0; c < kMaxClasses; ++c) {
        if (bits & (Mask{1} << c)) s.push_back(c);
    }
    return s;
}

bool signature_less(const Signature& a, const Signature& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

std::string class_name(const std::vector<std::string>& labels, std::size_t c) {
    return c < labels.size() && !labels[c].empty() ? labels[c] : "#" + std::to_string(c);
}

/// Canonical ordering and matrix construction shared by every scene source.
/// `areas` need not be normalized; `edges` index into `sigs`.
SceneStructure assemble(std::size_t m, std::vector<std::string> labels, const std::vector<Signature>& sigs,
                        const std::vector<double>& areas,
                        const std::set<std::pair<std::size_t, std::size_t>>& edges, Srgb8 background,
                        std::vector<std::size_t>* new_index_out = nullptr) {
    const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
    if (sigs.empty() || !(total > 0.0)) throw ValidationError("scene has no covered area");

    SceneStructure scene;
    scene.class_count = m;
    scene.background = background;

    std::vector<std::size_t> rep(m, sigs.size());
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t k = 0; k < sigs.size(); ++k) {
            if (!std::binary_search(sigs[k].begin(), sigs[k].end(), c)) continue;
            if (rep[c] == sigs.size() || signature_less(sigs[k], sigs[rep[c]])) rep[c] = k;
        }
        if (rep[c] == sigs.size()) {
            throw ValidationError("class " + class_name(labels, c) + " has no visible area");
        }
        if (sigs[rep[c]].size() != 1) {
            scene.warnings.push_back("ExclusiveRegionMissing: class " + class_name(labels, c) +
                                     " has no exclusive area; using its smallest covering region");
        }
    }
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t d = c + 1; d < m; ++d) {
            if (rep[c] == rep[d]) {
                throw ValidationError("classes " + class_name(labels, c) + " and " + class_name(labels, d) +
                                      " cover exactly the same area");
            }
        }
    }

    std::vector<std::size_t> order(rep.begin(), rep.end());
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < sigs.size(); ++k) {
        if (std::find(rep.begin(), rep.end(), k) == rep.end()) rest.push_back(k);
    }
    std::sort(rest.begin(), rest.end(),
              [&](std::size_t a, std::size_t b) { return signature_less(sigs[a], sigs[b]); });
    order.insert(order.end(), rest.begin(), rest.end());

    const std::size_t n = order.size();
    std::vector<std::size_t> new_index(sigs.size());
    for (std::size_t i = 0; i < n; ++i) new_index[order[i]] = i;

    scene.membership = Matrix<std::uint8_t>(n, m, 0);
    scene.sizes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Signature& s = sigs[order[i]];
        scene.regions.push_back({i, s, areas[order[i]] / total});
        scene.sizes[i] = areas[order[i]] / total;
        for (std::size_t c : s) scene.membership(i, c) = 1;
    }
    scene.pair_share = Matrix<int>(n, n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            int w = 0;
            for (std::size_t c = 0; c < m; ++c) w += scene.membership(i, c) * scene.membership(j, c);
            scene.pair_share(i, j) = w;
        }
    }
    scene.adjacency.assign(n, {});
    for (const auto& [a, b] : edges) {
        const std::size_t i = new_index[a];
        const std::size_t j = new_index[b];
        if (i == j) continue;
        scene.adjacency[i].push_back(j);
        scene.adjacency[j].push_back(i);
    }
    for (auto& nb : scene.adjacency) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    labels.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
        if (labels[c].empty()) labels[c] = std::string(1, static_cast<char>('A' + c % 26));
    }
    scene.class_labels = std::move(labels);
    if (new_index_out) *new_index_out = std::move(new_index);
    return scene;
}

void validate_spec(const HistogramSpec& spec) {
    const std::size_t m = spec.class_count();
    if (m == 0) throw ValidationError("histogram spec has no classes");
    if (m > kMaxClasses) throw ValidationError("histogram spec has more than 64 classes");
    if (spec.bin_edges.size() < 2) throw ValidationError("histogram spec needs at least one bin");
    for (std::size_t k = 0; k + 1 < spec.bin_edges.size(); ++k) {
        if (!std::isfinite(spec.bin_edges[k]) || !std::isfinite(spec.bin_edges[k + 1]) ||
            !(spec.bin_edges[k] < spec.bin_edges[k + 1])) {
            throw ValidationError("bin edges must be finite and strictly increasing");
        }
    }
    for (std::size_t c = 0; c < m; ++c) {
        if (spec.heights[c].size() != spec.bin_count()) {
            throw ValidationError("class " + class_name(spec.class_labels, c) + " has " +
                                  std::to_string(spec.heights[c].size()) + " heights, expected " +
                                  std::to_string(spec.bin_count()));
        }
        for (double h : spec.heights[c]) {
            if (!std::isfinite(h) || h < 0.0) {
                throw ValidationError("class " + class_name(spec.class_labels, c) +
                                      " has a negative or non-finite height");
            }
        }
    }
}

struct Interval {
    double y0;
    double y1;
    Mask cover;
};

/// Vertical cover intervals of one bin, bottom to top.
std::vector<Interval> bin_intervals(const HistogramSpec& spec, std::size_t bin) {
    std::vector<double> levels;
    for (const auto& h : spec.heights) {
        if (h[bin] > 0.0) levels.push_back(h[bin]);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::vector<Interval> out;
    double lo = 0.0;
    for (double top : levels) {
        Mask cover = 0;
        for (std::size_t c = 0; c < spec.heights.size(); ++c) {
            if (spec.heights[c][bin] >= top) cover |= Mask{1} << c;
        }
        out.push_back({lo, top, cover});
        lo = top;
    }
    return out;
}

}  // namespace

bool SceneStructure::adjacent(std::size_t i, std::size_t j) const {
    const auto& nb = adjacency.at(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

SceneStructure scene_from_histograms(const HistogramSpec& spec) {
    validate_spec(spec);

    std::map<Mask, double> area;
    std::set<std::pair<Mask, Mask>> touching;
    const auto touch = [&](Mask a, Mask b) {
        if (a != b) touching.emplace(std::min(a, b), std::max(a, b));
    };

    std::vector<Interval> prev;
    for (std::size_t k = 0; k < spec.bin_count(); ++k) {
        const double width = spec.bin_edges[k + 1] - spec.bin_edges[k];
        auto cur = bin_intervals(spec, k);
        for (std::size_t t = 0; t < cur.size(); ++t) {
            area[cur[t].cover] += width * (cur[t].y1 - cur[t].y0);
            if (t > 0) touch(cur[t - 1].cover, cur[t].cover);
        }
        // Neighboring bins share an edge; contact needs positive overlap.
        for (const auto& a : prev) {
            for (const auto& b : cur) {
                if (std::min(a.y1, b.y1) > std::max(a.y0, b.y0)) touch(a.cover, b.cover);
            }
        }
        prev = std::move(cur);
    }

    std::vector<Signature> sigs;
    std::vector<double> areas;
    std::map<Mask, std::size_t> index;
    for (const auto& [mask, a] : area) {
        index[mask] = sigs.size();
        sigs.push_back(to_signature(mask));
        areas.push_back(a);
    }
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [a, b] : touching) edges.emplace(index[a], index[b]);

    SceneStructure scene = assemble(spec.class_count(), spec.class_labels, sigs, areas, edges, spec.background);
    scene.histogram = spec;
    return scene;
}

SceneStructure scene_from_masks(const LayerMaskSet& set, const MaskOptions& options) {
    const std::size_t m = set.masks.size();
    if (m == 0) throw ValidationError("mask set has no layers");
    if (m > kMaxClasses) throw ValidationError("mask set has more than 64 layers");
    if (set.width == 0 || set.height == 0) throw ValidationError("mask set has zero dimensions");
    const std::size_t npx = set.width * set.height;
    for (std::size_t c = 0; c < m; ++c) {
        if (set.masks[c].size() != npx) {
            throw ValidationError("mask " + class_name(set.class_labels, c) + " has dimensions differing from " +
                                  std::to_string(set.width) + "x" + std::to_string(set.height));
        }
    }

    std::vector<Mask> px(npx, 0);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t p = 0; p < npx; ++p) {
            if (set.masks[c][p]) px[p] |= Mask{1} << c;
        }
    }

    const auto census = [&](std::unordered_map<Mask, std::size_t>& counts,
                            std::map<std::pair<Mask, Mask>, std::size_t>& borders) {
        counts.clear();
        borders.clear();
        for (std::size_t y = 0; y < set.height; ++y) {
            for (std::size_t x = 0; x < set.width; ++x) {
                const Mask s = px[y * set.width + x];
                if (!s) continue;
                ++counts[s];
                const auto edge = [&](Mask t) {
                    if (t && t != s) ++borders[{std::min(s, t), std::max(s, t)}];
                };
                if (x + 1 < set.width) edge(px[y * set.width + x + 1]);
                if (y + 1 < set.height) edge(px[(y + 1) * set.width + x]);
            }
        }
    };

    std::unordered_map<Mask, std::size_t> counts;
    std::map<std::pair<Mask, Mask>, std::size_t> borders;
    census(counts, borders);
    std::size_t covered = 0;
    for (const auto& [s, c] : counts) covered += c;
    if (covered == 0) throw ValidationError("mask set covers no pixels");

    // Merge sliver signatures into their largest neighbor. Single-class
    // signatures are kept: they are the base regions.
    const double min_pixels = options.min_region_fraction * static_cast<double>(covered);
    std::set<Mask> kept;
    for (;;) {
        Mask victim = 0;
        std::size_t victim_count = 0;
        for (const auto& [s, c] : counts) {
            if (std::popcount(s) < 2 || static_cast<double>(c) >= min_pixels || kept.count(s)) continue;
            if (!victim || c < victim_count || (c == victim_count && s < victim)) {
                victim = s;
                victim_count = c;
            }
        }
        if (!victim) break;
        Mask target = 0;
        for (const auto& [pair, len] : borders) {
            Mask other = 0;
            if (pair.first == victim) other = pair.second;
            else if (pair.second == victim) other = pair.first;
            if (!other) continue;
            if (!target || counts[other] > counts[target] || (counts[other] == counts[target] && other < target)) {
                target = other;
            }
        }
        if (!target) {
            // Isolated sliver: nothing to merge into, keep it.
            kept.insert(victim);
            continue;
        }
        for (auto& p : px) {
            if (p == victim) p = target;
        }
        census(counts, borders);
    }

    std::vector<Mask> masks;
    for (const auto& [s, c] : counts) masks.push_back(s);
    std::sort(masks.begin(), masks.end());
    std::vector<Signature> sigs;
    std::vector<double> areas;
    std::unordered_map<Mask, std::size_t> index;
    for (Mask s : masks) {
        index[s] = sigs.size();
        sigs.push_back(to_signature(s));
        areas.push_back(static_cast<double>(counts[s]));
    }
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [pair, len] : borders) edges.emplace(index[pair.first], index[pair.second]);

    std::vector<std::size_t> new_index;
    SceneStructure scene = assemble(m, set.class_labels, sigs, areas, edges, set.background, &new_index);

    RegionRaster raster{set.width, set.height, std::vector<std::int32_t>(npx, -1)};
    for (std::size_t p = 0; p < npx; ++p) {
        if (px[p]) raster.region_of_pixel[p] = static_cast<std::int32_t>(new_index[index[px[p]]]);
    }
    scene.raster = std::move(raster);
    return scene;
}

SceneStructure scene_from_regions(std::size_t class_count, std::vector<Signature> signatures,
                                  std::vector<double> sizes,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                  Srgb8 background) {
    if (signatures.size() != sizes.size()) throw ValidationError("signature and size counts differ");
    std::set<Signature> unique;
    for (auto& s : signatures) {
        std::sort(s.begin(), s.end());
        if (s.empty() || s.back() >= class_count) throw ValidationError("signature outside the class range");
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw ValidationError("signature repeats a class");
        if (!unique.insert(s).second) throw ValidationError("duplicate signature");
    }
    for (double s : sizes) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("region sizes must be positive");
    }
    std::set<std::pair<std::size_t, std::size_t>> e;
    for (const auto& [a, b] : edges) {
        if (a >= signatures.size() || b >= signatures.size()) throw ValidationError("edge outside the region range");
        if (a != b) e.emplace(std::min(a, b), std::max(a, b));
    }
    return assemble(class_count, {}, signatures, sizes, e, background);
}

std::vector<std::string> validate_scene(const SceneStructure& s) {
    std::vector<std::string> v;
    const std::size_t n = s.regions.size();
    const std::size_t m = s.class_count;
    if (n == 0) v.emplace_back("scene has no regions");
    if (n < m) v.emplace_back("fewer regions than classes");
    if (s.membership.rows() != n || s.membership.cols() != m) v.emplace_back("membership matrix has wrong shape");
    if (s.pair_share.rows() != n || s.pair_share.cols() != n) v.emplace_back("pair-share matrix has wrong shape");
    if (s.sizes.size() != n) v.emplace_back("size vector has wrong length");
    if (s.adjacency.size() != n) v.emplace_back("adjacency has wrong length");
    if (!v.empty()) return v;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = s.regions[i];
        if (r.signature.empty()) v.push_back("region " + std::to_string(i) + " has an empty signature");
        if (!(s.sizes[i] > 0.0)) v.push_back("region " + std::to_string(i) + " has non-positive size RS");
        if (r.size != s.sizes[i]) v.push_back("region " + std::to_string(i) + " size differs from RS vector");
        for (std::size_t c = 0; c < m; ++c) {
            const bool in_sig = std::find(r.signature.begin(), r.signature.end(), c) != r.signature.end();
            if (in_sig != (s.membership(i, c) != 0)) {
                v.push_back("membership row " + std::to_string(i) + " disagrees with its signature");
                break;
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        int ones = 0;
        for (std::size_t c = 0; c < m; ++c) ones += s.membership(i, c) ? 1 : 0;
        if (s.membership(i, i) != 1 || ones != 1) {
            v.push_back("base region " + std::to_string(i) + " is not exclusive to class " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            int w = 0;
            for (std::size_t c = 0; c < m; ++c) w += s.membership(i, c) * s.membership(j, c);
            if (s.pair_share(i, j) != w) {
                v.push_back("W(" + std::to_string(i) + "," + std::to_string(j) + ") != (M M^T)");
            }
        }
    }
    const double total = std::accumulate(s.sizes.begin(), s.sizes.end(), 0.0);
    if (total > 1.0 + 1e-9) v.emplace_back("region sizes sum above 1");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : s.adjacency[i]) {
            if (j >= n) {
                v.push_back("adjacency of region " + std::to_string(i) + " points outside the scene");
                continue;
            }
            if (j == i) v.push_back("region " + std::to_string(i) + " is adjacent to itself");
            if (!std::binary_search(s.adjacency[j].begin(), s.adjacency[j].end(), i)) {
                v.push_back("adjacency " + std::to_string(i) + "-" + std::to_string(j) + " is not symmetric");
            }
        }
    }
    return v;
}

LayerMaskSet rasterize_histogram(const HistogramSpec& spec, std::size_t width, std::size_t height) {
    validate_spec(spec);
    LayerMaskSet out;
    out.width = width;
    out.height = height;
    out.class_labels = spec.class_labels;
    out.background = spec.background;
    double top = 0.0;
    for (const auto& h : spec.heights) top = std::max(top, *std::max_element(h.begin(), h.end()));
    const double x0 = spec.bin_edges.front();
    const double span = spec.bin_edges.back() - x0;
    out.masks.assign(spec.class_count(), std::vector<std::uint8_t>(width * height, 0));
    if (top <= 0.0) return out;
    for (std::size_t x = 0; x < width; ++x) {
        const double xd = x0 + (static_cast<double>(x) + 0.5) / static_cast<double>(width) * span;
        const auto it = std::upper_bound(spec.bin_edges.begin(), spec.bin_edges.end(), xd);
        const std::size_t bin = std::min<std::size_t>(static_cast<std::size_t>(it - spec.bin_edges.begin()) - 1,
                                                      spec.bin_count() - 1);
        for (std::size_t y = 0; y < height; ++y) {
            const double yd = (static_cast<double>(height - y) - 0.5) / static_cast<double>(height) * top;
            for (std::size_t c = 0; c < spec.class_count(); ++c) {
                if (spec.heights[c][bin] > yd) out.masks[c][y * width + x] = 1;
            }
        }
    }
    return out;
}

}  // namespace blendopt
