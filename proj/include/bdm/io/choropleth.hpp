#pragma once

// Class breaks and annotated GeoJSON for choropleth maps of per-region values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "bdm/areal_graph.hpp"
#include "bdm/error.hpp"
#include "bdm/io/format.hpp"

namespace bdm::io {

struct ClassBreaks {
    enum class Kind { quantile, manual };
    Kind kind = Kind::quantile;
    /// Class count for quantile breaks.
    std::size_t classes = 5;
    /// Ascending boundaries b_0 < ... < b_k for manual breaks: class c covers
    /// (b_c, b_{c+1}], the first class also includes b_0.
    std::vector<double> bounds;

    static ClassBreaks quantile(std::size_t k) { return {Kind::quantile, k, {}}; }
    static ClassBreaks manual(std::vector<double> b) { return {Kind::manual, b.size() - 1, std::move(b)}; }
};

struct Classification {
    std::vector<std::size_t> class_of;
    std::vector<std::string> labels;
};

inline std::string interval_label(double lo, double hi) { return format_number(lo) + "-" + format_number(hi); }

/// Quantile classes assign sorted rank r to class floor(r k / n); tied values
/// share the class of their lowest rank. Classes left empty by ties are dropped.
inline Classification classify(const std::vector<double>& values, const ClassBreaks& breaks) {
    const std::size_t n = values.size();
    if (n == 0) throw DataError("no values to classify");
    for (const double v : values) {
        if (!std::isfinite(v)) throw DataError("cannot classify non-finite value");
    }
    Classification out;
    out.class_of.assign(n, 0);
    if (breaks.kind == ClassBreaks::Kind::manual) {
        const auto& b = breaks.bounds;
        if (b.size() < 2) throw ConfigError("manual breaks need at least two bounds", "export.breaks");
        for (std::size_t c = 1; c < b.size(); ++c) {
            if (!(b[c] > b[c - 1])) throw ConfigError("manual breaks must increase", "export.breaks");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double v = values[i];
            if (v < b.front() || v > b.back()) {
                throw DataError("value " + format_number(v) + " lies outside the manual breaks");
            }
            const auto it = std::lower_bound(b.begin() + 1, b.end(), v);
            out.class_of[i] = static_cast<std::size_t>(it - (b.begin() + 1));
        }
        for (std::size_t c = 0; c + 1 < b.size(); ++c) out.labels.push_back(interval_label(b[c], b[c + 1]));
        return out;
    }

    const std::size_t k = breaks.classes;
    if (k == 0) throw ConfigError("quantile classification needs at least one class", "export.breaks");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::size_t> raw(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (r > 0 && values[order[r]] == values[order[r - 1]]) {
            raw[order[r]] = raw[order[r - 1]];
        } else {
            raw[order[r]] = r * k / n;
        }
    }
    // Renumber the occupied classes consecutively.
    std::vector<std::size_t> used(raw);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (std::size_t i = 0; i < n; ++i) {
        out.class_of[i] = static_cast<std::size_t>(std::lower_bound(used.begin(), used.end(), raw[i]) - used.begin());
    }
    std::vector<double> lo(used.size(), HUGE_VAL);
    std::vector<double> hi(used.size(), -HUGE_VAL);
    for (std::size_t i = 0; i < n; ++i) {
        lo[out.class_of[i]] = std::min(lo[out.class_of[i]], values[i]);
        hi[out.class_of[i]] = std::max(hi[out.class_of[i]], values[i]);
    }
    for (std::size_t c = 0; c < used.size(); ++c) out.labels.push_back(interval_label(lo[c], hi[c]));
    return out;
}

/// Copies the features of `document` (one per graph region, located by the
/// region's geometry_ref) and adds value, class index, class label and units.
inline nlohmann::json export_choropleth(const nlohmann::json& document, const AdjacencyGraph& graph,
                                        const Eigen::VectorXd& values, const ClassBreaks& breaks,
                                        const std::string& units = {}) {
    if (static_cast<std::size_t>(values.size()) != graph.size()) {
        throw DataError("value count does not match the region count");
    }
    if (!document.contains("features") || !document["features"].is_array()) {
        throw DataError("choropleth export needs a FeatureCollection");
    }
    const auto& features = document["features"];
    std::vector<double> v(values.data(), values.data() + values.size());
    const auto cls = classify(v, breaks);

    nlohmann::json out = {{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
    if (!units.empty()) out["units"] = units;
    out["classes"] = cls.labels;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto& region = graph.region(i);
        if (!region.geometry_ref || *region.geometry_ref >= features.size() ||
            !features[*region.geometry_ref].contains("geometry")) {
            throw DataError("geometry missing for region '" + region.id + "'");
        }
        nlohmann::json f = features[*region.geometry_ref];
        if (!f.contains("properties") || !f["properties"].is_object()) f["properties"] = nlohmann::json::object();
        auto& props = f["properties"];
        props["region_id"] = region.id;
        props["value"] = v[i];
        props["class"] = cls.class_of[i];
        props["class_label"] = cls.labels[cls.class_of[i]];
        if (!units.empty()) props["units"] = units;
        out["features"].push_back(std::move(f));
    }
    return out;
}

}  // namespace bdm::io
