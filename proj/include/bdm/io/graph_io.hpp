#pragma once

// Graph ingestion: GeoJSON polygon collections and `i,j[,w]` edge lists.

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdm/areal_graph.hpp"
#include "bdm/contiguity.hpp"
#include "bdm/error.hpp"
#include "bdm/io/csv.hpp"
#include "bdm/io/format.hpp"

namespace bdm::io {

using json = nlohmann::json;

/// Parsed polygon collection plus the source document (kept for map export).
struct PolygonCollection {
    std::vector<PolygonFeature> features;
    json document;
};

namespace detail {

inline Ring parse_ring(const json& coords, const std::string& id) {
    if (!coords.is_array()) throw DataError("feature '" + id + "': ring is not an array");
    Ring ring;
    ring.reserve(coords.size());
    for (const auto& pos : coords) {
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
            throw DataError("feature '" + id + "': invalid position");
        }
        ring.push_back(Point{pos[0].get<double>(), pos[1].get<double>()});
    }
    return ring;
}

inline Polygon parse_polygon(const json& coords, const std::string& id) {
    if (!coords.is_array() || coords.empty()) {
        throw DataError("feature '" + id + "': polygon has no rings");
    }
    Polygon poly;
    poly.outer = parse_ring(coords[0], id);
    for (std::size_t r = 1; r < coords.size(); ++r) poly.holes.push_back(parse_ring(coords[r], id));
    return poly;
}

inline std::string property_string(const json& props, const std::string& key) {
    if (!props.is_object() || !props.contains(key)) return {};
    const auto& v = props.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_exact(v.get<double>());
    return {};
}

}  // namespace detail

/// Reads Polygon/MultiPolygon features. The region id comes from property
/// `id_key`, falling back to the "name" property.
inline PolygonCollection parse_polygon_collection(json doc, const std::string& id_key = "id") {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array()) {
        throw DataError("GeoJSON input is not a FeatureCollection");
    }
    PolygonCollection out;
    std::size_t index = 0;
    for (const auto& f : doc["features"]) {
        const json props = f.contains("properties") ? f["properties"] : json::object();
        std::string id = detail::property_string(props, id_key);
        if (id.empty()) id = detail::property_string(props, "name");
        if (id.empty()) throw DataError("feature " + std::to_string(index) + " has no '" + id_key + "' or 'name' property");
        std::string name = detail::property_string(props, "name");
        PolygonFeature feature{id, name.empty() ? id : name, {}};
        if (!f.contains("geometry") || !f["geometry"].is_object()) {
            throw DataError("feature '" + id + "': missing geometry");
        }
        const auto& geom = f["geometry"];
        const auto type = geom.value("type", "");
        if (type == "Polygon") {
            feature.parts.push_back(detail::parse_polygon(geom.at("coordinates"), id));
        } else if (type == "MultiPolygon") {
            for (const auto& poly : geom.at("coordinates")) {
                feature.parts.push_back(detail::parse_polygon(poly, id));
            }
        } else {
            throw DataError("feature '" + id + "': unsupported geometry type '" + type + "'");
        }
        out.features.push_back(std::move(feature));
        ++index;
    }
    out.document = std::move(doc);
    return out;
}

inline PolygonCollection read_polygon_collection(const std::string& path, const std::string& id_key = "id") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
    return parse_polygon_collection(std::move(doc), id_key);
}

/// Edge list with header `i,j[,w]` and zero-based indices. `n` defaults to
/// one more than the largest index.
inline AdjacencyGraph read_edge_csv(const std::string& path, std::size_t n = 0) {
    const auto table = read_csv(path);
    const long ci = table.column("i");
    const long cj = table.column("j");
    const long cw = table.column("w");
    if (ci < 0 || cj < 0) throw DataError(path + ": edge list needs columns i,j[,w]");
    std::vector<Edge> edges;
    std::size_t max_index = 0;
    for (const auto& row : table.rows) {
        const auto i = parse_integer(row[static_cast<std::size_t>(ci)], "edge index i");
        const auto j = parse_integer(row[static_cast<std::size_t>(cj)], "edge index j");
        if (i < 0 || j < 0) throw DataError(path + ": negative edge index");
        Edge e{static_cast<std::size_t>(i), static_cast<std::size_t>(j), 1.0};
        if (cw >= 0) e.weight = parse_double(row[static_cast<std::size_t>(cw)], "edge weight");
        max_index = std::max({max_index, e.i, e.j});
        edges.push_back(e);
    }
    if (n == 0) n = edges.empty() ? 0 : max_index + 1;
    return build_graph_from_edges(n, edges);
}

inline std::string edge_csv(const AdjacencyGraph& graph) {
    std::string out = "i,j,w\n";
    for (const auto& e : graph.edges()) {
        out += std::to_string(e.i) + "," + std::to_string(e.j) + "," + format_exact(e.weight) + "\n";
    }
    return out;
}

/// Unit-square lattice matching rook_lattice(rows, cols), as a FeatureCollection.
inline json lattice_geojson(std::size_t rows, std::size_t cols) {
    json features = json::array();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const auto id = "r" + std::to_string(r) + "c" + std::to_string(c);
            const double x = static_cast<double>(c);
            const double y = static_cast<double>(r);
            json ring = json::array({json::array({x, y}), json::array({x + 1, y}), json::array({x + 1, y + 1}),
                                     json::array({x, y + 1}), json::array({x, y})});
            features.push_back({{"type", "Feature"},
                                {"properties", {{"id", id}, {"name", id}}},
                                {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}}});
        }
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace bdm::io
