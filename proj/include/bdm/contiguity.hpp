#pragma once

// Polygon contiguity: derives an AdjacencyGraph from a polygon collection.
//
// Coordinates are snapped to a grid whose spacing is a fraction of the
// collection's bounding-box diagonal. Two features are rook neighbors when
// some pair of their boundary segments overlaps along a stretch longer than
// one grid unit; queen neighbors when any boundary points come within one
// grid unit of each other.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "bdm/areal_graph.hpp"
#include "bdm/error.hpp"

namespace bdm {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Closed ring: front() == back().
using Ring = std::vector<Point>;

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
};

struct PolygonFeature {
    std::string id;
    std::string name;
    std::vector<Polygon> parts;
};

enum class ContiguityRule { rook, queen };

struct ContiguityOptions {
    ContiguityRule rule = ContiguityRule::queen;
    /// Snap grid spacing as a fraction of the bounding-box diagonal.
    double snap_fraction = 1e-9;
};

namespace geometry {

struct Segment {
    Point a;
    Point b;
    double min_x, max_x, min_y, max_y;
};

inline Segment make_segment(Point a, Point b) {
    return Segment{a, b, std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y),
                   std::max(a.y, b.y)};
}

inline double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline int orientation(Point o, Point a, Point b) {
    const double c = cross(o, a, b);
    return (c > 0.0) - (c < 0.0);
}

inline bool on_segment_box(Point p, const Segment& s) {
    return p.x >= s.min_x && p.x <= s.max_x && p.y >= s.min_y && p.y <= s.max_y;
}

/// Exact-sign intersection test (touching counts).
inline bool segments_intersect(const Segment& s, const Segment& t) {
    const int o1 = orientation(s.a, s.b, t.a);
    const int o2 = orientation(s.a, s.b, t.b);
    const int o3 = orientation(t.a, t.b, s.a);
    const int o4 = orientation(t.a, t.b, s.b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment_box(t.a, s)) return true;
    if (o2 == 0 && on_segment_box(t.b, s)) return true;
    if (o3 == 0 && on_segment_box(s.a, t)) return true;
    if (o4 == 0 && on_segment_box(s.b, t)) return true;
    return false;
}

inline double point_segment_distance(Point p, const Segment& s) {
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2, 0.0, 1.0);
    return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

inline double segment_distance(const Segment& s, const Segment& t) {
    if (segments_intersect(s, t)) return 0.0;
    return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                     point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

/// Length of the shared stretch of two (nearly) collinear segments; 0 when
/// either segment strays further than `tol` from the other's supporting line.
inline double collinear_overlap(const Segment& s, const Segment& t, double tol) {
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    const double len = std::hypot(dx, dy);
    const double tlen = std::hypot(t.b.x - t.a.x, t.b.y - t.a.y);
    if (len <= tol || tlen <= tol) return 0.0;
    const auto line_distance = [](Point p, const Segment& seg, double seg_len) {
        return std::abs(cross(seg.a, seg.b, p)) / seg_len;
    };
    if (line_distance(t.a, s, len) > tol || line_distance(t.b, s, len) > tol) return 0.0;
    if (line_distance(s.a, t, tlen) > tol || line_distance(s.b, t, tlen) > tol) return 0.0;
    const double ux = dx / len;
    const double uy = dy / len;
    const double pa = (t.a.x - s.a.x) * ux + (t.a.y - s.a.y) * uy;
    const double pb = (t.b.x - s.a.x) * ux + (t.b.y - s.a.y) * uy;
    return std::max(0.0, std::min(len, std::max(pa, pb)) - std::max(0.0, std::min(pa, pb)));
}

struct Box {
    double min_x = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();

    void extend(Point p) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    bool overlaps(const Box& o, double tol) const {
        return min_x <= o.max_x + tol && o.min_x <= max_x + tol && min_y <= o.max_y + tol &&
               o.min_y <= max_y + tol;
    }
};

inline bool boxes_overlap(const Segment& s, const Segment& t, double tol) {
    return s.min_x <= t.max_x + tol && t.min_x <= s.max_x + tol && s.min_y <= t.max_y + tol &&
           t.min_y <= s.max_y + tol;
}

struct SnappedFeature {
    std::vector<Segment> segments;
    Box box;
};

inline void check_ring_simple(const std::vector<Point>& pts, const std::string& feature_id) {
    // pts is closed; segment k runs pts[k] -> pts[k+1].
    const std::size_t m = pts.size() - 1;
    std::vector<Segment> segs;
    segs.reserve(m);
    for (std::size_t k = 0; k < m; ++k) segs.push_back(make_segment(pts[k], pts[k + 1]));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const bool adjacent = (b == a + 1) || (a == 0 && b == m - 1);
            if (adjacent) {
                // Consecutive segments may only share their common vertex; a
                // fold-back onto the previous segment is a self-intersection.
                const Point shared = (b == a + 1) ? pts[b] : pts[0];
                const Segment& s = segs[a];
                const Segment& t = segs[b];
                const Point s_far = (s.a == shared) ? s.b : s.a;
                const Point t_far = (t.a == shared) ? t.b : t.a;
                if (orientation(shared, s_far, t_far) == 0) {
                    const double dot = (s_far.x - shared.x) * (t_far.x - shared.x) +
                                       (s_far.y - shared.y) * (t_far.y - shared.y);
                    if (dot > 0.0) {
                        throw DataError("feature '" + feature_id + "': ring folds back on itself");
                    }
                }
                continue;
            }
            if (segments_intersect(segs[a], segs[b])) {
                throw DataError("feature '" + feature_id + "': self-intersecting ring");
            }
        }
    }
}

inline std::vector<Point> snap_ring(const Ring& ring, Point origin, double grid,
                                    const std::string& feature_id) {
    if (ring.size() < 4) {
        throw DataError("feature '" + feature_id + "': ring has fewer than 4 positions");
    }
    if (!(ring.front() == ring.back())) {
        throw DataError("feature '" + feature_id + "': ring is not closed");
    }
    std::vector<Point> out;
    out.reserve(ring.size());
    for (const auto& p : ring) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw DataError("feature '" + feature_id + "': non-finite coordinate");
        }
        const Point q{origin.x + std::round((p.x - origin.x) / grid) * grid,
                      origin.y + std::round((p.y - origin.y) / grid) * grid};
        if (out.empty() || !(out.back() == q)) out.push_back(q);
    }
    if (out.size() < 4) {
        throw DataError("feature '" + feature_id + "': degenerate ring after snapping");
    }
    check_ring_simple(out, feature_id);
    return out;
}

}  // namespace geometry

/// Adjacency graph of a polygon collection under the rook or queen rule.
/// Regions take the feature ids and names; geometry_ref is the feature index.
inline AdjacencyGraph build_graph_from_polygons(std::span<const PolygonFeature> features,
                                                const ContiguityOptions& options = {}) {
    using namespace geometry;
    if (features.empty()) throw DataError("polygon collection is empty");
    if (!(options.snap_fraction > 0.0)) {
        throw ConfigError("snap fraction must be positive", "graph.snap_fraction");
    }

    std::vector<Region> regions;
    regions.reserve(features.size());
    {
        std::unordered_set<std::string> seen;
        for (std::size_t f = 0; f < features.size(); ++f) {
            const auto& id = features[f].id;
            if (id.empty()) throw DataError("feature " + std::to_string(f) + " has no region id");
            if (!seen.insert(id).second) throw DataError("duplicate region id '" + id + "'");
            if (features[f].parts.empty()) {
                throw DataError("feature '" + id + "': no polygon geometry");
            }
            regions.push_back(Region{id, features[f].name.empty() ? id : features[f].name, f});
        }
    }

    Box all;
    for (const auto& f : features) {
        for (const auto& part : f.parts) {
            for (const auto& p : part.outer) all.extend(p);
        }
    }
    const double diag = std::hypot(all.max_x - all.min_x, all.max_y - all.min_y);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
        throw DataError("polygon collection has a degenerate bounding box");
    }
    const double grid = options.snap_fraction * diag;
    const Point origin{all.min_x, all.min_y};

    std::vector<SnappedFeature> snapped(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
        auto& sf = snapped[f];
        const auto add_ring = [&](const Ring& ring) {
            const auto pts = snap_ring(ring, origin, grid, features[f].id);
            for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
                sf.segments.push_back(make_segment(pts[k], pts[k + 1]));
                sf.box.extend(pts[k]);
            }
        };
        for (const auto& part : features[f].parts) {
            add_ring(part.outer);
            for (const auto& hole : part.holes) add_ring(hole);
        }
    }

    // Two points closer than one grid step can still round to neighbouring
    // grid nodes, up to sqrt(2) steps apart.
    const double tol = 2.0 * grid;
    const auto adjacent = [&](const SnappedFeature& p, const SnappedFeature& q) {
        for (const auto& s : p.segments) {
            for (const auto& t : q.segments) {
                if (!boxes_overlap(s, t, tol)) continue;
                if (options.rule == ContiguityRule::queen) {
                    if (segment_distance(s, t) <= tol) return true;
                } else if (collinear_overlap(s, t, tol) > tol) {
                    return true;
                }
            }
        }
        return false;
    };

    // Sweep over features ordered by the left edge of their bounding box.
    std::vector<std::size_t> order(features.size());
    for (std::size_t f = 0; f < order.size(); ++f) order[f] = f;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return snapped[a].box.min_x < snapped[b].box.min_x;
    });

    std::vector<Edge> edges;
    for (std::size_t oa = 0; oa < order.size(); ++oa) {
        const auto a = order[oa];
        for (std::size_t ob = oa + 1; ob < order.size(); ++ob) {
            const auto b = order[ob];
            if (snapped[b].box.min_x > snapped[a].box.max_x + tol) break;
            if (!snapped[a].box.overlaps(snapped[b].box, tol)) continue;
            if (adjacent(snapped[a], snapped[b])) {
                edges.push_back(Edge{std::min(a, b), std::max(a, b), 1.0});
            }
        }
    }
    return AdjacencyGraph::from_edges(features.size(), edges, std::move(regions));
}

}  // namespace bdm
