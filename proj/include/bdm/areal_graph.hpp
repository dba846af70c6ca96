#pragma once

// Spatial adjacency structure for areal units.
//
// An AdjacencyGraph is immutable once built. It stores the symmetric weight
// matrix in compressed-row form: for region i, neighbors(i) is sorted
// ascending and weights(i) holds the matching w_ij.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bdm/error.hpp"

namespace bdm {

struct Region {
    std::string id;
    std::string name;
    std::optional<std::size_t> geometry_ref;

    friend bool operator==(const Region&, const Region&) = default;
};

struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 1.0;
};

class AdjacencyGraph {
public:
    AdjacencyGraph() = default;

    /// Symmetric closure of `edges` over regions 0..n-1. Region ids default to
    /// the decimal index when `regions` is empty.
    static AdjacencyGraph from_edges(std::size_t n, std::span<const Edge> edges,
                                     std::vector<Region> regions = {});

    std::size_t size() const noexcept { return regions_.size(); }

    const std::vector<Region>& regions() const noexcept { return regions_; }
    const Region& region(std::size_t i) const { return regions_.at(i); }

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {neighbor_index_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::span<const double> weights(std::size_t i) const {
        return {weight_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    double weight_sum(std::size_t i) const { return weight_sum_[i]; }

    /// Weight of edge (i, j), or 0 when not adjacent.
    double weight(std::size_t i, std::size_t j) const;

    /// Each undirected edge once, with i < j, in lexicographic order.
    std::vector<Edge> edges() const;

    std::size_t edge_count() const noexcept { return neighbor_index_.size() / 2; }

    /// Regions with no neighbors.
    std::vector<std::size_t> isolated() const;

    /// Index of the region carrying `id`, if any.
    std::optional<std::size_t> find(const std::string& id) const;

    /// 64-bit FNV-1a hash over the sorted edge list and weights, rendered as hex.
    std::string fingerprint() const;

private:
    std::vector<Region> regions_;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> neighbor_index_;
    std::vector<double> weight_;
    std::vector<double> weight_sum_;
};

/// Alternate construction path mirroring the edge-list file format.
/// Listing (i, j) implies (j, i); listing a pair twice in either orientation is an error.
inline AdjacencyGraph build_graph_from_edges(std::size_t n, std::span<const Edge> edges,
                                             std::vector<Region> regions = {}) {
    return AdjacencyGraph::from_edges(n, edges, std::move(regions));
}

/// Connected components, each sorted ascending, ordered by their smallest member.
inline std::vector<std::vector<std::size_t>> components(const AdjacencyGraph& graph);

/// Component label per region (index into the result of components()).
inline std::vector<std::size_t> component_labels(const AdjacencyGraph& graph);

/// Rook-contiguity lattice of rows x cols unit cells, row-major, ids "r<row>c<col>".
inline AdjacencyGraph rook_lattice(std::size_t rows, std::size_t cols);

// ---------------------------------------------------------------------------

inline AdjacencyGraph AdjacencyGraph::from_edges(std::size_t n, std::span<const Edge> edges,
                                                 std::vector<Region> regions) {
    if (regions.empty()) {
        regions.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            regions.push_back(Region{std::to_string(i), std::to_string(i), std::nullopt});
        }
    }
    if (regions.size() != n) {
        throw DataError("region list has " + std::to_string(regions.size()) +
                        " entries but graph has " + std::to_string(n) + " nodes");
    }
    {
        std::unordered_set<std::string> seen;
        for (const auto& r : regions) {
            if (!seen.insert(r.id).second) {
                throw DataError("duplicate region id '" + r.id + "'");
            }
        }
    }

    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
    for (const auto& e : edges) {
        if (e.i >= n || e.j >= n) {
            throw DataError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                            ") index out of range for " + std::to_string(n) + " regions");
        }
        if (e.i == e.j) {
            throw DataError("self-loop on region " + std::to_string(e.i));
        }
        if (!(e.weight > 0.0) || e.weight == std::numeric_limits<double>::infinity()) {
            throw DataError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                            ") has non-positive or non-finite weight");
        }
        rows[e.i].emplace_back(e.j, e.weight);
        rows[e.j].emplace_back(e.i, e.weight);
    }

    AdjacencyGraph g;
    g.regions_ = std::move(regions);
    g.offsets_.assign(1, 0);
    g.weight_sum_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = rows[i];
        std::sort(row.begin(), row.end());
        for (std::size_t k = 1; k < row.size(); ++k) {
            if (row[k].first == row[k - 1].first) {
                throw DataError("duplicate edge (" + std::to_string(std::min(i, row[k].first)) +
                                "," + std::to_string(std::max(i, row[k].first)) + ")");
            }
        }
        for (const auto& [j, w] : row) {
            g.neighbor_index_.push_back(j);
            g.weight_.push_back(w);
            g.weight_sum_[i] += w;
        }
        g.offsets_.push_back(g.neighbor_index_.size());
    }
    return g;
}

inline double AdjacencyGraph::weight(std::size_t i, std::size_t j) const {
    const auto nb = neighbors(i);
    const auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) return 0.0;
    return weights(i)[static_cast<std::size_t>(it - nb.begin())];
}

inline std::vector<Edge> AdjacencyGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < size(); ++i) {
        const auto nb = neighbors(i);
        const auto w = weights(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (nb[k] > i) out.push_back(Edge{i, nb[k], w[k]});
        }
    }
    return out;
}

inline std::vector<std::size_t> AdjacencyGraph::isolated() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
        if (degree(i) == 0) out.push_back(i);
    }
    return out;
}

inline std::optional<std::size_t> AdjacencyGraph::find(const std::string& id) const {
    for (std::size_t i = 0; i < regions_.size(); ++i) {
        if (regions_[i].id == id) return i;
    }
    return std::nullopt;
}

inline std::string AdjacencyGraph::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xFFu;
            h *= 0x100000001b3ULL;
        }
    };
    mix(size());
    for (const auto& e : edges()) {
        mix(e.i);
        mix(e.j);
        std::uint64_t bits = 0;
        static_assert(sizeof(bits) == sizeof(e.weight));
        std::memcpy(&bits, &e.weight, sizeof bits);
        mix(bits);
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int k = 15; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

inline std::vector<std::size_t> component_labels(const AdjacencyGraph& graph) {
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> label(graph.size(), unset);
    std::vector<std::size_t> stack;
    std::size_t next = 0;
    for (std::size_t start = 0; start < graph.size(); ++start) {
        if (label[start] != unset) continue;
        label[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (const auto u : graph.neighbors(v)) {
                if (label[u] == unset) {
                    label[u] = next;
                    stack.push_back(u);
                }
            }
        }
        ++next;
    }
    return label;
}

inline std::vector<std::vector<std::size_t>> components(const AdjacencyGraph& graph) {
    const auto label = component_labels(graph);
    std::size_t count = 0;
    for (const auto l : label) count = std::max(count, l + 1);
    std::vector<std::vector<std::size_t>> out(count);
    for (std::size_t i = 0; i < label.size(); ++i) out[label[i]].push_back(i);
    return out;
}

inline AdjacencyGraph rook_lattice(std::size_t rows, std::size_t cols) {
    std::vector<Region> regions;
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const auto id = "r" + std::to_string(r) + "c" + std::to_string(c);
            regions.push_back(Region{id, id, regions.size()});
            const auto k = r * cols + c;
            if (c + 1 < cols) edges.push_back(Edge{k, k + 1, 1.0});
            if (r + 1 < rows) edges.push_back(Edge{k, k + cols, 1.0});
        }
    }
    return AdjacencyGraph::from_edges(rows * cols, edges, std::move(regions));
}

}  // namespace bdm
