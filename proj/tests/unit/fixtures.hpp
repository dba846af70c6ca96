#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdm/areal_graph.hpp"
#include "bdm/model.hpp"

namespace fixtures {

/// One observation per region, no covariates unless given.
inline bdm::Dataset dataset(std::vector<std::int64_t> y, std::vector<double> e,
                            Eigen::MatrixXd x = {}) {
    bdm::Dataset d;
    const auto n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
        d.region_ids.push_back(std::to_string(i));
        d.region.push_back(i);
    }
    d.counts = std::move(y);
    d.expected = std::move(e);
    d.covariates = x.size() == 0 ? Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0) : x;
    for (Eigen::Index j = 0; j < d.covariates.cols(); ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
    return d;
}

inline bdm::AdjacencyGraph cycle(std::size_t n) {
    std::vector<bdm::Edge> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
    return bdm::build_graph_from_edges(n, e);
}

inline bdm::AdjacencyGraph path(std::size_t n) {
    std::vector<bdm::Edge> e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return bdm::build_graph_from_edges(n, e);
}

}  // namespace fixtures
