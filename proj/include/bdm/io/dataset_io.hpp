#pragma once

// Dataset CSV files and their column-mapping sidecar.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdm/areal_graph.hpp"
#include "bdm/error.hpp"
#include "bdm/io/csv.hpp"
#include "bdm/io/format.hpp"
#include "bdm/model.hpp"

namespace bdm::io {

struct ColumnMapping {
    std::string region = "region_id";
    std::string count = "count";
    std::string expected = "expected";
    std::vector<std::string> covariates;
    std::optional<std::string> period;

    friend bool operator==(const ColumnMapping&, const ColumnMapping&) = default;
};

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t\r");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline std::string join_list(const std::vector<std::string>& items, char sep = ',') {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k) out.push_back(sep);
        out += items[k];
    }
    return out;
}

inline std::string mapping_path_for(const std::string& csv_path) { return csv_path + ".columns"; }

inline void write_mapping(const std::string& path, const ColumnMapping& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "region = " << m.region << "\n"
        << "count = " << m.count << "\n"
        << "expected = " << m.expected << "\n"
        << "covariates = " << join_list(m.covariates) << "\n";
    if (m.period) out << "period = " << *m.period << "\n";
}

inline ColumnMapping read_mapping(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open column mapping '" + path + "'");
    ColumnMapping m;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto key = split_list(line.substr(0, eq));
        const auto value = line.substr(eq + 1);
        if (key.empty()) continue;
        const auto items = split_list(value);
        const std::string v = items.empty() ? std::string{} : items.front();
        if (key[0] == "region") m.region = v;
        else if (key[0] == "count") m.count = v;
        else if (key[0] == "expected") m.expected = v;
        else if (key[0] == "covariates") m.covariates = items;
        else if (key[0] == "period") m.period = v.empty() ? std::nullopt : std::optional<std::string>(v);
        else throw DataError(path + ": unknown column mapping key '" + key[0] + "'");
    }
    return m;
}

/// Loads a dataset. With a graph, region ids are matched against it and rows
/// are reordered to graph order (then by period); without one, regions are
/// numbered in order of first appearance.
inline Dataset load_dataset(const CsvTable& table, const ColumnMapping& mapping,
                            const AdjacencyGraph* graph = nullptr, const std::string& source = "dataset") {
    const auto need = [&](const std::string& name) {
        const long c = table.column(name);
        if (c < 0) throw DataError(source + ": missing column '" + name + "'");
        return static_cast<std::size_t>(c);
    };
    const auto c_region = need(mapping.region);
    const auto c_count = need(mapping.count);
    const auto c_expected = need(mapping.expected);
    std::vector<std::size_t> c_cov;
    for (const auto& name : mapping.covariates) c_cov.push_back(need(name));
    std::optional<std::size_t> c_period;
    if (mapping.period) c_period = need(*mapping.period);

    Dataset data;
    std::unordered_map<std::string, std::size_t> index;
    if (graph) {
        for (std::size_t i = 0; i < graph->size(); ++i) {
            data.region_ids.push_back(graph->region(i).id);
            index.emplace(graph->region(i).id, i);
        }
    }

    struct Row {
        std::size_t region;
        int period;
        std::int64_t count;
        double expected;
        std::vector<double> x;
    };
    std::vector<Row> rows;
    std::vector<std::string> unknown;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const auto& id = cells[c_region];
        const auto where = source + " row " + std::to_string(r + 1);
        auto it = index.find(id);
        if (it == index.end()) {
            if (graph) {
                if (std::find(unknown.begin(), unknown.end(), id) == unknown.end()) unknown.push_back(id);
                continue;
            }
            it = index.emplace(id, data.region_ids.size()).first;
            data.region_ids.push_back(id);
        }
        Row row;
        row.region = it->second;
        const auto count = parse_double(cells[c_count], where + " count");
        if (!(count >= 0.0) || count != std::floor(count)) {
            throw DataError(where + ": count must be a non-negative integer");
        }
        row.count = static_cast<std::int64_t>(count);
        row.expected = parse_double(cells[c_expected], where + " expected");
        if (!(row.expected > 0.0) || !std::isfinite(row.expected)) {
            throw DataError(where + ": non-positive expected count for region '" + id + "'");
        }
        for (std::size_t j = 0; j < c_cov.size(); ++j) {
            const auto& cell = cells[c_cov[j]];
            if (cell.find_first_not_of(" \t\r") == std::string::npos) {
                throw DataError(where + ": missing covariate '" + mapping.covariates[j] + "'");
            }
            row.x.push_back(parse_double(cell, where + " covariate " + mapping.covariates[j]));
        }
        row.period = c_period ? static_cast<int>(parse_integer(cells[*c_period], where + " period")) : 0;
        rows.push_back(std::move(row));
    }
    if (!unknown.empty()) {
        throw DataError(source + ": region ids not in graph: " + join_list(unknown, ' '));
    }
    if (rows.empty()) throw DataError(source + ": no data rows");

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.region != b.region ? a.region < b.region : a.period < b.period;
    });

    const auto n = static_cast<Eigen::Index>(rows.size());
    data.covariates.resize(n, static_cast<Eigen::Index>(c_cov.size()));
    data.covariate_names = mapping.covariates;
    int pmin = 0;
    int pmax = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& row = rows[k];
        data.region.push_back(row.region);
        data.counts.push_back(row.count);
        data.expected.push_back(row.expected);
        for (std::size_t j = 0; j < row.x.size(); ++j) {
            data.covariates(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = row.x[j];
        }
        if (c_period) {
            data.period.push_back(row.period);
            pmin = k == 0 ? row.period : std::min(pmin, row.period);
            pmax = k == 0 ? row.period : std::max(pmax, row.period);
        }
    }
    if (c_period) data.period_center = 0.5 * (static_cast<double>(pmin) + static_cast<double>(pmax));
    data.validate();
    return data;
}

inline Dataset load_dataset(const std::string& path, const ColumnMapping& mapping,
                            const AdjacencyGraph* graph = nullptr) {
    return load_dataset(read_csv(path), mapping, graph, path);
}

/// Mapping matching the column layout written by dataset_csv().
inline ColumnMapping default_mapping(const Dataset& data) {
    ColumnMapping m;
    for (std::size_t j = 0; j < data.n_covariates(); ++j) {
        m.covariates.push_back(j < data.covariate_names.size() ? data.covariate_names[j]
                                                               : "x" + std::to_string(j + 1));
    }
    if (data.has_time()) m.period = "period";
    return m;
}

inline std::string dataset_csv(const Dataset& data) {
    const auto m = default_mapping(data);
    std::vector<std::string> header{m.region, m.count, m.expected};
    header.insert(header.end(), m.covariates.begin(), m.covariates.end());
    if (m.period) header.push_back(*m.period);
    std::string out = csv_line(header);
    for (std::size_t k = 0; k < data.size(); ++k) {
        std::vector<std::string> cells{data.region_ids[data.region[k]], std::to_string(data.counts[k]),
                                       format_exact(data.expected[k])};
        for (std::size_t j = 0; j < data.n_covariates(); ++j) {
            cells.push_back(format_exact(data.covariates(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j))));
        }
        if (data.has_time()) cells.push_back(std::to_string(data.period[k]));
        out += csv_line(cells);
    }
    return out;
}

/// Writes `path` and its column-mapping sidecar.
inline void save_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << dataset_csv(data);
    out.close();
    write_mapping(mapping_path_for(path), default_mapping(data));
}

}  // namespace bdm::io
