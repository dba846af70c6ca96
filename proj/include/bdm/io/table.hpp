#pragma once

// Posterior summary tables: a fixed-width text layout for reading and a CSV
// layout (exact round-trip number formatting) for machines.

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "bdm/diagnostics.hpp"
#include "bdm/error.hpp"
#include "bdm/io/csv.hpp"
#include "bdm/io/format.hpp"

namespace bdm::io {

inline const std::array<std::string, 9>& summary_columns() {
    static const std::array<std::string, 9> cols{"Node", "Mean",   "SD",    "MC Error", "2.5%",
                                                 "Median", "97.5%", "Start", "Sample"};
    return cols;
}

inline std::vector<std::string> row_cells_text(const PosteriorSummaryRow& r) {
    return {r.node,
            format_number(r.mean),
            format_number(r.sd),
            format_number(r.mc_error),
            format_number(r.q2_5),
            format_number(r.median),
            format_number(r.q97_5),
            std::to_string(r.start),
            std::to_string(r.sample)};
}

inline std::string render_table_text(const std::vector<PosteriorSummaryRow>& rows) {
    if (rows.empty()) throw Error("no rows to render");
    const auto& cols = summary_columns();
    std::vector<std::vector<std::string>> cells;
    cells.emplace_back(cols.begin(), cols.end());
    for (const auto& r : rows) cells.push_back(row_cells_text(r));
    std::array<std::size_t, 9> width{};
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < 9; ++c) width[c] = std::max(width[c], line[c].size());
    }
    std::string out;
    for (const auto& line : cells) {
        std::string text;
        for (std::size_t c = 0; c < 9; ++c) {
            if (c) text += "  ";
            if (c == 0) {
                text += line[c] + std::string(width[c] - line[c].size(), ' ');
            } else {
                text += std::string(width[c] - line[c].size(), ' ') + line[c];
            }
        }
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out += text + "\n";
    }
    return out;
}

inline std::string render_table_csv(const std::vector<PosteriorSummaryRow>& rows) {
    if (rows.empty()) throw Error("no rows to render");
    const auto& cols = summary_columns();
    std::string out = csv_line({cols.begin(), cols.end()});
    for (const auto& r : rows) {
        out += csv_line({r.node, format_exact(r.mean), format_exact(r.sd), format_exact(r.mc_error),
                         format_exact(r.q2_5), format_exact(r.median), format_exact(r.q97_5),
                         std::to_string(r.start), std::to_string(r.sample)});
    }
    return out;
}

inline std::vector<PosteriorSummaryRow> parse_table_csv(const std::string& text) {
    const auto table = parse_csv_text(text);
    const auto& cols = summary_columns();
    if (table.header != std::vector<std::string>(cols.begin(), cols.end())) {
        throw DataError("summary CSV header does not match the summary schema");
    }
    std::vector<PosteriorSummaryRow> rows;
    for (const auto& c : table.rows) {
        PosteriorSummaryRow r;
        r.node = c[0];
        r.mean = parse_double(c[1], "Mean");
        r.sd = parse_double(c[2], "SD");
        r.mc_error = parse_double(c[3], "MC Error");
        r.q2_5 = parse_double(c[4], "2.5%");
        r.median = parse_double(c[5], "Median");
        r.q97_5 = parse_double(c[6], "97.5%");
        r.start = static_cast<std::size_t>(parse_integer(c[7], "Start"));
        r.sample = static_cast<std::size_t>(parse_integer(c[8], "Sample"));
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace bdm::io
