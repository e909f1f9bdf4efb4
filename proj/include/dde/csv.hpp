#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dde/errors.hpp"
#include "dde/vec.hpp"

namespace dde {

/// A parsed trajectory table: strictly increasing times plus one row of
/// columns per time (state and derivative columns are not distinguished
/// here; comparison treats them alike).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<double> times;
    std::vector<Vec> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("csv: cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error("csv: empty file " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    if (table.header.empty() || table.header.front() != "t")
        throw Error("csv: first column must be t in " + path);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        Vec row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.header.size())
            throw Error("csv: row " + std::to_string(lineno) + " has wrong arity in " + path);
        table.times.push_back(row.front());
        row.erase(row.begin());
        table.rows.push_back(std::move(row));
    }
    if (table.times.size() < 2) throw Error("csv: need at least two rows in " + path);
    for (std::size_t k = 1; k < table.times.size(); ++k)
        if (!(table.times[k] > table.times[k - 1]))
            throw Error("csv: times must be strictly increasing in " + path);
    return table;
}

namespace detail {
inline Vec interp_row(const CsvTable& t, double time) {
    if (time <= t.times.front()) return t.rows.front();
    if (time >= t.times.back()) return t.rows.back();
    std::size_t lo = 0, hi = t.times.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (t.times[mid] <= time ? lo : hi) = mid;
    }
    const double u = (time - t.times[lo]) / (t.times[hi] - t.times[lo]);
    Vec out(t.rows[lo].size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - u) * t.rows[lo][i] + u * t.rows[hi][i];
    return out;
}
} // namespace detail

/// Sup-norm difference of two trajectory tables over their shared time
/// range; the coarser table is interpolated linearly onto the finer grid.
inline double compare_csv(const CsvTable& a, const CsvTable& b) {
    if (a.header != b.header) throw Error("csv: column headers differ");
    const CsvTable& fine = (a.times.size() >= b.times.size()) ? a : b;
    const CsvTable& coarse = (a.times.size() >= b.times.size()) ? b : a;
    const double lo = std::max(a.times.front(), b.times.front());
    const double hi = std::min(a.times.back(), b.times.back());
    if (!(hi > lo)) throw Error("csv: time ranges do not overlap");
    double m = 0.0;
    for (std::size_t k = 0; k < fine.times.size(); ++k) {
        const double t = fine.times[k];
        if (t < lo - 1e-12 || t > hi + 1e-12) continue;
        m = std::max(m, inf_dist(fine.rows[k], detail::interp_row(coarse, t)));
    }
    return m;
}

} // namespace dde
