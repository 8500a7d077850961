#pragma once

// Persistent homology over Z/2 by boundary-matrix column reduction, and a
// static Betti-number computation used as an independent check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "complex.hpp"
#include "csv.hpp"
#include "errors.hpp"

namespace topothresh {

/// Sparse Z/2 matrix stored by columns; each column is a sorted list of row indices.
struct BoundaryMatrix {
    std::vector<std::vector<std::size_t>> columns;

    std::size_t size() const noexcept { return columns.size(); }
    std::size_t nonzeros() const noexcept {
        std::size_t n = 0;
        for (const auto& c : columns) n += c.size();
        return n;
    }
};

struct Interval {
    double birth = 0.0;
    double death = 0.0;
    bool essential = false;

    double persistence() const noexcept { return death - birth; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

struct PersistenceDiagram {
    std::size_t dim = 0;
    /// Intervals with death > birth. Essential classes carry death = cap.
    std::vector<Interval> pairs;
    /// Never-dying classes, counted before capping.
    std::size_t essential = 0;

    friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

struct BettiProfile {
    std::size_t dim = 0;
    std::size_t betti = 0;
    std::size_t rank_cycles = 0;
    std::size_t rank_boundaries = 0;
};

namespace detail {

struct VertexListHash {
    std::size_t operator()(const std::vector<vertex_t>& v) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (auto x : v) {
            h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

inline void add_column(std::vector<std::size_t>& target, const std::vector<std::size_t>& source,
                       std::vector<std::size_t>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                  std::back_inserter(scratch));
    target.swap(scratch);
}

}  // namespace detail

/// Column j holds the filtration positions of the codimension-1 faces of simplex j.
inline BoundaryMatrix boundary_matrix(const Filtration& filtration) {
    std::unordered_map<std::vector<vertex_t>, std::size_t, detail::VertexListHash> position;
    position.reserve(filtration.size());
    BoundaryMatrix m;
    m.columns.resize(filtration.size());
    std::vector<vertex_t> face;
    for (std::size_t j = 0; j < filtration.size(); ++j) {
        const auto& s = filtration[j];
        if (s.dim() > 0) {
            auto& col = m.columns[j];
            col.reserve(s.vertices.size());
            for (std::size_t drop = 0; drop < s.vertices.size(); ++drop) {
                face.clear();
                for (std::size_t i = 0; i < s.vertices.size(); ++i)
                    if (i != drop) face.push_back(s.vertices[i]);
                auto it = position.find(face);
                if (it == position.end())
                    throw consistency_error("boundary_matrix: face of simplex " + std::to_string(j) +
                                            " not found before it");
                col.push_back(it->second);
            }
            std::sort(col.begin(), col.end());
        }
        position.emplace(s.vertices, j);
    }
    return m;
}

/// Reduces the boundary matrix (twist/clearing, highest dimension first) and
/// reads off one diagram per dimension 0..max_dim-1. Unpaired classes are
/// essential and reported as [birth, cap). Zero-length intervals are dropped.
inline std::vector<PersistenceDiagram> reduce_and_pair(BoundaryMatrix matrix, const Filtration& filtration,
                                                       double cap = 1.0) {
    const auto n = filtration.size();
    if (matrix.size() != n) throw consistency_error("reduce_and_pair: matrix/filtration size mismatch");
    if (!(cap >= filtration.max_value()))
        throw std::invalid_argument("reduce_and_pair: cap " + std::to_string(cap) +
                                    " below the largest filtration value");
    const auto max_dim = filtration.max_dim();
    constexpr auto none = std::numeric_limits<std::size_t>::max();

    std::vector<std::size_t> pivot_column(n, none);  // row -> column whose low is that row
    std::vector<bool> cleared(n, false);
    std::vector<std::size_t> scratch;

    std::vector<std::vector<std::size_t>> by_dim(max_dim + 1);
    for (std::size_t j = 0; j < n; ++j) by_dim[filtration[j].dim()].push_back(j);

    for (std::size_t d = max_dim; d >= 1; --d) {
        for (auto j : by_dim[d]) {
            auto& col = matrix.columns[j];
            if (cleared[j]) {
                col.clear();
                continue;
            }
            while (!col.empty()) {
                const auto low = col.back();
                if (low >= j) throw consistency_error("reduce_and_pair: face after coface");
                const auto p = pivot_column[low];
                if (p == none) break;
                detail::add_column(col, matrix.columns[p], scratch);
            }
            if (!col.empty()) {
                pivot_column[col.back()] = j;
                cleared[col.back()] = true;
            }
        }
    }

    std::vector<PersistenceDiagram> diagrams(max_dim);
    for (std::size_t k = 0; k < max_dim; ++k) diagrams[k].dim = k;

    for (std::size_t i = 0; i < n; ++i) {
        const auto k = filtration[i].dim();
        if (k >= max_dim) continue;
        if (!matrix.columns[i].empty()) continue;  // negative: kills a class of dimension k-1
        const double birth = filtration[i].value;
        if (pivot_column[i] != none) {
            const double death = filtration[pivot_column[i]].value;
            if (death > birth) diagrams[k].pairs.push_back({birth, death, false});
        } else {
            ++diagrams[k].essential;
            if (cap > birth) diagrams[k].pairs.push_back({birth, cap, true});
        }
    }
    for (auto& d : diagrams)
        std::sort(d.pairs.begin(), d.pairs.end(), [](const Interval& a, const Interval& b) {
            if (a.birth != b.birth) return a.birth < b.birth;
            if (a.death != b.death) return a.death < b.death;
            return a.essential < b.essential;
        });
    return diagrams;
}

inline std::vector<PersistenceDiagram> compute_persistence(const Filtration& filtration, double cap = 1.0) {
    return reduce_and_pair(boundary_matrix(filtration), filtration, cap);
}

/// Number of intervals per dimension (index = k), essential classes included.
inline std::vector<std::size_t> feature_counts(const std::vector<PersistenceDiagram>& diagrams) {
    std::vector<std::size_t> f(diagrams.size(), 0);
    for (const auto& d : diagrams) {
        if (d.dim >= f.size()) f.resize(d.dim + 1, 0);
        f[d.dim] = d.pairs.size();
    }
    return f;
}

/// Intervals of `diagram` alive at scale eps, i.e. birth <= eps < death.
inline std::size_t alive_at(const PersistenceDiagram& diagram, double eps) {
    return static_cast<std::size_t>(std::count_if(diagram.pairs.begin(), diagram.pairs.end(),
                                                  [eps](const Interval& iv) {
                                                      return iv.birth <= eps && eps < iv.death;
                                                  }));
}

namespace detail {

/// Rank over Z/2 of a dense matrix given as packed bit rows.
inline std::size_t gf2_rank(std::vector<std::vector<std::uint64_t>> rows, std::size_t cols) {
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
        const auto word = c / 64;
        const auto bit = std::uint64_t{1} << (c % 64);
        std::size_t pivot = rank;
        while (pivot < rows.size() && !(rows[pivot][word] & bit)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pivot], rows[rank]);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r != rank && (rows[r][word] & bit))
                for (std::size_t w = 0; w < rows[r].size(); ++w) rows[r][w] ^= rows[rank][w];
        }
        ++rank;
    }
    return rank;
}

/// Rank of the boundary map from k-simplices to (k-1)-simplices present at scale eps.
inline std::size_t boundary_rank(const Filtration& f, double eps, std::size_t k) {
    if (k == 0) return 0;
    std::map<std::vector<vertex_t>, std::size_t> row_index;
    std::vector<const Simplex*> cols;
    for (const auto& s : f.simplices()) {
        if (s.value > eps) continue;
        if (s.dim() + 1 == k) row_index.emplace(s.vertices, row_index.size());
        else if (s.dim() == k) cols.push_back(&s);
    }
    if (cols.empty() || row_index.empty()) return 0;
    const auto words = (cols.size() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(row_index.size(), std::vector<std::uint64_t>(words, 0));
    std::vector<vertex_t> face;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& v = cols[c]->vertices;
        for (std::size_t drop = 0; drop < v.size(); ++drop) {
            face.clear();
            for (std::size_t i = 0; i < v.size(); ++i)
                if (i != drop) face.push_back(v[i]);
            auto it = row_index.find(face);
            if (it == row_index.end()) throw consistency_error("betti_at_scale: missing face");
            rows[it->second][c / 64] ^= std::uint64_t{1} << (c % 64);
        }
    }
    return gf2_rank(std::move(rows), cols.size());
}

}  // namespace detail

/// beta_k of the sub-complex {value <= eps}: nullity(d_k) - rank(d_{k+1}),
/// by dense Gaussian elimination over Z/2.
inline BettiProfile betti_at_scale(const Filtration& filtration, double eps, std::size_t k) {
    if (std::isnan(eps) || eps < 0.0) throw std::invalid_argument("betti_at_scale: eps must be >= 0");
    if (k + 1 > filtration.max_dim())
        throw std::invalid_argument("betti_at_scale: dimension " + std::to_string(k) +
                                    " needs simplices of dimension " + std::to_string(k + 1) +
                                    " (max_dim is " + std::to_string(filtration.max_dim()) + ")");
    std::size_t count_k = 0;
    for (const auto& s : filtration.simplices())
        if (s.value <= eps && s.dim() == k) ++count_k;
    BettiProfile p;
    p.dim = k;
    p.rank_cycles = count_k - detail::boundary_rank(filtration, eps, k);
    p.rank_boundaries = detail::boundary_rank(filtration, eps, k + 1);
    if (p.rank_boundaries > p.rank_cycles) throw consistency_error("betti_at_scale: rank(B) > rank(Z)");
    p.betti = p.rank_cycles - p.rank_boundaries;
    return p;
}

inline void write_diagrams(std::ostream& out, const std::vector<PersistenceDiagram>& diagrams) {
    csv::write_row(out, {"dim", "birth", "death", "essential"});
    for (const auto& d : diagrams)
        for (const auto& iv : d.pairs)
            csv::write_row(out, {std::to_string(d.dim), csv::format(iv.birth), csv::format(iv.death),
                                 iv.essential ? "1" : "0"});
}

/// Inverse of write_diagrams. Essential counts are rebuilt from the flags, so
/// essential classes born at the cap (dropped as zero-length) are not recovered.
inline std::vector<PersistenceDiagram> read_diagrams(std::istream& in, const std::string& name = "<diagrams>") {
    csv::reader rd(in, name);
    auto header = rd.next();
    if (!header || *header != csv::row{"dim", "birth", "death", "essential"})
        throw parse_error(name, 1, "expected header dim,birth,death,essential");
    std::vector<PersistenceDiagram> out;
    while (auto row = rd.next()) {
        if (csv::is_blank(*row)) continue;
        if (row->size() != 4) throw parse_error(name, rd.line(), "expected 4 fields");
        auto dim = csv::parse_int<std::size_t>((*row)[0]);
        auto b = csv::parse_double((*row)[1]);
        auto d = csv::parse_double((*row)[2]);
        auto e = csv::parse_int<int>((*row)[3]);
        if (!dim || !b || !d || !e || (*e != 0 && *e != 1)) throw parse_error(name, rd.line(), "malformed interval");
        while (out.size() <= *dim) out.push_back({out.size(), {}, 0});
        out[*dim].pairs.push_back({*b, *d, *e == 1});
        if (*e == 1) ++out[*dim].essential;
    }
    return out;
}

}  // namespace topothresh
