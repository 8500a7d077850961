#pragma once

// Flag (clique) filtrations of weighted graphs.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "csv.hpp"
#include "errors.hpp"

namespace topothresh {

using vertex_t = std::uint32_t;

struct Simplex {
    /// Strictly increasing vertex indices; a k-simplex has k+1 of them.
    std::vector<vertex_t> vertices;
    double value = 0.0;

    std::size_t dim() const noexcept { return vertices.size() - 1; }

    friend bool operator==(const Simplex&, const Simplex&) = default;
};

/// Filtration order: value, then dimension, then lexicographic vertices.
inline bool filtration_less(const Simplex& x, const Simplex& y) {
    if (x.value != y.value) return x.value < y.value;
    if (x.vertices.size() != y.vertices.size()) return x.vertices.size() < y.vertices.size();
    return x.vertices < y.vertices;
}

class Filtration {
public:
    Filtration() = default;

    /// Sorts `simplices` into filtration order and checks closure: every
    /// codimension-1 face is present with a value no larger than its coface.
    static Filtration from_simplices(std::vector<Simplex> simplices, std::size_t max_dim) {
        std::set<std::vector<vertex_t>> keys;
        std::size_t vertex_count = 0;
        for (const auto& s : simplices) {
            if (s.vertices.empty()) throw consistency_error("simplex without vertices");
            if (s.dim() > max_dim) throw consistency_error("simplex dimension exceeds max_dim");
            if (!std::is_sorted(s.vertices.begin(), s.vertices.end()) ||
                std::adjacent_find(s.vertices.begin(), s.vertices.end()) != s.vertices.end())
                throw consistency_error("simplex vertices must be strictly increasing");
            if (!(s.value >= 0.0)) throw consistency_error("simplex value must be non-negative");
            if (!keys.insert(s.vertices).second) throw consistency_error("duplicate simplex");
            if (s.dim() == 0) ++vertex_count;
        }
        std::sort(simplices.begin(), simplices.end(), filtration_less);

        Filtration f;
        f.max_dim_ = max_dim;
        f.vertex_count_ = vertex_count;
        f.simplices_ = std::move(simplices);
        // Faces must precede cofaces in the sorted order.
        std::set<std::vector<vertex_t>> placed;
        std::vector<vertex_t> face;
        for (const auto& s : f.simplices_) {
            if (s.dim() > 0) {
                for (std::size_t drop = 0; drop < s.vertices.size(); ++drop) {
                    face.clear();
                    for (std::size_t i = 0; i < s.vertices.size(); ++i)
                        if (i != drop) face.push_back(s.vertices[i]);
                    if (!placed.count(face)) throw consistency_error("simplex appears before one of its faces");
                }
            }
            placed.insert(s.vertices);
        }
        return f;
    }

    const std::vector<Simplex>& simplices() const noexcept { return simplices_; }
    std::size_t size() const noexcept { return simplices_.size(); }
    bool empty() const noexcept { return simplices_.empty(); }
    std::size_t max_dim() const noexcept { return max_dim_; }
    std::size_t vertex_count() const noexcept { return vertex_count_; }
    const Simplex& operator[](std::size_t i) const { return simplices_[i]; }

    std::size_t count(std::size_t dim) const {
        return static_cast<std::size_t>(std::count_if(simplices_.begin(), simplices_.end(),
                                                      [dim](const Simplex& s) { return s.dim() == dim; }));
    }

    double max_value() const noexcept { return simplices_.empty() ? 0.0 : simplices_.back().value; }

private:
    friend Filtration flag_filtration(const ConceptNetwork&, std::size_t);

    std::vector<Simplex> simplices_;
    std::size_t max_dim_ = 0;
    std::size_t vertex_count_ = 0;
};

namespace detail {

struct Neighbor {
    vertex_t v;
    double w;
};

inline double weight_between(const std::vector<std::vector<Neighbor>>& upper, vertex_t a, vertex_t b) {
    const auto& list = upper[a];
    auto it = std::lower_bound(list.begin(), list.end(), b,
                               [](const Neighbor& n, vertex_t key) { return n.v < key; });
    return it->w;
}

inline void expand_cliques(const std::vector<std::vector<Neighbor>>& upper, std::vector<vertex_t>& clique,
                           double value, const std::vector<vertex_t>& candidates, std::size_t max_dim,
                           std::vector<Simplex>& out) {
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const vertex_t c = candidates[ci];
        double v = value;
        for (auto u : clique) v = std::max(v, weight_between(upper, u, c));
        clique.push_back(c);
        out.push_back({clique, v});
        if (clique.size() <= max_dim) {
            // candidates after c that are also higher neighbours of c
            std::vector<vertex_t> next;
            const auto& nc = upper[c];
            auto it = nc.begin();
            for (std::size_t cj = ci + 1; cj < candidates.size(); ++cj) {
                const vertex_t x = candidates[cj];
                while (it != nc.end() && it->v < x) ++it;
                if (it == nc.end()) break;
                if (it->v == x) next.push_back(x);
            }
            if (!next.empty()) expand_cliques(upper, clique, v, next, max_dim, out);
        }
        clique.pop_back();
    }
}

}  // namespace detail

/// Flag filtration of `network` through dimension `max_dim`. Vertices enter at
/// 0, edges at their weight, and every larger clique at its largest edge weight.
/// Homology through dimension k needs max_dim = k + 1.
inline Filtration flag_filtration(const ConceptNetwork& network, std::size_t max_dim) {
    if (max_dim < 1) throw std::invalid_argument("flag_filtration: max_dim must be >= 1");
    const auto n = network.node_count();
    std::vector<std::vector<detail::Neighbor>> upper(n);
    for (const auto& e : network.edges) {
        if (e.a == e.b) throw std::invalid_argument("flag_filtration: self-loop");
        if (e.a >= n || e.b >= n) throw std::invalid_argument("flag_filtration: edge references missing node");
        const auto lo = static_cast<vertex_t>(std::min(e.a, e.b));
        const auto hi = static_cast<vertex_t>(std::max(e.a, e.b));
        upper[lo].push_back({hi, e.weight});
    }
    for (auto& list : upper) {
        std::sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.v < y.v; });
        if (std::adjacent_find(list.begin(), list.end(), [](const auto& x, const auto& y) {
                return x.v == y.v;
            }) != list.end())
            throw std::invalid_argument("flag_filtration: parallel edges");
    }

    std::vector<Simplex> out;
    out.reserve(n + network.edge_count());
    std::vector<vertex_t> clique;
    std::vector<vertex_t> candidates;
    for (vertex_t v = 0; v < n; ++v) {
        out.push_back({{v}, 0.0});
        candidates.clear();
        for (const auto& nb : upper[v]) candidates.push_back(nb.v);
        clique.assign(1, v);
        detail::expand_cliques(upper, clique, 0.0, candidates, max_dim, out);
    }
    std::sort(out.begin(), out.end(), filtration_less);

    Filtration f;
    f.simplices_ = std::move(out);
    f.max_dim_ = max_dim;
    f.vertex_count_ = n;
    return f;
}

/// Debug dump: `value dim v0 v1 ...` per simplex in filtration order.
inline void write_filtration(std::ostream& out, const Filtration& f) {
    for (const auto& s : f.simplices()) {
        out << csv::format(s.value) << ' ' << s.dim();
        for (auto v : s.vertices) out << ' ' << v;
        out << '\n';
    }
}

}  // namespace topothresh
