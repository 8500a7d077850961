#pragma once

// Deterministic synthetic corpora: a Zipf-distributed background of concept
// mentions plus planted co-appearance cycles (H1) and hollow octahedra (H2)
// at controlled concept frequencies.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"

namespace topothresh {

enum class PlantedKind { cycle, octahedron };

struct PlantedStructure {
    PlantedKind kind = PlantedKind::cycle;
    /// tau(v) of every vertex; must be at least the vertex degree in the structure.
    std::size_t frequency = 0;
};

struct SyntheticConfig {
    std::uint64_t seed = 7;
    std::size_t articles = 1500;
    std::size_t background_concepts = 300;
    double zipf_exponent = 1.05;
    std::size_t max_concepts_per_article = 3;
    int year_min = 1990;
    int year_max = 2020;
    /// Evenly spread on a log scale between the frequency bounds below.
    std::size_t cycles = 8;
    std::size_t octahedra = 4;
    std::size_t planted_min_frequency = 5;
    std::size_t planted_max_frequency = 60;
    /// Used instead of the generated list when non-empty.
    std::vector<PlantedStructure> planted;
};

namespace detail {

class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    int year(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

private:
    std::mt19937_64 engine_;
};

inline std::string padded(std::size_t v, int width) {
    auto s = std::to_string(v);
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
    return s;
}

inline std::vector<std::pair<int, int>> structure_edges(PlantedKind kind) {
    if (kind == PlantedKind::cycle) return {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
    // octahedron K_{2,2,2}: antipodal pairs (0,1), (2,3), (4,5) are not joined
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b)
            if (!(a % 2 == 0 && b == a + 1)) edges.emplace_back(a, b);
    return edges;
}

}  // namespace detail

inline std::vector<PlantedStructure> planted_structures(const SyntheticConfig& cfg) {
    if (!cfg.planted.empty()) return cfg.planted;
    std::vector<PlantedStructure> out;
    auto spread = [&](std::size_t count, PlantedKind kind, std::size_t floor_freq) {
        const double lo = static_cast<double>(std::max(cfg.planted_min_frequency, floor_freq));
        const double hi = static_cast<double>(std::max<std::size_t>(cfg.planted_max_frequency, static_cast<std::size_t>(lo)));
        for (std::size_t i = 0; i < count; ++i) {
            const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            const double f = std::round(lo * std::pow(hi / lo, t));
            out.push_back({kind, static_cast<std::size_t>(f)});
        }
    };
    spread(cfg.cycles, PlantedKind::cycle, 2);
    spread(cfg.octahedra, PlantedKind::octahedron, 4);
    return out;
}

/// Generates the corpus; identical configs yield identical record lists.
inline std::vector<CorpusRecord> gen_synthetic(const SyntheticConfig& cfg) {
    if (cfg.year_min >= cfg.year_max) throw std::invalid_argument("gen_synthetic: need year_min < year_max");
    if (cfg.max_concepts_per_article < 1) throw std::invalid_argument("gen_synthetic: max_concepts_per_article < 1");
    detail::SplitRng rng(cfg.seed);

    struct Article {
        int year;
        std::vector<std::string> concepts;
    };
    std::vector<Article> articles;

    if (cfg.articles > 0 && cfg.background_concepts > 0) {
        std::vector<double> cumulative(cfg.background_concepts);
        double total = 0.0;
        for (std::size_t r = 0; r < cfg.background_concepts; ++r) {
            total += 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);
            cumulative[r] = total;
        }
        for (std::size_t a = 0; a < cfg.articles; ++a) {
            Article art{rng.year(cfg.year_min, cfg.year_max), {}};
            const auto k = 1 + rng.below(cfg.max_concepts_per_article);
            for (std::size_t j = 0; j < k; ++j) {
                const double u = rng.unit() * total;
                const auto r = static_cast<std::size_t>(
                    std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
                art.concepts.push_back("concept " + detail::padded(std::min(r, cfg.background_concepts - 1), 4));
            }
            articles.push_back(std::move(art));
        }
    }

    const auto planted = planted_structures(cfg);
    std::size_t cycle_no = 0, octa_no = 0;
    for (const auto& s : planted) {
        const bool cyc = s.kind == PlantedKind::cycle;
        const auto prefix = cyc ? "loop " + detail::padded(cycle_no++, 2) : "void " + detail::padded(octa_no++, 2);
        const auto edges = detail::structure_edges(s.kind);
        const int vertices = cyc ? 4 : 6;
        const std::size_t degree = cyc ? 2 : 4;
        if (s.frequency < degree)
            throw std::invalid_argument("gen_synthetic: planted frequency below structure degree");
        auto name = [&](int v) { return prefix + " v" + std::to_string(v); };
        for (auto [a, b] : edges) articles.push_back({rng.year(cfg.year_min, cfg.year_max), {name(a), name(b)}});
        for (int v = 0; v < vertices; ++v)
            for (std::size_t extra = degree; extra < s.frequency; ++extra)
                articles.push_back({rng.year(cfg.year_min, cfg.year_max), {name(v)}});
    }

    // Pin the corpus year span so edge weights use the configured range.
    if (!articles.empty()) {
        articles.front().year = cfg.year_min;
        articles.back().year = cfg.year_max;
    }

    std::vector<CorpusRecord> records;
    for (std::size_t a = 0; a < articles.size(); ++a) {
        auto& art = articles[a];
        std::sort(art.concepts.begin(), art.concepts.end());
        art.concepts.erase(std::unique(art.concepts.begin(), art.concepts.end()), art.concepts.end());
        for (const auto& c : art.concepts) records.push_back({"a" + detail::padded(a, 6), art.year, c, 0});
    }
    std::map<std::string, std::size_t> tau;
    for (const auto& r : records) ++tau[r.label];
    for (auto& r : records) r.frequency = tau[r.label];
    return records;
}

}  // namespace topothresh
