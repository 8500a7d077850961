#pragma once

// Parameter grids of networks, the discrete tangent-field stability objective,
// and the feature-count constrained argmin over it.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "complex.hpp"
#include "corpus.hpp"
#include "errors.hpp"
#include "homology.hpp"
#include "image.hpp"

namespace topothresh {

struct PipelineConfig {
    /// Highest homology dimension vectorized; dimension 0 is never used.
    std::size_t k_max = 2;
    ImageConfig image;
    /// Death assigned to essential classes.
    double cap = 1.0;
    /// Worker threads for grid population.
    std::size_t jobs = 1;

    void validate() const {
        if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
        image.validate();
        if (!(cap > 0.0) || !std::isfinite(cap)) throw std::invalid_argument("cap must be positive and finite");
        if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    }
};

struct NetworkAnalysis {
    std::vector<PersistenceDiagram> diagrams;  ///< k = 0..k_max
    std::vector<PersistenceImage> images;      ///< k = 1..k_max
    std::vector<double> vector;                ///< concatenated images
    std::vector<std::size_t> features;         ///< f^k for k = 1..k_max
};

/// Filtration, persistence, images and feature counts for one network.
inline NetworkAnalysis analyze_network(const ConceptNetwork& network, const PipelineConfig& cfg) {
    NetworkAnalysis a;
    const auto filtration = flag_filtration(network, cfg.k_max + 1);
    a.diagrams = compute_persistence(filtration, cfg.cap);
    for (std::size_t k = 1; k <= cfg.k_max; ++k) {
        a.images.push_back(persistence_image(a.diagrams[k], cfg.image));
        a.features.push_back(a.diagrams[k].pairs.size());
    }
    a.vector = concat_images(a.images);
    return a;
}

struct GridCell {
    ThresholdPoint point;
    std::vector<double> image;
    std::vector<std::size_t> features;  ///< f^k at index k-1
    std::size_t nodes = 0;
    std::size_t edges = 0;
};

/// Dense D-dimensional lattice of cells; flat index is row-major (last axis fastest).
class ParameterGrid {
public:
    ParameterGrid() = default;

    ParameterGrid(std::vector<std::vector<double>> axes, std::size_t k_max, std::size_t block)
        : axes_(std::move(axes)), k_max_(k_max), block_(block) {
        if (axes_.empty()) throw std::invalid_argument("ParameterGrid: at least one axis required");
        std::size_t total = 1;
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            const auto& ax = axes_[d];
            if (ax.empty()) throw std::invalid_argument("ParameterGrid: axis " + std::to_string(d) + " is empty");
            for (std::size_t i = 0; i < ax.size(); ++i) {
                if (std::isnan(ax[i])) throw std::invalid_argument("ParameterGrid: NaN axis value");
                if (i && !(ax[i] > ax[i - 1]))
                    throw std::invalid_argument("ParameterGrid: axis " + std::to_string(d) +
                                                " must be strictly increasing");
            }
            shape_.push_back(ax.size());
            total *= ax.size();
        }
        cells_.resize(total);
        for (std::size_t i = 0; i < total; ++i) {
            const auto idx = multi_index(i);
            auto& pt = cells_[i].point.coords;
            for (std::size_t d = 0; d < idx.size(); ++d) pt.push_back(axes_[d][idx[d]]);
        }
    }

    const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t dims() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept { return cells_.size(); }
    std::size_t k_max() const noexcept { return k_max_; }
    /// Length of one per-dimension image block.
    std::size_t block() const noexcept { return block_; }

    GridCell& cell(std::size_t flat) { return cells_.at(flat); }
    const GridCell& cell(std::size_t flat) const { return cells_.at(flat); }
    std::vector<GridCell>& cells() noexcept { return cells_; }
    const std::vector<GridCell>& cells() const noexcept { return cells_; }

    std::vector<std::size_t> multi_index(std::size_t flat) const {
        std::vector<std::size_t> idx(shape_.size());
        for (std::size_t d = shape_.size(); d-- > 0;) {
            idx[d] = flat % shape_[d];
            flat /= shape_[d];
        }
        return idx;
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        if (idx.size() != shape_.size()) throw std::invalid_argument("flat_index: wrong number of indices");
        std::size_t flat = 0;
        for (std::size_t d = 0; d < shape_.size(); ++d) {
            if (idx[d] >= shape_[d]) throw std::out_of_range("flat_index: index out of range");
            flat = flat * shape_[d] + idx[d];
        }
        return flat;
    }

    /// Per-dimension image block of a cell (k is 1-based).
    std::span<const double> image_block(std::size_t flat, std::size_t k) const {
        const auto& img = cells_.at(flat).image;
        if (k < 1 || k > k_max_) throw std::out_of_range("image_block: k outside 1..k_max");
        return std::span<const double>(img).subspan((k - 1) * block_, block_);
    }

private:
    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> shape_;
    std::vector<GridCell> cells_;
    std::size_t k_max_ = 0;
    std::size_t block_ = 0;
};

/// Builds and analyzes the network of every cell. `make_network` maps a
/// ThresholdPoint to a ConceptNetwork and must be safe to call concurrently.
/// Results are stored by cell index, so the grid does not depend on `cfg.jobs`.
template <class NetworkFactory>
ParameterGrid populate_grid(std::vector<std::vector<double>> axes, NetworkFactory&& make_network,
                            const PipelineConfig& cfg) {
    cfg.validate();
    ParameterGrid grid(std::move(axes), cfg.k_max, cfg.image.pixels());

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(grid.size());
    auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            auto& cell = grid.cell(i);
            try {
                const ConceptNetwork net = make_network(std::as_const(cell.point));
                auto analysis = analyze_network(net, cfg);
                cell.image = std::move(analysis.vector);
                cell.features = std::move(analysis.features);
                cell.nodes = net.node_count();
                cell.edges = net.edge_count();
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const auto workers = std::min(cfg.jobs, grid.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    }

    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
            throw cell_error(grid.multi_index(i), grid.cell(i).point.coords, e.what());
        }
    }
    return grid;
}

inline ParameterGrid populate_grid(const CorpusIndex& corpus, std::vector<std::vector<double>> axes,
                                   const PipelineConfig& cfg) {
    return populate_grid(std::move(axes), [&](const ThresholdPoint& p) { return corpus.network(p); }, cfg);
}

/// ||a - b||_p / |theta_a - theta_b|.
inline double directional_derivative(std::span<const double> a, std::span<const double> b, double theta_a,
                                     double theta_b, double p = 2.0) {
    if (theta_a == theta_b) throw std::invalid_argument("directional_derivative: equal parameter values");
    return image_distance(a, b, p) / std::abs(theta_a - theta_b);
}

/// Per axis, the sum of quotients toward each existing neighbour, halved when
/// both neighbours exist; the result is the p-norm of those per-axis sums.
inline double averaged_gradient_magnitude(const ParameterGrid& grid, std::size_t flat, double p = 2.0) {
    const auto& shape = grid.shape();
    if (std::all_of(shape.begin(), shape.end(), [](auto n) { return n == 1; }))
        throw std::invalid_argument("averaged_gradient_magnitude: grid has no neighbours in any direction");
    auto idx = grid.multi_index(flat);
    const auto& here = grid.cell(flat);
    std::vector<double> per_axis(grid.dims(), 0.0);
    for (std::size_t d = 0; d < grid.dims(); ++d) {
        const bool has_prev = idx[d] > 0;
        const bool has_next = idx[d] + 1 < shape[d];
        const double divisor = (has_prev && has_next) ? 2.0 : 1.0;
        const double theta = grid.axes()[d][idx[d]];
        double sum = 0.0;
        for (int step : {-1, +1}) {
            if ((step < 0 && !has_prev) || (step > 0 && !has_next)) continue;
            auto nidx = idx;
            nidx[d] = static_cast<std::size_t>(static_cast<long long>(idx[d]) + step);
            const auto& there = grid.cell(grid.flat_index(nidx));
            sum += directional_derivative(here.image, there.image, theta, grid.axes()[d][nidx[d]], p) / divisor;
        }
        per_axis[d] = sum;
    }
    return p_norm(per_axis, p);
}

struct StabilityField {
    std::vector<std::size_t> shape;
    std::vector<double> values;  ///< flat, same indexing as the grid
};

inline StabilityField stability_field(const ParameterGrid& grid, double p = 2.0) {
    StabilityField field{grid.shape(), std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) field.values[i] = averaged_gradient_magnitude(grid, i, p);
    return field;
}

/// Minimum feature count for one homology dimension, absolute or as a
/// fraction of F_k (the largest count over the grid).
struct Delta {
    double value = 0.0;
    bool fractional = false;

    static Delta absolute(double v) { return {v, false}; }
    static Delta fraction(double v) { return {v, true}; }

    friend bool operator==(const Delta&, const Delta&) = default;
};

struct Constraints {
    std::vector<Delta> deltas;  ///< index k-1

    /// Absolute thresholds given F_k.
    std::vector<double> resolve(std::span<const std::size_t> maxima) const {
        if (deltas.size() != maxima.size())
            throw std::invalid_argument("Constraints: expected " + std::to_string(maxima.size()) +
                                        " deltas, got " + std::to_string(deltas.size()));
        std::vector<double> out;
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            const auto& d = deltas[k];
            if (!(d.value >= 0.0) || !std::isfinite(d.value))
                throw std::invalid_argument("Constraints: delta must be finite and >= 0");
            if (d.fractional && d.value > 1.0) throw std::invalid_argument("Constraints: fraction above 1");
            out.push_back(d.fractional ? d.value * static_cast<double>(maxima[k]) : d.value);
        }
        return out;
    }

    static Constraints none(std::size_t k_max) { return {std::vector<Delta>(k_max, Delta::absolute(0.0))}; }
};

/// F_k = max over cells of f^k, for k = 1..k_max.
inline std::vector<std::size_t> feature_maxima(const ParameterGrid& grid) {
    std::vector<std::size_t> F(grid.k_max(), 0);
    for (const auto& c : grid.cells())
        for (std::size_t k = 0; k < F.size() && k < c.features.size(); ++k) F[k] = std::max(F[k], c.features[k]);
    return F;
}

inline bool is_feasible(const GridCell& cell, std::span<const double> deltas) {
    const bool any_positive = std::any_of(deltas.begin(), deltas.end(), [](double d) { return d > 0.0; });
    if (any_positive && cell.nodes == 0) return false;
    for (std::size_t k = 0; k < deltas.size(); ++k)
        if (static_cast<double>(cell.features.at(k)) < deltas[k]) return false;
    return true;
}

struct Selection {
    std::size_t flat = 0;
    std::vector<std::size_t> index;
    ThresholdPoint point;
    double value = 0.0;
    std::size_t feasible_count = 0;
    std::vector<std::size_t> maxima;  ///< F_k
    std::vector<double> deltas;       ///< resolved delta_k
};

/// Field argmin over cells with f^k >= delta_k for every k. Ties go to the
/// lexicographically smallest index tuple (the smallest flat index).
inline Selection optimize(const ParameterGrid& grid, const StabilityField& field, const Constraints& constraints) {
    if (field.values.size() != grid.size()) throw std::invalid_argument("optimize: field does not match grid");
    Selection sel;
    sel.maxima = feature_maxima(grid);
    sel.deltas = constraints.resolve(sel.maxima);

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!is_feasible(grid.cell(i), sel.deltas)) continue;
        ++sel.feasible_count;
        if (!best || field.values[i] < field.values[*best]) best = i;
    }
    if (!best) {
        std::vector<std::size_t> binding;
        for (std::size_t k = 0; k < sel.deltas.size(); ++k)
            if (static_cast<double>(sel.maxima[k]) < sel.deltas[k] ||
                (sel.maxima[k] == 0 && sel.deltas[k] > 0.0))
                binding.push_back(k + 1);
        if (binding.empty())
            for (std::size_t k = 0; k < sel.deltas.size(); ++k)
                if (sel.deltas[k] > 0.0) binding.push_back(k + 1);
        throw infeasible_error(std::move(binding), sel.deltas, sel.maxima);
    }
    sel.flat = *best;
    sel.index = grid.multi_index(*best);
    sel.point = grid.cell(*best).point;
    sel.value = field.values[*best];
    return sel;
}

/// Fractions of F_k swept for every k.
inline std::vector<double> default_delta_fractions() {
    return {0.01, 0.11, 0.21, 0.31, 0.41, 0.51, 0.61, 0.71, 0.81, 0.91};
}

struct SweepEntry {
    std::vector<Delta> deltas;
    std::optional<Selection> selection;  ///< empty when infeasible
    std::vector<double> resolved;
};

/// Optimizes for every combination in the Cartesian product of `lists`
/// (one list per k). The first list varies slowest.
inline std::vector<SweepEntry> sweep_hyperparameters(const ParameterGrid& grid, const StabilityField& field,
                                                     const std::vector<std::vector<Delta>>& lists) {
    if (lists.size() != grid.k_max())
        throw std::invalid_argument("sweep_hyperparameters: need one delta list per homology dimension");
    std::size_t total = 1;
    for (const auto& l : lists) {
        if (l.empty()) throw std::invalid_argument("sweep_hyperparameters: empty delta list");
        total *= l.size();
    }
    const auto maxima = feature_maxima(grid);
    std::vector<SweepEntry> out;
    out.reserve(total);
    for (std::size_t n = 0; n < total; ++n) {
        SweepEntry e;
        std::size_t rem = n;
        e.deltas.resize(lists.size());
        for (std::size_t k = lists.size(); k-- > 0;) {
            e.deltas[k] = lists[k][rem % lists[k].size()];
            rem /= lists[k].size();
        }
        Constraints c{e.deltas};
        e.resolved = c.resolve(maxima);
        try {
            e.selection = optimize(grid, field, c);
        } catch (const infeasible_error&) {
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace topothresh
