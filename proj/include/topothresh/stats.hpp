#pragma once

// Ensemble statistics over a populated grid and normalized-Laplacian spectra.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "corpus.hpp"
#include "image.hpp"
#include "stability.hpp"

namespace topothresh {

/// Entrywise mean of the dimension-k image block over all cells.
inline std::vector<double> mean_image(const ParameterGrid& grid, std::size_t k) {
    if (grid.size() == 0) throw std::invalid_argument("mean_image: empty grid");
    if (k < 1 || k > grid.k_max()) throw std::out_of_range("mean_image: k outside 1..k_max");
    std::vector<double> mean(grid.block(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto block = grid.image_block(i, k);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += block[j];
    }
    const double n = static_cast<double>(grid.size());
    for (auto& m : mean) m /= n;
    return mean;
}

/// Two-dimension higher-order variance:
/// (1/(N-1)) sum_i [a_i^2 + c_i^2 - 2 a_i c_i], with a and c the mean-shifted
/// dimension-1 and dimension-2 blocks.
inline double higher_order_variance(std::span<const double> block1, std::span<const double> block2,
                                    std::span<const double> mean1, std::span<const double> mean2) {
    const auto n = block1.size();
    if (block2.size() != n || mean1.size() != n || mean2.size() != n)
        throw std::invalid_argument("higher_order_variance: block length mismatch");
    if (n < 2) throw std::invalid_argument("higher_order_variance: need N >= 2");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = block1[i] - mean1[i];
        const double c = block2[i] - mean2[i];
        s += a * a + c * c - 2.0 * a * c;
    }
    return s / static_cast<double>(n - 1);
}

/// (alpha / k_max) sum_k ||block_k - mean_k||_p^2. alpha defaults to 1/(N-1).
inline double alt_variance(std::span<const std::span<const double>> blocks,
                           std::span<const std::vector<double>> means, double p = 2.0, double alpha = -1.0) {
    if (blocks.empty() || blocks.size() != means.size())
        throw std::invalid_argument("alt_variance: need one mean per block");
    const auto n = blocks.front().size();
    if (alpha < 0.0) {
        if (n < 2) throw std::invalid_argument("alt_variance: need N >= 2 for the default scale");
        alpha = 1.0 / static_cast<double>(n - 1);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const double d = image_distance(blocks[k], means[k], p);
        s += d * d;
    }
    return alpha / static_cast<double>(blocks.size()) * s;
}

enum class VarianceKind { cross_term, p_norm };

struct VarianceField {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    VarianceKind kind = VarianceKind::cross_term;
};

/// The cross-term form is only defined for k_max = 2.
inline VarianceField variance_field(const ParameterGrid& grid, VarianceKind kind, double p = 2.0) {
    if (kind == VarianceKind::cross_term && grid.k_max() != 2)
        throw std::invalid_argument("variance_field: cross-term variance needs k_max = 2; use p_norm");
    std::vector<std::vector<double>> means;
    for (std::size_t k = 1; k <= grid.k_max(); ++k) means.push_back(mean_image(grid, k));

    VarianceField field{grid.shape(), std::vector<double>(grid.size()), kind};
    std::vector<std::span<const double>> blocks(grid.k_max());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (kind == VarianceKind::cross_term) {
            field.values[i] = higher_order_variance(grid.image_block(i, 1), grid.image_block(i, 2), means[0], means[1]);
        } else {
            for (std::size_t k = 1; k <= grid.k_max(); ++k) blocks[k - 1] = grid.image_block(i, k);
            field.values[i] = alt_variance(blocks, means, p);
        }
    }
    return field;
}

enum class SpectrumWeighting { edge_weight, unit };

struct Spectrum {
    /// Ascending; one per non-isolated vertex.
    std::vector<double> eigenvalues;

    /// The `count` largest eigenvalues, largest first.
    std::vector<double> largest(std::size_t count) const {
        std::vector<double> out(eigenvalues.rbegin(), eigenvalues.rend());
        if (out.size() > count) out.resize(count);
        return out;
    }
};

/// Eigenvalues of D^{-1/2} (D - A) D^{-1/2} after dropping zero-degree vertices.
inline Spectrum laplacian_spectrum(const ConceptNetwork& network,
                                   SpectrumWeighting weighting = SpectrumWeighting::edge_weight) {
    const auto n = network.node_count();
    std::vector<double> degree(n, 0.0);
    auto w_of = [&](const ConceptEdge& e) { return weighting == SpectrumWeighting::unit ? 1.0 : e.weight; };
    for (const auto& e : network.edges) {
        const double w = w_of(e);
        if (w < 0.0) throw std::invalid_argument("laplacian_spectrum: negative edge weight");
        degree[e.a] += w;
        degree[e.b] += w;
    }
    std::vector<long> index(n, -1);
    long m = 0;
    for (std::size_t v = 0; v < n; ++v)
        if (degree[v] > 0.0) index[v] = m++;
    if (m == 0) throw std::invalid_argument("laplacian_spectrum: every vertex is isolated");

    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(m, m);
    for (const auto& e : network.edges) {
        const double w = w_of(e);
        if (w == 0.0) continue;
        const long i = index[e.a], j = index[e.b];
        const double v = -w / std::sqrt(degree[e.a] * degree[e.b]);
        L(i, j) += v;
        L(j, i) += v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("laplacian_spectrum: eigensolver failed");
    // The spectrum lies in [0, 2]; values within rounding distance of either
    // end are snapped onto it.
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(m);
    Spectrum s;
    for (long i = 0; i < m; ++i) {
        double x = solver.eigenvalues()[i];
        if (std::abs(x) <= tol) x = 0.0;
        if (std::abs(x - 2.0) <= tol) x = 2.0;
        s.eigenvalues.push_back(x);
    }
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
    return s;
}

}  // namespace topothresh
