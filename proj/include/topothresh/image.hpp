#pragma once

// Persistence images: Gaussian-smoothed, persistence-weighted diagram
// densities integrated over a fixed pixel grid in birth-persistence space.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csv.hpp"
#include "homology.hpp"

namespace topothresh {

enum class Weighting { linear_persistence };

struct ImageConfig {
    std::size_t rows = 20;  ///< persistence axis
    std::size_t cols = 20;  ///< birth axis
    double sigma = 0.1;
    Weighting weighting = Weighting::linear_persistence;
    double birth_lo = 0.0;
    double birth_hi = 1.0;
    double pers_lo = 0.0;
    double pers_hi = 1.0;
    double p_norm = 2.0;

    std::size_t pixels() const noexcept { return rows * cols; }

    void validate() const {
        if (rows == 0 || cols == 0) throw std::invalid_argument("ImageConfig: resolution must be positive");
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("ImageConfig: sigma must be > 0");
        if (!(birth_hi > birth_lo) || !(pers_hi > pers_lo) || !std::isfinite(birth_lo) ||
            !std::isfinite(birth_hi) || !std::isfinite(pers_lo) || !std::isfinite(pers_hi))
            throw std::invalid_argument("ImageConfig: degenerate range");
        if (!(p_norm >= 1.0)) throw std::invalid_argument("ImageConfig: p must be >= 1");
    }

    friend bool operator==(const ImageConfig&, const ImageConfig&) = default;
};

/// Point in birth-persistence coordinates.
struct BirthPersistence {
    double birth;
    double persistence;

    friend bool operator==(const BirthPersistence&, const BirthPersistence&) = default;
};

struct PersistenceImage {
    std::size_t dim = 0;
    /// Row-major: index = row * cols + col, row over persistence, col over birth.
    std::vector<double> values;
    ImageConfig config;
};

inline std::vector<BirthPersistence> birth_persistence_transform(std::span<const Interval> pairs) {
    std::vector<BirthPersistence> out;
    out.reserve(pairs.size());
    for (const auto& iv : pairs) {
        if (!(iv.death > iv.birth)) throw std::invalid_argument("birth_persistence_transform: death <= birth");
        out.push_back({iv.birth, iv.death - iv.birth});
    }
    return out;
}

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Gaussian mass of N(center, sigma^2) in each of `bins` equal cells of [lo, hi].
inline std::vector<double> axis_masses(double center, double sigma, double lo, double hi, std::size_t bins) {
    std::vector<double> cdf(bins + 1);
    const double step = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) {
        const double edge = i == bins ? hi : lo + step * static_cast<double>(i);
        cdf[i] = normal_cdf((edge - center) / sigma);
    }
    std::vector<double> mass(bins);
    for (std::size_t i = 0; i < bins; ++i) mass[i] = std::max(0.0, cdf[i + 1] - cdf[i]);
    return mass;
}

}  // namespace detail

/// Adds g(p) times the pixel-integrated Gaussian at each transformed point.
/// Mass outside the configured range is truncated.
inline PersistenceImage persistence_image(const PersistenceDiagram& diagram, const ImageConfig& config) {
    config.validate();
    PersistenceImage img;
    img.dim = diagram.dim;
    img.config = config;
    img.values.assign(config.pixels(), 0.0);
    for (const auto& pt : birth_persistence_transform(diagram.pairs)) {
        const double weight = pt.persistence;  // linear in persistence, zero on the diagonal
        const auto bx = detail::axis_masses(pt.birth, config.sigma, config.birth_lo, config.birth_hi, config.cols);
        const auto py = detail::axis_masses(pt.persistence, config.sigma, config.pers_lo, config.pers_hi, config.rows);
        for (std::size_t r = 0; r < config.rows; ++r) {
            const double wr = weight * py[r];
            if (wr == 0.0) continue;
            double* row = img.values.data() + r * config.cols;
            for (std::size_t c = 0; c < config.cols; ++c) row[c] += wr * bx[c];
        }
    }
    return img;
}

/// Concatenates images in ascending dimension.
inline std::vector<double> concat_images(std::span<const PersistenceImage> images) {
    if (images.empty()) return {};
    std::vector<const PersistenceImage*> sorted;
    for (const auto& im : images) {
        if (!(im.config == images.front().config))
            throw std::invalid_argument("concat_images: images use different configurations");
        if (im.values.size() != im.config.pixels())
            throw std::invalid_argument("concat_images: image length does not match its resolution");
        sorted.push_back(&im);
    }
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->dim < b->dim; });
    std::vector<double> out;
    out.reserve(images.size() * images.front().config.pixels());
    for (auto* im : sorted) out.insert(out.end(), im->values.begin(), im->values.end());
    return out;
}

inline double p_norm(std::span<const double> v, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("p_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    if (p == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s, 1.0 / p);
}

inline double image_distance(std::span<const double> a, std::span<const double> b, double p = 2.0) {
    if (a.size() != b.size())
        throw std::invalid_argument("image_distance: length mismatch (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    return p_norm(diff, p);
}

/// Image as a rows x cols CSV matrix.
inline void write_image(std::ostream& out, const PersistenceImage& img) {
    const auto& c = img.config;
    for (std::size_t r = 0; r < c.rows; ++r) {
        csv::row row;
        for (std::size_t k = 0; k < c.cols; ++k) row.push_back(csv::format(img.values[r * c.cols + k]));
        csv::write_row(out, row);
    }
}

}  // namespace topothresh
