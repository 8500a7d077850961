#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "topothresh/image.hpp"

using namespace topothresh;
using topothresh::testing::gaussian_mass_quadrature;
using topothresh::testing::image_perturbation_bound;

namespace {

PersistenceDiagram diagram(std::size_t dim, std::vector<Interval> pairs) { return {dim, std::move(pairs), 0}; }

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST(Transform, Examples) {
    const std::vector<Interval> pairs{{0.2, 0.6, false}, {0.0, 1.0, true}};
    const auto t = birth_persistence_transform(pairs);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0].birth, 0.2);
    EXPECT_DOUBLE_EQ(t[0].persistence, 0.4);
    EXPECT_EQ(t[1], (BirthPersistence{0.0, 1.0}));
    EXPECT_TRUE(birth_persistence_transform({}).empty());
    const std::vector<Interval> bad{{0.5, 0.5, false}};
    EXPECT_THROW(birth_persistence_transform(bad), std::invalid_argument);
}

TEST(Image, EmptyDiagramIsZero) {
    const auto img = persistence_image(diagram(1, {}), {});
    ASSERT_EQ(img.values.size(), 400u);
    for (double v : img.values) EXPECT_EQ(v, 0.0);
}

TEST(Image, SinglePointMassMatchesQuadrature) {
    const auto img = persistence_image(diagram(1, {{0.2, 0.6, false}}), {});
    const double expected = 0.4 * gaussian_mass_quadrature(0.2, 0.4, 0.1, 0, 1, 0, 1);
    EXPECT_NEAR(total(img.values), expected, 1e-6);
}

TEST(Image, PixelValuesMatchQuadrature) {
    ImageConfig cfg;
    const auto img = persistence_image(diagram(1, {{0.2, 0.6, false}}), cfg);
    // rows run over persistence, columns over birth
    for (auto [r, c] : std::vector<std::pair<std::size_t, std::size_t>>{{8, 4}, {7, 3}, {12, 0}, {0, 19}}) {
        const double b0 = c * 0.05, p0 = r * 0.05;
        const double expected = 0.4 * gaussian_mass_quadrature(0.2, 0.4, 0.1, b0, b0 + 0.05, p0, p0 + 0.05, 200);
        EXPECT_NEAR(img.values[r * cfg.cols + c], expected, 1e-10) << r << "," << c;
    }
}

TEST(Image, RowsIndexPersistenceColumnsIndexBirth) {
    const auto img = persistence_image(diagram(1, {{0.02, 0.99, false}}), {});
    const auto peak = std::max_element(img.values.begin(), img.values.end()) - img.values.begin();
    EXPECT_EQ(peak / 20, 19);
    EXPECT_EQ(peak % 20, 0);
}

TEST(Image, DuplicatedPointIsExactlyDouble) {
    const auto one = persistence_image(diagram(1, {{0.2, 0.6, false}}), {});
    const auto two = persistence_image(diagram(1, {{0.2, 0.6, false}, {0.2, 0.6, false}}), {});
    for (std::size_t i = 0; i < one.values.size(); ++i) EXPECT_NEAR(two.values[i], 2 * one.values[i], 1e-12);
}

TEST(Image, LinearInMultisetUnion) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Interval> x, y;
        for (int i = 0; i < 5; ++i) {
            double b = u(rng) * 0.8, d = b + 0.01 + u(rng) * (1 - b - 0.01);
            (i % 2 ? x : y).push_back({b, d, false});
        }
        auto xy = x;
        xy.insert(xy.end(), y.begin(), y.end());
        const auto ix = persistence_image(diagram(1, x), {}), iy = persistence_image(diagram(1, y), {});
        const auto ixy = persistence_image(diagram(1, xy), {});
        for (std::size_t i = 0; i < ixy.values.size(); ++i)
            EXPECT_NEAR(ixy.values[i], ix.values[i] + iy.values[i], 1e-12);
    }
}

TEST(Image, NonNegativeAndFinite) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Interval> pairs;
        for (int i = 0; i < 10; ++i) {
            double b = u(rng), d = std::min(1.0, b + 1e-6 + u(rng));
            if (d > b) pairs.push_back({b, d, d == 1.0});
        }
        for (double v : persistence_image(diagram(2, pairs), {}).values) {
            EXPECT_GE(v, 0.0);
            EXPECT_TRUE(std::isfinite(v));
        }
    }
}

TEST(Image, PerturbationRegressionBound) {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(0, 1), shift(-0.01, 0.01);
    int checked = 0;
    while (checked < 100) {
        const double b = u(rng) * 0.9, d = b + 0.01 + u(rng) * (1 - b - 0.01);
        const double nb = std::max(0.0, b + shift(rng)), nd = std::min(1.0, d + shift(rng));
        const double delta = std::max(std::abs(nb - b), std::abs(nd - d));
        if (!(nd > nb) || delta == 0.0) continue;
        const auto a = persistence_image(diagram(1, {{b, d, false}}), {});
        const auto c = persistence_image(diagram(1, {{nb, nd, false}}), {});
        EXPECT_LE(image_distance(a.values, c.values, 1.0), image_perturbation_bound * delta);
        ++checked;
    }
}

TEST(Image, InvalidConfig) {
    ImageConfig cfg;
    cfg.sigma = 0;
    EXPECT_THROW(persistence_image(diagram(1, {}), cfg), std::invalid_argument);
    cfg = {};
    cfg.birth_hi = cfg.birth_lo;
    EXPECT_THROW(persistence_image(diagram(1, {}), cfg), std::invalid_argument);
    cfg = {};
    cfg.rows = 0;
    EXPECT_THROW(persistence_image(diagram(1, {}), cfg), std::invalid_argument);
}

TEST(Concat, TwoBlocksDimOneFirst) {
    const auto i1 = persistence_image(diagram(1, {{0.2, 0.6, false}}), {});
    const auto i2 = persistence_image(diagram(2, {{0.5, 1.0, true}}), {});
    const std::vector<PersistenceImage> imgs{i2, i1};
    const auto v = concat_images(imgs);
    ASSERT_EQ(v.size(), 800u);
    for (std::size_t i = 0; i < 400; ++i) {
        EXPECT_EQ(v[i], i1.values[i]);
        EXPECT_EQ(v[400 + i], i2.values[i]);
    }
}

TEST(Concat, ZerosAndSingleImage) {
    const std::vector<PersistenceImage> zeros{persistence_image(diagram(1, {}), {}), persistence_image(diagram(2, {}), {})};
    for (double x : concat_images(zeros)) EXPECT_EQ(x, 0.0);
    const std::vector<PersistenceImage> one{persistence_image(diagram(1, {{0.1, 0.3, false}}), {})};
    EXPECT_EQ(concat_images(one), one[0].values);
}

TEST(Concat, ConfigMismatchThrows) {
    ImageConfig other;
    other.sigma = 0.2;
    const std::vector<PersistenceImage> imgs{persistence_image(diagram(1, {}), {}), persistence_image(diagram(2, {}), other)};
    EXPECT_THROW(concat_images(imgs), std::invalid_argument);
}

TEST(Distance, Examples) {
    std::vector<double> a(800, 0.0), b(800, 0.0);
    EXPECT_EQ(image_distance(a, a, 2), 0.0);
    b[0] = 0.3;
    b[1] = 0.4;
    EXPECT_NEAR(image_distance(a, b, 2), 0.5, 1e-15);
    EXPECT_NEAR(image_distance(a, b, std::numeric_limits<double>::infinity()), 0.4, 1e-15);
    EXPECT_THROW(image_distance(a, std::vector<double>(799), 2), std::invalid_argument);
    EXPECT_THROW(image_distance(a, b, 0.5), std::invalid_argument);
}

TEST(Distance, OneNormMatchesDirectSummation) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(800), b(800);
        for (auto& x : a) x = g(rng);
        for (auto& x : b) x = g(rng);
        double direct = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) direct += std::fabs(a[i] - b[i]);
        EXPECT_NEAR(image_distance(a, b, 1.0), direct, 1e-12 * direct);
        double cubed = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) cubed += std::pow(std::fabs(a[i] - b[i]), 3.0);
        EXPECT_NEAR(image_distance(a, b, 3.0), std::cbrt(cubed), 1e-12 * direct);
    }
}
