// Acceptance runner: one PASS/FAIL line per criterion; any hard failure gives a nonzero exit.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "test_graphs.hpp"
#include "topothresh/topothresh.hpp"

using namespace topothresh;
using namespace topothresh::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    bool soft_miss = false;  // a soft expectation failed; reported but not gating
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (pass) detail = what;
        pass = false;
    }
    void expect_soft(bool ok, const std::string& what) {
        if (ok) return;
        soft_miss = true;
        soft_detail = what;
    }
    std::string soft_detail;
};

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("topothresh_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Synthetic corpus on disk plus a default run configuration pointing at it.
RunConfig synthetic_config(const std::string& name, std::uint64_t seed = SyntheticConfig{}.seed) {
    RunConfig cfg;
    cfg.synthetic.seed = seed;
    cfg.output_dir = scratch(name).string();
    cfg.input_path = run_synth(cfg).string();
    return cfg;
}

std::string fmt(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
}

// 1 ------------------------------------------------------------------------
Outcome five_vertex_ranks() {
    Outcome o;
    const auto f = five_vertex_complex();
    const auto h1 = betti_at_scale(f, std::numeric_limits<double>::infinity(), 1);
    o.require(h1.rank_boundaries == 1, "rank B1 = " + std::to_string(h1.rank_boundaries));
    o.require(h1.rank_cycles == 3, "rank Z1 = " + std::to_string(h1.rank_cycles));
    o.require(h1.betti == 2, "beta1 = " + std::to_string(h1.betti));
    o.detail = o.pass ? "rank B1 = 1, rank Z1 = 3, beta1 = 2" : o.detail;
    return o;
}

// 2 ------------------------------------------------------------------------
Outcome oracle_equivalence() {
    Outcome o;
    std::mt19937_64 rng(20240611);
    std::size_t checks = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto net = random_graph(rng, 8, 0.6);
        const auto f = flag_filtration(net, 3);
        const auto dgms = compute_persistence(f, 1.0);
        for (int s = 0; s <= 9; ++s) {
            const double eps = s / 10.0;
            for (std::size_t k = 0; k <= 2; ++k) {
                const auto got = alive_at(dgms[k], eps), want = betti_at_scale(f, eps, k).betti;
                o.require(got == want, "trial " + std::to_string(trial) + " eps " + fmt(eps) + " k " +
                                           std::to_string(k) + ": " + std::to_string(got) + " vs " +
                                           std::to_string(want));
                ++checks;
            }
        }
    }
    if (o.pass) o.detail = std::to_string(checks) + " (graph, scale, k) checks agree";
    return o;
}

// 3 ------------------------------------------------------------------------
Outcome flag_golden_cases(double& slowest) {
    Outcome o;
    auto timed = [&](auto&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };
    timed([&] {
        const auto d = compute_persistence(flag_filtration(cycle_graph(4, 0.5), 2), 1.0);
        o.require(d[1].pairs.size() == 1 && d[1].pairs[0] == Interval{0.5, 1.0, true}, "4-cycle H1 is not [0.5, 1.0)");
    });
    timed([&] {
        const auto d = compute_persistence(flag_filtration(complete_graph(4, 0.3), 3), 1.0);
        o.require(d[1].pairs.empty() && d[2].pairs.empty(), "K4 has H1 or H2 intervals");
    });
    timed([&] {
        const auto d = compute_persistence(flag_filtration(octahedron_graph(0.4), 3), 1.0);
        o.require(d[2].pairs.size() == 1 && d[2].pairs[0].birth == 0.4, "octahedron H2 is not a single class born at 0.4");
        o.require(d[1].pairs.empty(), "octahedron has H1 intervals");
    });
    o.require(slowest < 1.0, "a golden case took " + fmt(slowest) + " s");
    if (o.pass) o.detail = "4-cycle, K4 and octahedron diagrams exact";
    return o;
}

// 4 ------------------------------------------------------------------------
Outcome image_contract() {
    Outcome o;
    const ImageConfig cfg;
    const auto empty = persistence_image({1, {}, 0}, cfg);
    o.require(std::all_of(empty.values.begin(), empty.values.end(), [](double x) { return x == 0.0; }),
              "empty diagram gives a nonzero image");

    const auto one = persistence_image({1, {{0.2, 0.6, false}}, 0}, cfg);
    const auto two = persistence_image({1, {{0.2, 0.6, false}, {0.2, 0.6, false}}, 0}, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < one.values.size(); ++i) worst = std::max(worst, std::abs(two.values[i] - 2 * one.values[i]));
    o.require(worst <= 1e-12, "duplicated point deviates by " + fmt(worst));

    double mass = 0.0;
    for (double x : one.values) mass += x;
    const double expected = 0.4 * gaussian_mass_quadrature(0.2, 0.4, 0.1, 0, 1, 0, 1);
    o.require(std::abs(mass - expected) <= 1e-6, "mass " + fmt(mass) + " vs quadrature " + fmt(expected));

    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> u(0, 1), shift(-0.01, 0.01);
    double ratio = 0.0;
    for (int checked = 0; checked < 100;) {
        const double b = u(rng) * 0.9, d = b + 0.01 + u(rng) * (1 - b - 0.01);
        const double nb = std::max(0.0, b + shift(rng)), nd = std::min(1.0, d + shift(rng));
        const double delta = std::max(std::abs(nb - b), std::abs(nd - d));
        if (!(nd > nb) || delta == 0.0) continue;
        const auto a = persistence_image({1, {{b, d, false}}, 0}, cfg);
        const auto c = persistence_image({1, {{nb, nd, false}}, 0}, cfg);
        ratio = std::max(ratio, image_distance(a.values, c.values, 1.0) / delta);
        ++checked;
    }
    o.require(ratio <= image_perturbation_bound,
              "perturbation ratio " + fmt(ratio) + " exceeds " + fmt(image_perturbation_bound));
    if (o.pass)
        o.detail = "mass error " + fmt(std::abs(mass - expected)) + ", worst perturbation ratio " + fmt(ratio) +
                   " <= C = " + fmt(image_perturbation_bound);
    return o;
}

// 5 ------------------------------------------------------------------------
Outcome stability_field_contract() {
    Outcome o;
    const auto planted = planted_grid();
    const double interior = averaged_gradient_magnitude(planted, 4), corner = averaged_gradient_magnitude(planted, 0);
    o.require(std::abs(interior - planted_interior_value()) <= 1e-12, "interior value " + fmt(interior));
    o.require(std::abs(corner - planted_corner_value()) <= 1e-12, "corner value " + fmt(corner));

    auto cfg = synthetic_config("field");
    const auto in = prepare(cfg);
    auto grid = analyze(in, cfg).grid;

    auto shared = grid;
    for (auto& c : shared.cells()) c.image = grid.cell(0).image;
    const auto zero = stability_field(shared);
    o.require(std::all_of(zero.values.begin(), zero.values.end(), [](double v) { return v == 0.0; }),
              "shared image gives a nonzero field");

    // dyadic images make the shifted differences exact
    auto dyadic = grid;
    for (auto& c : dyadic.cells())
        for (auto& x : c.image) x = std::round(x * 1024.0) / 1024.0;
    auto moved = dyadic;
    for (auto& c : moved.cells())
        for (std::size_t i = 0; i < c.image.size(); ++i) c.image[i] += static_cast<double>(i % 7) / 4.0;
    o.require(stability_field(dyadic).values == stability_field(moved).values, "translation changes the field");

    const auto field = stability_field(grid);
    auto axes = grid.axes();
    for (auto& ax : axes)
        for (auto& x : ax) x *= 2.0;
    ParameterGrid scaled(axes, grid.k_max(), grid.block());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto c = grid.cell(i);
        c.point = scaled.cell(i).point;
        scaled.cell(i) = c;
    }
    const auto halved = stability_field(scaled);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(halved.values[i] - field.values[i] / 2));
    o.require(worst <= 1e-12, "axis scaling deviates by " + fmt(worst));
    const auto none = Constraints::none(grid.k_max());
    o.require(optimize(grid, field, none).flat == optimize(scaled, halved, none).flat, "axis scaling moves the argmin");
    if (o.pass) o.detail = "hand expansions, zero field, translation and scaling hold on " + std::to_string(grid.size()) + " cells";
    return o;
}

// 6 ------------------------------------------------------------------------
Outcome optimizer_scan() {
    Outcome o;
    std::size_t draws = 0, infeasible = 0;
    for (std::uint64_t seed : {7u, 8u, 9u, 10u}) {
        auto cfg = synthetic_config("optimizer", seed);
        const auto a = analyze(prepare(cfg), cfg);
        const auto& g = a.grid;
        o.require(g.size() == 128, "grid has " + std::to_string(g.size()) + " cells");
        const auto F = feature_maxima(g);
        std::mt19937_64 rng(seed * 977);
        for (int t = 0; t < 25; ++t, ++draws) {
            std::vector<double> deltas;
            for (auto Fk : F) deltas.push_back(std::uniform_real_distribution<double>(0, 1.15 * static_cast<double>(Fk) + 1)(rng));
            Constraints c;
            for (double d : deltas) c.deltas.push_back(Delta::absolute(d));

            std::optional<std::size_t> best;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const auto& cell = g.cell(i);
                bool ok = cell.nodes > 0;
                for (std::size_t k = 0; k < deltas.size(); ++k) ok = ok && static_cast<double>(cell.features[k]) >= deltas[k];
                if (ok && (!best || a.field.values[i] < a.field.values[*best])) best = i;
            }
            try {
                const auto sel = optimize(g, a.field, c);
                o.require(best && sel.flat == *best, "selection differs from scan (seed " + std::to_string(seed) + ")");
            } catch (const infeasible_error&) {
                ++infeasible;
                o.require(!best, "infeasible reported but the scan found a feasible cell");
            }
        }
    }
    if (o.pass)
        o.detail = std::to_string(draws) + " draws on 4 grids, " + std::to_string(infeasible) + " infeasible";
    o.require(infeasible > 0 && infeasible < draws, "draws did not exercise both outcomes");
    return o;
}

// 7 ------------------------------------------------------------------------
Outcome sweep_path() {
    Outcome o;
    auto cfg = synthetic_config("sweep");
    const auto a = analyze(prepare(cfg), cfg);
    const auto list = fraction_list(default_delta_fractions());
    const auto entries = sweep_hyperparameters(a.grid, a.field, {list, list});
    o.require(entries.size() == 100, "sweep gave " + std::to_string(entries.size()) + " entries");

    std::size_t feasible = 0;
    for (const auto& e : entries) feasible += e.selection.has_value();
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t fixed = 0; fixed < 10; ++fixed) {
            std::optional<std::size_t> prev;
            for (std::size_t step = 0; step < 10; ++step) {
                const auto& sel = entries[k == 0 ? step * 10 + fixed : fixed * 10 + step].selection;
                if (!sel) continue;
                const auto f = a.grid.cell(sel->flat).features[k];
                o.require(!prev || f >= *prev, "f" + std::to_string(k + 1) + " decreases along its delta");
                prev = f;
            }
        }
    const auto free_pick = optimize(a.grid, a.field, Constraints::none(2));
    const auto& strict = entries.back().selection;
    o.require(strict.has_value(), "most constrained combination is infeasible");
    if (strict) o.require(strict->flat != free_pick.flat, "most constrained selection equals the unconstrained argmin");
    if (o.pass && strict)
        o.detail = std::to_string(feasible) + "/100 feasible; unconstrained (" + fmt(free_pick.point.coords[0]) + ", " +
                   fmt(free_pick.point.coords[1]) + ") vs most constrained (" + fmt(strict->point.coords[0]) + ", " +
                   fmt(strict->point.coords[1]) + ")";
    return o;
}

// 8 ------------------------------------------------------------------------
Outcome variance_contract() {
    Outcome o;
    std::mt19937_64 rng(8080);
    std::gamma_distribution<double> gamma(0.7, 0.2);
    double oracle_gap = 0.0, identity_gap = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> axis;
        for (int i = 0; i < 24; ++i) axis.push_back(i);
        ParameterGrid g({axis}, 2, 400);
        for (auto& c : g.cells()) {
            c.image.resize(800);
            for (auto& x : c.image) x = gamma(rng);
        }
        const auto m1 = mean_image(g, 1), m2 = mean_image(g, 2);
        const std::vector<std::vector<double>> means{m1, m2};
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto b1 = g.image_block(i, 1), b2 = g.image_block(i, 2);
            const double v = higher_order_variance(b1, b2, m1, m2);
            const auto a = shifted(b1, m1), c = shifted(b2, m2);
            oracle_gap = std::max(oracle_gap, std::abs(v - static_cast<double>(a.variance() + c.variance() - 2 * a.covariance(c))));
            double s = 0.0;
            for (std::size_t j = 0; j < 400; ++j) {
                const double d = (b1[j] - m1[j]) - (b2[j] - m2[j]);
                s += d * d;
            }
            identity_gap = std::max(identity_gap, std::abs(v - s / 399.0));

            const std::vector<std::span<const double>> blocks{b1, b2};
            o.require(alt_variance(blocks, means) > 0.0, "alternative variance not positive off the mean");
            const std::vector<std::span<const double>> at_mean{m1, m2};
            o.require(alt_variance(at_mean, means) == 0.0, "alternative variance nonzero at the mean");
        }
    }
    o.require(oracle_gap <= 1e-10, "sample-statistics gap " + fmt(oracle_gap));
    o.require(identity_gap <= 1e-12, "squared-difference gap " + fmt(identity_gap));

    // Mild constraints should select low-variance cells.
    auto cfg = synthetic_config("variance");
    const auto a = analyze(prepare(cfg), cfg);
    auto sorted_var = a.variance.values;
    std::sort(sorted_var.begin(), sorted_var.end());
    const double tercile = sorted_var[(sorted_var.size() + 2) / 3 - 1];
    std::vector<Delta> mild1, mild2;
    for (double f : default_delta_fractions()) {
        if (f <= 0.5) mild1.push_back(Delta::fraction(f));
        if (f <= 0.3) mild2.push_back(Delta::fraction(f));
    }
    std::size_t inside = 0, total = 0, worst_rank = 0;
    for (const auto& e : sweep_hyperparameters(a.grid, a.field, {mild1, mild2})) {
        if (!e.selection) continue;
        ++total;
        const double v = a.variance.values[e.selection->flat];
        inside += v <= tercile;
        worst_rank = std::max<std::size_t>(worst_rank, std::lower_bound(sorted_var.begin(), sorted_var.end(), v) - sorted_var.begin() + 1);
    }
    o.expect_soft(total > 0 && inside == total, "mild selections in the lowest variance tercile: " + std::to_string(inside) +
                                               "/" + std::to_string(total) + ", worst variance rank " +
                                               std::to_string(worst_rank) + "/" + std::to_string(sorted_var.size()));
    if (o.pass)
        o.detail = "oracle gap " + fmt(oracle_gap) + ", identity gap " + fmt(identity_gap) + "; " +
                   std::to_string(inside) + "/" + std::to_string(total) + " mild selections in lowest tercile";
    if (o.soft_miss) o.detail += "; soft check missed: " + o.soft_detail;
    return o;
}

// 9 ------------------------------------------------------------------------
Outcome spectra() {
    Outcome o;
    const auto edge = laplacian_spectrum(graph(2, {{0, 1, 1.0}})).eigenvalues;
    o.require(edge == std::vector<double>{0.0, 2.0}, "single edge spectrum is not exactly {0, 2}");
    const auto k4 = laplacian_spectrum(complete_graph(4, 1.0)).eigenvalues;
    o.require(k4.size() == 4 && std::abs(k4[0]) <= 1e-10, "K4 smallest eigenvalue");
    for (std::size_t i = 1; i < k4.size(); ++i) o.require(std::abs(k4[i] - 4.0 / 3.0) <= 1e-10, "K4 eigenvalue " + fmt(k4[i]));

    std::mt19937_64 rng(99);
    for (int checked = 0; checked < 50;) {
        const auto net = random_graph(rng, 12, 0.4);
        if (net.edges.empty()) continue;
        for (double x : laplacian_spectrum(net).eigenvalues)
            o.require(x >= -1e-9 && x <= 2.0 + 1e-9, "eigenvalue " + fmt(x) + " outside [0, 2]");
        ++checked;
    }

    auto cfg = synthetic_config("spectrum");
    const auto [pre, post] = run_spectrum(cfg, prepare(cfg));
    std::ifstream in(fs::path(cfg.output_dir) / "spectrum.csv");
    const auto t = read_table(in, "spectrum.csv");
    std::size_t n_pre = 0, n_post = 0;
    for (const auto& r : t.rows) (r[2] == "pre" ? n_pre : n_post)++;
    o.require(t.header == csv::row{"rank", "eigenvalue", "label"}, "spectrum CSV header");
    o.require(n_pre == std::min<std::size_t>(100, pre.eigenvalues.size()) &&
                  n_post == std::min<std::size_t>(100, post.eigenvalues.size()),
              "spectrum CSV row counts");
    if (o.pass)
        o.detail = "exact and bounded spectra; CSV with " + std::to_string(n_pre) + " pre and " + std::to_string(n_post) +
                   " post eigenvalues";
    return o;
}

// 10 -----------------------------------------------------------------------
Outcome determinism() {
    Outcome o;
    std::map<std::string, std::string> outputs[2];
    std::size_t n = 0;
    for (int run = 0; run < 2; ++run) {
        auto cfg = synthetic_config(run ? "jobs8" : "jobs1");
        cfg.jobs = run ? 8 : 1;
        const auto in = prepare(cfg);
        run_select(cfg, in);
        run_sweep(cfg, in);
        for (const auto& e : fs::directory_iterator(cfg.output_dir))
            outputs[run][e.path().filename().string()] = slurp(e.path());
    }
    o.require(outputs[0].size() == outputs[1].size(), "different artifact sets");
    for (const auto& [name, content] : outputs[0]) {
        auto it = outputs[1].find(name);
        o.require(it != outputs[1].end() && it->second == content, name + " differs between 1 and 8 jobs");
        ++n;
    }
    if (o.pass) o.detail = std::to_string(n) + " artifacts byte-identical at 1 and 8 jobs";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        std::string name;
        double limit;  // seconds
        std::function<Outcome()> run;
    };
    double golden_slowest = 0.0;
    const std::vector<Criterion> criteria{
        {1, "five-vertex complex Betti ranks", 1.0, five_vertex_ranks},
        {2, "persistence matches Betti oracle on 200 random graphs", 60.0, oracle_equivalence},
        {3, "flag-complex golden diagrams", 3.0, [&] { return flag_golden_cases(golden_slowest); }},
        {4, "persistence-image contract", 60.0, image_contract},
        {5, "stability field contract", 60.0, stability_field_contract},
        {6, "constrained optimizer vs exhaustive scan", 5.0, optimizer_scan},
        {7, "hyperparameter sweep path", 120.0, sweep_path},
        {8, "variance identities and low-variance selections", 60.0, variance_contract},
        {9, "normalized Laplacian spectra", 60.0, spectra},
        {10, "determinism across parallelism degrees", 300.0, determinism},
    };

    int failures = 0, soft_misses = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= c.limit) {
            o.pass = false;
            o.detail += " (time limit " + fmt(c.limit) + " s exceeded)";
        }
        failures += !o.pass;
        soft_misses += o.pass && o.soft_miss;
        std::printf("%s criterion %2d: %s [%.3f s] %s\n", o.pass && !o.soft_miss ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), secs, o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed", static_cast<int>(criteria.size()) - failures - soft_misses, criteria.size());
    if (soft_misses) std::printf("; %d failed only a soft expectation, which does not affect the exit status", soft_misses);
    std::printf("\n");
    return failures ? 1 : 0;
}
