#pragma once

// Run configuration: a JSON document whose keys mirror RunConfig. See
// README.md for the grammar.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpus.hpp"
#include "image.hpp"
#include "stability.hpp"
#include "stats.hpp"
#include "synthetic.hpp"

namespace topothresh {

class config_error : public error {
public:
    using error::error;
};

/// One parameter axis: explicit values, or fractions of the corpus article count.
struct AxisSpec {
    std::vector<double> values;
    bool fractions = false;
};

/// Lower-bound fractions of the article count.
inline AxisSpec default_lower_axis() {
    return {{0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009}, true};
}

/// Upper-bound fractions of the article count; the last entry admits everything.
inline AxisSpec default_upper_axis() {
    return {{0.01, 0.02, 0.03, 0.04, 0.05, 0.075, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 100.0}, true};
}

inline std::vector<Delta> fraction_list(const std::vector<double>& fractions) {
    std::vector<Delta> out;
    for (double f : fractions) out.push_back(Delta::fraction(f));
    return out;
}

struct RunConfig {
    std::string input_path;
    InputFormat input_format = InputFormat::records;
    std::optional<YearRange> year_range;
    bool single_year_zero_weights = false;
    std::vector<AxisSpec> axes{default_lower_axis(), default_upper_axis()};
    std::size_t k_max = 2;
    ImageConfig image;
    double p = 2.0;
    double cap = 1.0;
    std::vector<Delta> constraints{Delta::fraction(0.01), Delta::fraction(0.01)};
    std::vector<std::vector<Delta>> sweep{fraction_list(default_delta_fractions()),
                                          fraction_list(default_delta_fractions())};
    VarianceKind variance = VarianceKind::cross_term;
    bool spectrum = true;
    std::size_t spectrum_count = 100;
    SpectrumWeighting spectrum_weighting = SpectrumWeighting::edge_weight;
    std::string output_dir = "out";
    std::size_t jobs = 1;
    SyntheticConfig synthetic;

    PipelineConfig pipeline() const {
        PipelineConfig pc;
        pc.k_max = k_max;
        pc.image = image;
        pc.image.p_norm = p;
        pc.cap = cap;
        pc.jobs = jobs;
        return pc;
    }

    /// Adjusts k-dependent defaults after k_max changes.
    void set_k_max(std::size_t k) {
        if (k < 1) throw config_error("k_max must be >= 1");
        if (constraints.size() != k) constraints.assign(k, Delta::fraction(0.01));
        if (sweep.size() != k) sweep.assign(k, fraction_list(default_delta_fractions()));
        if (k != 2) variance = VarianceKind::p_norm;
        k_max = k;
    }

    void validate() const {
        if (k_max < 1) throw config_error("k_max must be >= 1");
        if (axes.size() != 2) throw config_error("frequency thresholding uses exactly two axes (lower, upper)");
        for (const auto& ax : axes) {
            if (ax.values.empty()) throw config_error("axis without values");
            if (ax.fractions)
                for (double v : ax.values)
                    if (!(v >= 0.0)) throw config_error("axis fractions must be >= 0");
        }
        if (constraints.size() != k_max) throw config_error("need one constraint per homology dimension 1..k_max");
        for (const auto& d : constraints)
            if (!(d.value >= 0.0) || (d.fractional && d.value > 1.0))
                throw config_error("constraint values must be >= 0 and fractions must lie in [0,1]");
        if (sweep.size() != k_max) throw config_error("need one sweep list per homology dimension 1..k_max");
        for (const auto& l : sweep)
            for (const auto& d : l)
                if (!(d.value >= 0.0) || (d.fractional && d.value > 1.0))
                    throw config_error("sweep values must be >= 0 and fractions must lie in [0,1]");
        if (variance == VarianceKind::cross_term && k_max != 2)
            throw config_error("cross_term variance needs k_max = 2");
        if (!(p >= 1.0)) throw config_error("p must be >= 1");
        if (year_range && year_range->min > year_range->max) throw config_error("year_range is inverted");
        if (jobs < 1) throw config_error("jobs must be >= 1");
        try {
            pipeline().validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what());
        }
    }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw config_error(where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw config_error("unknown key '" + key + "' in " + where);
}

inline Delta parse_delta(const json& j) {
    if (j.is_number()) return Delta::fraction(j.get<double>());  // bare numbers are fractions of F_k
    check_keys(j, {"fraction", "absolute"}, "delta");
    if (j.size() != 1) throw config_error("delta needs exactly one of 'fraction' or 'absolute'");
    if (j.contains("fraction")) return Delta::fraction(j.at("fraction").get<double>());
    return Delta::absolute(j.at("absolute").get<double>());
}

inline json delta_json(const Delta& d) {
    return d.fractional ? json{{"fraction", d.value}} : json{{"absolute", d.value}};
}

inline AxisSpec parse_axis(const json& j) {
    check_keys(j, {"values", "fractions"}, "axis");
    if (j.size() != 1) throw config_error("axis needs exactly one of 'values' or 'fractions'");
    if (j.contains("values")) return {j.at("values").get<std::vector<double>>(), false};
    return {j.at("fractions").get<std::vector<double>>(), true};
}

inline std::vector<Delta> parse_delta_list(const json& j) {
    std::vector<Delta> out;
    for (const auto& d : j) out.push_back(parse_delta(d));
    return out;
}

}  // namespace detail

/// Parses a JSON config. Relative paths resolve against `base_dir`.
inline RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using detail::check_keys;
    RunConfig c;
    try {
        check_keys(j,
                   {"input", "year_range", "single_year_zero_weights", "axes", "k_max", "image", "p", "cap",
                    "constraints", "sweep", "variance", "spectrum", "output_dir", "jobs", "seed", "synthetic"},
                   "config");
        if (j.contains("k_max")) c.set_k_max(j.at("k_max").get<std::size_t>());
        if (j.contains("input")) {
            const auto& in = j.at("input");
            check_keys(in, {"path", "format"}, "input");
            auto path = std::filesystem::path(in.at("path").get<std::string>());
            if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
            c.input_path = path.string();
            const auto fmt = in.value("format", std::string("records"));
            if (fmt == "records") c.input_format = InputFormat::records;
            else if (fmt == "edge_list") c.input_format = InputFormat::edge_list;
            else throw config_error("input.format must be 'records' or 'edge_list'");
        }
        if (j.contains("year_range")) {
            auto yr = j.at("year_range").get<std::vector<int>>();
            if (yr.size() != 2) throw config_error("year_range must be [min, max]");
            c.year_range = YearRange{yr[0], yr[1]};
        }
        c.single_year_zero_weights = j.value("single_year_zero_weights", false);
        if (j.contains("axes")) {
            c.axes.clear();
            for (const auto& ax : j.at("axes")) c.axes.push_back(detail::parse_axis(ax));
        }
        if (j.contains("image")) {
            const auto& im = j.at("image");
            check_keys(im, {"rows", "cols", "sigma", "birth_range", "persistence_range"}, "image");
            c.image.rows = im.value("rows", c.image.rows);
            c.image.cols = im.value("cols", c.image.cols);
            c.image.sigma = im.value("sigma", c.image.sigma);
            if (im.contains("birth_range")) {
                auto r = im.at("birth_range").get<std::vector<double>>();
                if (r.size() != 2) throw config_error("image.birth_range must be [lo, hi]");
                c.image.birth_lo = r[0];
                c.image.birth_hi = r[1];
            }
            if (im.contains("persistence_range")) {
                auto r = im.at("persistence_range").get<std::vector<double>>();
                if (r.size() != 2) throw config_error("image.persistence_range must be [lo, hi]");
                c.image.pers_lo = r[0];
                c.image.pers_hi = r[1];
            }
        }
        c.p = j.value("p", c.p);
        c.cap = j.value("cap", c.cap);
        if (j.contains("constraints")) c.constraints = detail::parse_delta_list(j.at("constraints"));
        if (j.contains("sweep")) {
            c.sweep.clear();
            for (const auto& list : j.at("sweep")) c.sweep.push_back(detail::parse_delta_list(list));
        }
        if (j.contains("variance")) {
            const auto v = j.at("variance").get<std::string>();
            if (v == "cross_term") c.variance = VarianceKind::cross_term;
            else if (v == "p_norm") c.variance = VarianceKind::p_norm;
            else throw config_error("variance must be 'cross_term' or 'p_norm'");
        }
        if (j.contains("spectrum")) {
            const auto& s = j.at("spectrum");
            check_keys(s, {"enabled", "count", "weighting"}, "spectrum");
            c.spectrum = s.value("enabled", c.spectrum);
            c.spectrum_count = s.value("count", c.spectrum_count);
            const auto w = s.value("weighting", std::string("edge_weight"));
            if (w == "edge_weight") c.spectrum_weighting = SpectrumWeighting::edge_weight;
            else if (w == "unit") c.spectrum_weighting = SpectrumWeighting::unit;
            else throw config_error("spectrum.weighting must be 'edge_weight' or 'unit'");
        }
        if (j.contains("output_dir")) {
            auto out = std::filesystem::path(j.at("output_dir").get<std::string>());
            if (out.is_relative() && !base_dir.empty()) out = base_dir / out;
            c.output_dir = out.string();
        }
        c.jobs = j.value("jobs", c.jobs);
        if (j.contains("seed")) c.synthetic.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("synthetic")) {
            const auto& s = j.at("synthetic");
            check_keys(s,
                       {"articles", "background_concepts", "zipf_exponent", "max_concepts_per_article", "year_min",
                        "year_max", "cycles", "octahedra", "planted_min_frequency", "planted_max_frequency"},
                       "synthetic");
            auto& g = c.synthetic;
            g.articles = s.value("articles", g.articles);
            g.background_concepts = s.value("background_concepts", g.background_concepts);
            g.zipf_exponent = s.value("zipf_exponent", g.zipf_exponent);
            g.max_concepts_per_article = s.value("max_concepts_per_article", g.max_concepts_per_article);
            g.year_min = s.value("year_min", g.year_min);
            g.year_max = s.value("year_max", g.year_max);
            g.cycles = s.value("cycles", g.cycles);
            g.octahedra = s.value("octahedra", g.octahedra);
            g.planted_min_frequency = s.value("planted_min_frequency", g.planted_min_frequency);
            g.planted_max_frequency = s.value("planted_max_frequency", g.planted_max_frequency);
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

inline nlohmann::json image_config_json(const ImageConfig& c) {
    return {{"rows", c.rows},
            {"cols", c.cols},
            {"sigma", c.sigma},
            {"weighting", "linear_persistence"},
            {"birth_range", {c.birth_lo, c.birth_hi}},
            {"persistence_range", {c.pers_lo, c.pers_hi}},
            {"p", c.p_norm},
            {"layout", "row-major; rows index persistence, cols index birth"}};
}

}  // namespace topothresh
