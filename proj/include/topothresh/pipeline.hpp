#pragma once

// End-to-end runs: ingest, populate the grid, evaluate the stability and
// variance fields, select, and write the artifact set.

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "corpus.hpp"
#include "csv.hpp"
#include "homology.hpp"
#include "image.hpp"
#include "stability.hpp"
#include "stats.hpp"
#include "synthetic.hpp"

namespace topothresh {

/// Ingested input plus everything needed to build the network of any cell.
struct PreparedInput {
    std::vector<std::vector<double>> axes;
    std::size_t corpus_size = 0;
    YearRange years;
    std::shared_ptr<const CorpusIndex> index;       // records input
    std::shared_ptr<const ConceptNetwork> network;  // edge-list input

    ConceptNetwork network_at(const ThresholdPoint& p) const {
        return index ? index->network(p) : filter_network(*network, p);
    }

    /// Network with no frequency filtering.
    ConceptNetwork full_network() const {
        return network_at(ThresholdPoint{{0.0, std::numeric_limits<double>::infinity()}});
    }
};

inline std::vector<double> resolve_axis(const AxisSpec& spec, std::size_t corpus_size) {
    std::vector<double> out;
    for (double v : spec.values) out.push_back(spec.fractions ? v * static_cast<double>(corpus_size) : v);
    return out;
}

inline PreparedInput prepare_records(const std::vector<CorpusRecord>& records, const RunConfig& cfg) {
    PreparedInput in;
    in.years = cfg.year_range.value_or(infer_year_range(records));
    in.index = std::make_shared<CorpusIndex>(records, in.years, cfg.single_year_zero_weights);
    in.corpus_size = article_count(records);
    for (const auto& ax : cfg.axes) in.axes.push_back(resolve_axis(ax, in.corpus_size));
    return in;
}

/// Edge-list input has no article count; fractional axes scale with the node count.
inline PreparedInput prepare_network(ConceptNetwork net, const RunConfig& cfg) {
    PreparedInput in;
    in.years = net.years;
    in.corpus_size = net.node_count();
    in.network = std::make_shared<const ConceptNetwork>(std::move(net));
    for (const auto& ax : cfg.axes) in.axes.push_back(resolve_axis(ax, in.corpus_size));
    return in;
}

inline PreparedInput prepare(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.input_path.empty()) throw config_error("no input path configured");
    auto data = ingest_corpus(cfg.input_path, cfg.input_format);
    if (auto* recs = std::get_if<std::vector<CorpusRecord>>(&data)) return prepare_records(*recs, cfg);
    return prepare_network(std::move(std::get<ConceptNetwork>(data)), cfg);
}

struct Analysis {
    ParameterGrid grid;
    StabilityField field;
    VarianceField variance;
};

inline Analysis analyze(const PreparedInput& in, const RunConfig& cfg) {
    Analysis a;
    a.grid = populate_grid(in.axes, [&in](const ThresholdPoint& p) { return in.network_at(p); }, cfg.pipeline());
    a.field = stability_field(a.grid, cfg.p);
    a.variance = variance_field(a.grid, cfg.variance, cfg.p);
    return a;
}

// ---------------------------------------------------------------- writers

inline void write_heatmap(std::ostream& out, const ParameterGrid& grid, const StabilityField& field) {
    csv::row header{"ell", "u", "grad_magnitude"};
    for (std::size_t k = 1; k <= grid.k_max(); ++k) header.push_back("f" + std::to_string(k));
    header.push_back("nodes");
    header.push_back("edges");
    csv::write_row(out, header);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& c = grid.cell(i);
        csv::row row{csv::format(c.point.coords[0]), csv::format(c.point.coords[1]), csv::format(field.values[i])};
        for (auto f : c.features) row.push_back(std::to_string(f));
        row.push_back(std::to_string(c.nodes));
        row.push_back(std::to_string(c.edges));
        csv::write_row(out, row);
    }
}

inline void write_variance(std::ostream& out, const ParameterGrid& grid, const VarianceField& variance) {
    csv::write_row(out, {"ell", "u", "variance"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& c = grid.cell(i);
        csv::write_row(out, {csv::format(c.point.coords[0]), csv::format(c.point.coords[1]),
                             csv::format(variance.values[i])});
    }
}

inline void write_spectrum(std::ostream& out, const Spectrum& pre, const Spectrum& post, std::size_t count) {
    csv::write_row(out, {"rank", "eigenvalue", "label"});
    auto emit = [&](const Spectrum& s, const char* label) {
        const auto top = s.largest(count);
        for (std::size_t r = 0; r < top.size(); ++r)
            csv::write_row(out, {std::to_string(r + 1), csv::format(top[r]), label});
    };
    emit(pre, "pre");
    emit(post, "post");
}

/// One row per sweep combination; ell/u are empty for infeasible rows.
inline void write_path(std::ostream& out, const std::vector<SweepEntry>& entries, std::size_t k_max) {
    csv::row header;
    for (std::size_t k = 1; k <= k_max; ++k) header.push_back("delta" + std::to_string(k));
    header.insert(header.end(), {"ell", "u", "feasible"});
    csv::write_row(out, header);
    for (const auto& e : entries) {
        csv::row row;
        for (double d : e.resolved) row.push_back(csv::format(d));
        if (e.selection) {
            row.push_back(csv::format(e.selection->point.coords[0]));
            row.push_back(csv::format(e.selection->point.coords[1]));
            row.push_back("1");
        } else {
            row.insert(row.end(), {"", "", "0"});
        }
        csv::write_row(out, row);
    }
}

inline nlohmann::json selection_json(const ParameterGrid& grid, const RunConfig& cfg, const Selection& sel,
                                     const StabilityField&, const VarianceField& variance) {
    using nlohmann::json;
    json constraints = json::array();
    for (std::size_t k = 0; k < cfg.constraints.size(); ++k)
        constraints.push_back({{"k", k + 1},
                               {"spec", detail::delta_json(cfg.constraints[k])},
                               {"delta", sel.deltas[k]},
                               {"F", sel.maxima[k]}});
    const auto& cell = grid.cell(sel.flat);
    return {{"axes", {{"ell", grid.axes()[0]}, {"u", grid.axes()[1]}}},
            {"k_max", grid.k_max()},
            {"p", cfg.p},
            {"constraints", constraints},
            {"F", sel.maxima},
            {"selected",
             {{"ell", sel.point.coords[0]},
              {"u", sel.point.coords[1]},
              {"index", sel.index},
              {"features", cell.features},
              {"nodes", cell.nodes},
              {"edges", cell.edges}}},
            {"field_value", sel.value},
            {"variance", variance.values[sel.flat]},
            {"variance_kind", variance.kind == VarianceKind::cross_term ? "cross_term" : "p_norm"},
            {"feasible_count", sel.feasible_count},
            {"cells", grid.size()}};
}

/// Header plus string fields of a CSV written by this library.
struct Table {
    csv::row header;
    std::vector<csv::row> rows;
};

inline Table read_table(std::istream& in, const std::string& name = "<table>") {
    csv::reader rd(in, name);
    Table t;
    auto header = rd.next();
    if (!header) throw parse_error(name, 0, "empty table");
    t.header = *header;
    while (auto row = rd.next()) {
        if (csv::is_blank(*row)) continue;
        if (row->size() != t.header.size()) throw parse_error(name, rd.line(), "ragged row");
        t.rows.push_back(std::move(*row));
    }
    return t;
}

// ---------------------------------------------------------------- runs

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    body(out);
    if (!out) throw std::runtime_error("error writing " + path.string());
}

inline std::filesystem::path ensure_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace detail

struct SelectOutcome {
    Analysis analysis;
    Selection selection;
};

/// Writes heatmap.csv and variance.csv, then (if feasible) selection.json,
/// the selected network, its diagrams and images, and spectrum.csv.
/// Throws infeasible_error after the field files are written.
inline SelectOutcome run_select(const RunConfig& cfg, const PreparedInput& in) {
    SelectOutcome r;
    r.analysis = analyze(in, cfg);
    const auto& a = r.analysis;
    const auto dir = detail::ensure_dir(cfg.output_dir);
    detail::write_file(dir / "heatmap.csv", [&](std::ostream& o) { write_heatmap(o, a.grid, a.field); });
    detail::write_file(dir / "variance.csv", [&](std::ostream& o) { write_variance(o, a.grid, a.variance); });

    r.selection = optimize(a.grid, a.field, Constraints{cfg.constraints});
    const auto& sel = r.selection;
    const auto net = in.network_at(sel.point);
    const auto analysis = analyze_network(net, cfg.pipeline());

    detail::write_file(dir / "selection.json", [&](std::ostream& o) {
        o << selection_json(a.grid, cfg, sel, a.field, a.variance).dump(2) << '\n';
    });
    detail::write_file(dir / "selected_network.csv", [&](std::ostream& o) { write_edge_list(o, net); });
    detail::write_file(dir / "selected_diagrams.csv", [&](std::ostream& o) { write_diagrams(o, analysis.diagrams); });
    for (const auto& img : analysis.images)
        detail::write_file(dir / ("selected_image_dim" + std::to_string(img.dim) + ".csv"),
                           [&](std::ostream& o) { write_image(o, img); });
    detail::write_file(dir / "image_config.json", [&](std::ostream& o) {
        o << image_config_json(analysis.images.front().config).dump(2) << '\n';
    });
    if (cfg.spectrum) {
        const auto pre = laplacian_spectrum(in.full_network(), cfg.spectrum_weighting);
        const auto post = laplacian_spectrum(net, cfg.spectrum_weighting);
        detail::write_file(dir / "spectrum.csv",
                           [&](std::ostream& o) { write_spectrum(o, pre, post, cfg.spectrum_count); });
    }
    return r;
}

inline SelectOutcome run_select(const RunConfig& cfg) { return run_select(cfg, prepare(cfg)); }

struct SweepOutcome {
    Analysis analysis;
    std::vector<SweepEntry> entries;
};

/// Writes path.csv for every combination of the configured delta lists.
inline SweepOutcome run_sweep(const RunConfig& cfg, const PreparedInput& in) {
    SweepOutcome r;
    r.analysis = analyze(in, cfg);
    r.entries = sweep_hyperparameters(r.analysis.grid, r.analysis.field, cfg.sweep);
    const auto dir = detail::ensure_dir(cfg.output_dir);
    detail::write_file(dir / "path.csv", [&](std::ostream& o) { write_path(o, r.entries, cfg.k_max); });
    return r;
}

inline SweepOutcome run_sweep(const RunConfig& cfg) { return run_sweep(cfg, prepare(cfg)); }

/// Pre/post spectrum comparison. Without an explicit point the optimizer's
/// selection under the configured constraints is used.
inline std::pair<Spectrum, Spectrum> run_spectrum(const RunConfig& cfg, const PreparedInput& in,
                                                  std::optional<ThresholdPoint> point = std::nullopt) {
    if (!point) {
        const auto a = analyze(in, cfg);
        point = optimize(a.grid, a.field, Constraints{cfg.constraints}).point;
    }
    auto pre = laplacian_spectrum(in.full_network(), cfg.spectrum_weighting);
    auto post = laplacian_spectrum(in.network_at(*point), cfg.spectrum_weighting);
    const auto dir = detail::ensure_dir(cfg.output_dir);
    detail::write_file(dir / "spectrum.csv", [&](std::ostream& o) { write_spectrum(o, pre, post, cfg.spectrum_count); });
    return {std::move(pre), std::move(post)};
}

/// Writes corpus.csv into the output directory and returns its path.
inline std::filesystem::path run_synth(const RunConfig& cfg) {
    const auto records = gen_synthetic(cfg.synthetic);
    const auto dir = detail::ensure_dir(cfg.output_dir);
    const auto path = dir / "corpus.csv";
    detail::write_file(path, [&](std::ostream& o) { write_records(o, records); });
    return path;
}

}  // namespace topothresh
