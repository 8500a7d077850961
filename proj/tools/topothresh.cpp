// Command-line front end: select, sweep, synth, spectrum.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "topothresh/topothresh.hpp"

namespace {

enum exit_code : int {
    ok = 0,
    internal = 1,
    usage = 2,
    input = 3,
    infeasible = 4,
};

int report(exit_code code, const std::string& kind, const std::string& message,
           nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json err{{"error", {{"kind", kind}, {"message", message}, {"exit_code", static_cast<int>(code)}}}};
    for (auto& [k, v] : extra.items()) err["error"][k] = v;
    std::cerr << err.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace topothresh;

    CLI::App app{"Topological selection of network thresholding parameters"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, input_path, input_format = "records";
    std::optional<std::size_t> jobs, kmax;
    std::optional<std::uint64_t> seed;
    std::optional<double> p;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (overrides TOPOTHRESH_OUT and the config)");
    app.add_option("--input", input_path, "Input CSV (overrides the config)");
    app.add_option("--format", input_format, "Input format")->check(CLI::IsMember({"records", "edge_list"}));
    app.add_option("--jobs", jobs, "Worker threads for grid population")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed for synthetic corpus generation");
    app.add_option("--kmax", kmax, "Highest homology dimension")->check(CLI::PositiveNumber);
    app.add_option("--p", p, "Norm exponent for image distances and gradients")->check(CLI::Range(1.0, 1e300));

    auto* select = app.add_subcommand("select", "Populate the grid and select the most stable feasible cell");
    auto* sweep = app.add_subcommand("sweep", "Select for every combination of the constraint lists");
    auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic corpus");
    auto* spectrum = app.add_subcommand("spectrum", "Compare normalized-Laplacian spectra before and after thresholding");
    std::optional<double> ell, upper;
    spectrum->add_option("--ell", ell, "Lower frequency bound (default: the optimizer's selection)");
    spectrum->add_option("--u", upper, "Upper frequency bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report(usage, "usage", e.what());
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        if (kmax) cfg.set_k_max(*kmax);
        if (!input_path.empty()) {
            cfg.input_path = input_path;
            cfg.input_format = input_format == "edge_list" ? InputFormat::edge_list : InputFormat::records;
        }
        if (const char* env = std::getenv("TOPOTHRESH_OUT"); env && *env) cfg.output_dir = env;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (jobs) cfg.jobs = *jobs;
        if (seed) cfg.synthetic.seed = *seed;
        if (p) cfg.p = *p;
        cfg.validate();
    } catch (const config_error& e) {
        return report(usage, "config", e.what());
    }

    try {
        if (*synth) {
            const auto path = run_synth(cfg);
            std::cout << path.string() << '\n';
            return ok;
        }
        const auto prepared = prepare(cfg);
        if (*select) {
            const auto r = run_select(cfg, prepared);
            const auto& s = r.selection;
            std::cout << "selected ell=" << csv::format(s.point.coords[0]) << " u=" << csv::format(s.point.coords[1])
                      << " field=" << csv::format(s.value) << " feasible=" << s.feasible_count << '\n';
        } else if (*sweep) {
            const auto r = run_sweep(cfg, prepared);
            std::size_t feasible = 0;
            for (const auto& e : r.entries) feasible += e.selection.has_value();
            std::cout << r.entries.size() << " combinations, " << feasible << " feasible\n";
        } else if (*spectrum) {
            std::optional<ThresholdPoint> point;
            if (ell || upper) {
                if (!ell || !upper) return report(usage, "usage", "--ell and --u must be given together");
                point = ThresholdPoint{{*ell, *upper}};
            }
            const auto [pre, post] = run_spectrum(cfg, prepared, point);
            std::cout << "pre " << pre.eigenvalues.size() << " eigenvalues, post " << post.eigenvalues.size()
                      << " eigenvalues\n";
        }
    } catch (const infeasible_error& e) {
        return report(infeasible, "infeasible", e.what(), {{"binding", e.binding()}, {"F", e.maxima()}, {"deltas", e.deltas()}});
    } catch (const parse_error& e) {
        return report(input, "parse", e.what(), {{"file", e.file()}, {"line", e.line()}});
    } catch (const config_error& e) {
        return report(usage, "config", e.what());
    } catch (const degenerate_range_error& e) {
        return report(input, "degenerate_range", e.what());
    } catch (const cell_error& e) {
        return report(internal, "cell", e.what(), {{"index", e.index()}, {"coords", e.coords()}});
    } catch (const std::exception& e) {
        return report(internal, "internal", e.what());
    }
    return ok;
}
