#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdiqkd/dataset_io.hpp"
#include "mdiqkd/optics.hpp"

namespace mdiqkd::io {

namespace {

bool verbose() {
    const char* env = std::getenv("MDIQKD_VERBOSE");
    return env != nullptr && *env != '\0' && std::string(env) != "0";
}

keyrate::DistillOptions distill_options(bool finite_size, double sigmas, bool merge_bell, int k) {
    keyrate::DistillOptions opt;
    opt.K = k;
    opt.merge_bell = merge_bell;
    if (finite_size) {
        opt.policy = finitesize::FluctuationPolicy::fixed(sigmas);
        opt.merge_bell = true;  // the finite-size analysis gathers both Bell states
        if (!merge_bell && verbose())
            std::cerr << "note: --finite-size implies --merge-bell\n";
    }
    return opt;
}

int cmd_distill(const std::vector<std::string>& counts_files, bool finite_size, double sigmas,
                bool merge_bell, int k, const std::string& json_out,
                const std::string& curve_out) {
    std::vector<RatePoint> curve;
    std::string json_all;
    for (const auto& path : counts_files) {
        const CountsDataset data = load_dataset(path);
        const auto report = keyrate::distill(data, distill_options(finite_size, sigmas,
                                                                   merge_bell, k));
        print_report(report, std::cout);
        curve.push_back({report.channel_label, report.attenuation_db,
                         report.rate_total_bits_per_s});
        if (!json_out.empty()) {
            if (!json_all.empty()) json_all += ",\n";
            json_all += report_to_json(report);
        }
    }
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        if (!out) throw IoError(json_out + ": cannot open for writing");
        out << (counts_files.size() > 1 ? "[" + json_all + "]" : json_all) << "\n";
    }
    if (!curve_out.empty()) {
        std::ofstream out(curve_out);
        if (!out) throw IoError(curve_out + ": cannot open for writing");
        write_rate_curve(curve, out);
    }
    return 0;
}

int cmd_bounds(const std::string& counts_file, bool finite_size, double sigmas, bool merge_bell,
               int k) {
    const CountsDataset data = load_dataset(counts_file);
    const auto report =
        keyrate::distill(data, distill_options(finite_size, sigmas, merge_bell, k));
    for (const auto& s : report.states) {
        std::cout << s.label << ": y11_lower=" << s.bounds.y11_lower
                  << " e11_upper=" << s.bounds.e11_upper << " K=" << s.bounds.K
                  << " sigmas_yield=" << s.bounds.sigmas_yield
                  << " sigmas_error=" << s.bounds.sigmas_error
                  << " failure_budget=" << s.bounds.failure_budget
                  << " dropped_error_rows=" << s.bounds.dropped_error_rows << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::uint64_t seed_override, bool seed_given, bool force_expected,
                 const std::string& stats_out) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_given) cfg.simulation.seed = seed_override;
    if (force_expected) cfg.simulation.mode = sim::SimMode::expected;
    cfg.resolve_overlap();
    const auto result = sim::run_campaign(cfg.protocol, cfg.channel, cfg.detector,
                                          cfg.simulation);
    save_dataset(result.counts, out_path);
    if (!stats_out.empty()) {
        std::ofstream out(stats_out);
        if (!out) throw IoError(stats_out + ": cannot open for writing");
        out << "{\n"
            << "  \"s1\": " << result.stats.s1 << ",\n  \"s2\": " << result.stats.s2
            << ",\n  \"t1\": " << result.stats.t1 << ",\n  \"t2\": " << result.stats.t2
            << ",\n  \"mean_click_probability\": " << result.stats.mean_click_probability
            << ",\n  \"effective_dark_prob\": " << result.stats.effective_dark_prob << "\n}\n";
    }
    if (verbose())
        std::cerr << "simulate: wrote " << result.counts.records.size() << " records to "
                  << out_path << "\n";
    return 0;
}

int cmd_visibility(double jitter_ps, double bandwidth_ghz, double fwhm_ps,
                   const std::string& grid_spec, const std::string& out_path) {
    if (grid_spec.empty()) {
        std::cout << optics::mean_visibility(jitter_ps, bandwidth_ghz, fwhm_ps) << "\n";
        return 0;
    }
    // grid spec: jmin:jmax:jsteps,bmin:bmax:bsteps
    double jmin, jmax, bmin, bmax;
    int jsteps, bsteps;
    char c1, c2, c3, c4, c5;
    std::istringstream spec(grid_spec);
    spec >> jmin >> c1 >> jmax >> c2 >> jsteps >> c3 >> bmin >> c4 >> bmax >> c5 >> bsteps;
    if (!spec || c1 != ':' || c2 != ':' || c3 != ',' || c4 != ':' || c5 != ':' || jsteps < 2 ||
        bsteps < 2)
        throw CLI::ValidationError("--grid", "expected jmin:jmax:steps,bmin:bmax:steps");
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw IoError(out_path + ": cannot open for writing");
        out = &file;
    }
    *out << "jitter_ps,bandwidth_ghz,visibility\n";
    for (int i = 0; i < jsteps; ++i) {
        const double j = jmin + (jmax - jmin) * i / (jsteps - 1);
        for (int k = 0; k < bsteps; ++k) {
            const double b = bmin + (bmax - bmin) * k / (bsteps - 1);
            *out << j << ',' << b << ',' << optics::mean_visibility(j, b, fwhm_ps) << "\n";
        }
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"MDI-QKD decoy-state post-processing, key rates and coincidence simulation"};
    app.require_subcommand(1);

    // distill
    auto* distill = app.add_subcommand("distill", "distill a counts dataset into a key rate");
    std::vector<std::string> counts_files;
    bool finite_size = false, merge_bell = false;
    double sigmas = 7.0;
    int k = 7;
    std::string json_out, curve_out;
    distill->add_option("--counts", counts_files, "counts CSV file(s)")->required();
    distill->add_flag("--finite-size", finite_size, "apply the n-sigma finite-size analysis");
    distill->add_option("--sigmas", sigmas, "sigma count for --finite-size (default 7)");
    distill->add_flag("--merge-bell", merge_bell, "gather singlet and triplet counts");
    distill->add_option("--k", k, "photon-number truncation order (default 7)");
    distill->add_option("--json", json_out, "write a machine-readable report");
    distill->add_option("--rate-curve", curve_out, "write attenuation/distance/rate CSV");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "decoy-state single-photon bounds only");
    std::string bounds_counts;
    bool b_finite = false, b_merge = false;
    double b_sigmas = 7.0;
    int b_k = 7;
    bounds->add_option("--counts", bounds_counts, "counts CSV file")->required();
    bounds->add_flag("--finite-size", b_finite, "apply the n-sigma finite-size analysis");
    bounds->add_option("--sigmas", b_sigmas, "sigma count for --finite-size (default 7)");
    bounds->add_flag("--merge-bell", b_merge, "gather singlet and triplet counts");
    bounds->add_option("--k", b_k, "photon-number truncation order (default 7)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run the coincidence experiment simulator");
    std::string config_path, out_path, stats_out;
    std::uint64_t seed = 0;
    bool expected = false;
    simulate->add_option("--config", config_path, "run configuration JSON")->required();
    simulate->add_option("--out", out_path, "output counts CSV")->required();
    auto* seed_opt = simulate->add_option("--seed", seed, "override the configured seed");
    simulate->add_flag("--expected", expected, "force deterministic expected-value mode");
    simulate->add_option("--stats", stats_out, "write campaign statistics JSON");

    // visibility
    auto* visibility = app.add_subcommand("visibility", "two-photon interference visibility");
    double jitter_ps = 0.0, bandwidth_ghz = 0.0, fwhm_ps = 35.0;
    std::string grid_spec, vis_out;
    visibility->add_option("--jitter-ps", jitter_ps, "relative arrival-time jitter sigma")
        ->required();
    visibility->add_option("--bandwidth-ghz", bandwidth_ghz, "measured spectral width")
        ->required();
    visibility->add_option("--fwhm-ps", fwhm_ps, "pulse FWHM (default 35 ps)");
    visibility->add_option("--grid", grid_spec, "jmin:jmax:steps,bmin:bmax:steps grid");
    visibility->add_option("--out", vis_out, "grid CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (distill->parsed())
            return cmd_distill(counts_files, finite_size, sigmas, merge_bell, k, json_out,
                               curve_out);
        if (bounds->parsed()) return cmd_bounds(bounds_counts, b_finite, b_sigmas, b_merge, b_k);
        if (simulate->parsed())
            return cmd_simulate(config_path, out_path, seed, seed_opt->count() > 0, expected,
                                stats_out);
        if (visibility->parsed())
            return cmd_visibility(jitter_ps, bandwidth_ghz, fwhm_ps, grid_spec, vis_out);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("mdiqkd");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mdiqkd::io
