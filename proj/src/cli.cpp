#include "ffbs/cli.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <limits>
#include <string>
#include <vector>

#include "ffbs/config.hpp"
#include "ffbs/errors.hpp"
#include "ffbs/sim.hpp"
#include "ffbs/trace.hpp"
#include "ffbs/verify.hpp"

namespace ffbs {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_plots(const Trace& tr, const std::filesystem::path& dir) {
    write_svg_line_plot((dir / "tracking.svg").string(), "tracking error xi1", tr.t, tr.xi1);
    if (!tr.est_steps.empty()) {
        write_svg_line_plot((dir / "approx.svg").string(),
                            "approximation error e_F" + std::to_string(tr.est_steps[0]),
                            tr.t, tr.approx_error[0]);
        write_svg_line_plot((dir / "switch.svg").string(),
                            "switching signal w" + std::to_string(tr.est_steps[0]), tr.t,
                            tr.w[0]);
    }
}

int do_run(const nlohmann::json& resolved) {
    const BuiltScenario built = build_scenario(resolved);
    const std::filesystem::path dir(built.out_dir);
    std::filesystem::create_directories(dir);

    Trace tr;
    try {
        tr = run_closed_loop(built.stack, built.opts);
    } catch (const DivergenceError& e) {
        if (e.prefix.samples() > 0)
            write_trace_csv(e.prefix, (dir / "trace_diverged.csv").string());
        std::cerr << "error: " << e.what() << " (t=" << num_short(e.t_abort) << ")\n";
        return 3;
    }
    write_trace_csv(tr, (dir / "trace.csv").string());
    if (built.plots) write_plots(tr, dir);

    const double t_hi = built.opts.t_final;
    const RunMetrics m = metrics(tr, t_hi / 2.0, t_hi);
    std::cout << "variant=" << variant_tag(built.opts.variant) << " dt=" << num_short(built.opts.dt)
              << " t_final=" << num_short(t_hi) << " samples=" << tr.samples() << "\n"
              << "wrote " << (dir / "trace.csv").string()
              << (built.plots ? " tracking.svg approx.svg switch.svg" : "") << "\n"
              << "window [" << num_short(t_hi / 2.0) << ", " << num_short(t_hi)
              << "]: rms_tracking=" << num_short(m.rms_tracking)
              << " rms_approx_error=" << num_short(m.rms_approx_error)
              << " max_abs_state=" << num_short(m.max_abs_state)
              << " switch_duty=" << num_short(m.switch_duty)
              << " settle_time=" << num_short(m.settle_time) << "\n";
    return 0;
}

int do_compare(const nlohmann::json& resolved, const std::vector<std::string>& tags) {
    std::vector<Variant> variants;
    for (const auto& tag : tags) variants.push_back(parse_variant(tag));
    if (variants.size() < 2) throw ConfigError("compare needs at least two variants");

    const BuiltScenario built = build_scenario(resolved);
    const std::filesystem::path dir(built.out_dir);
    std::filesystem::create_directories(dir);

    const double t_hi = built.opts.t_final;
    const auto rows = compare_variants(built.stack, built.opts, variants, t_hi / 2.0, t_hi);

    std::ofstream csv(dir / "comparison.csv", std::ios::binary);
    if (!csv) throw ConfigError("cannot open output file: " + (dir / "comparison.csv").string());
    csv << "variant,status,rms_tracking,rms_approx_error,settle_time,switch_duty\n";
    for (const auto& row : rows) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        csv << row.tag << ',' << (row.ok ? "ok" : "failed") << ','
            << num(row.ok ? row.metrics.rms_tracking : nan) << ','
            << num(row.ok ? row.metrics.rms_approx_error : nan) << ','
            << num(row.ok ? row.metrics.settle_time : nan) << ','
            << num(row.ok ? row.metrics.switch_duty : nan) << '\n';
    }
    csv.close();

    std::printf("%-30s %-7s %13s %17s %12s %12s\n", "variant", "status", "rms_tracking",
                "rms_approx_error", "settle_time", "switch_duty");
    bool all_ok = true;
    for (const auto& row : rows) {
        if (row.ok) {
            std::printf("%-30s %-7s %13s %17s %12s %12s\n", row.tag.c_str(), "ok",
                        num_short(row.metrics.rms_tracking).c_str(),
                        num_short(row.metrics.rms_approx_error).c_str(),
                        num_short(row.metrics.settle_time).c_str(),
                        num_short(row.metrics.switch_duty).c_str());
        } else {
            all_ok = false;
            std::printf("%-30s %-7s %s\n", row.tag.c_str(), "failed", row.error.c_str());
        }
    }
    std::cout << "wrote " << (dir / "comparison.csv").string() << "\n";
    return all_ok ? 0 : 3;
}

int do_verify(long samples, double tolerance) {
    if (samples < 1) throw ConfigError("verify needs a sample count >= 1");
    if (tolerance < 0.0) throw ConfigError("verify tolerance must be >= 0");
    const auto suites = run_verification(samples, tolerance);
    bool all_ok = true;
    for (const auto& suite : suites) {
        if (suite.passed) {
            std::printf("[ ok ] %-20s (%ld samples)\n", suite.name.c_str(), suite.samples);
        } else {
            all_ok = false;
            std::printf("[FAIL] %-20s (%ld samples): %s\n", suite.name.c_str(), suite.samples,
                        suite.counterexample.c_str());
        }
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"composite-learning fast finite-time backstepping simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, variant;
    std::vector<std::string> variants;
    double dt = 0.0, t_final = 0.0, tolerance = 1e-12;
    long samples = 100000;
    bool no_plots = false;

    auto* run_cmd = app.add_subcommand("run", "simulate one variant, write trace and plots");
    auto* run_config = run_cmd->add_option("--config", config_path, "config file (JSON)");
    auto* run_out = run_cmd->add_option("--out-dir", out_dir, "output directory");
    auto* run_dt = run_cmd->add_option("--dt", dt, "integration step");
    auto* run_tf = run_cmd->add_option("--t-final", t_final, "simulation horizon");
    auto* run_variant = run_cmd->add_option("--variant", variant, "controller variant tag");
    auto* run_noplots = run_cmd->add_flag("--no-plots", no_plots, "skip SVG output");

    auto* cmp_cmd = app.add_subcommand("compare", "run several variants, write a comparison table");
    auto* cmp_config = cmp_cmd->add_option("--config", config_path, "config file (JSON)");
    auto* cmp_out = cmp_cmd->add_option("--out-dir", out_dir, "output directory");
    auto* cmp_dt = cmp_cmd->add_option("--dt", dt, "integration step");
    auto* cmp_tf = cmp_cmd->add_option("--t-final", t_final, "simulation horizon");
    auto* cmp_variant =
        cmp_cmd->add_option("--variant", variants, "variant tag (repeat; default: all three)");

    auto* ver_cmd = app.add_subcommand("verify", "run the property suites");
    ver_cmd->add_option("--samples", samples, "samples per suite");
    ver_cmd->add_option("--tolerance", tolerance, "inequality slack");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ver_cmd->parsed()) return do_verify(samples, tolerance);

        nlohmann::json resolved = config_path.empty() && !(run_config->count() || cmp_config->count())
                                      ? resolve_config(nlohmann::json::object())
                                      : load_config_file(config_path);
        if (run_cmd->parsed()) {
            if (run_out->count()) resolved["out_dir"] = out_dir;
            if (run_dt->count()) resolved["dt"] = dt;
            if (run_tf->count()) resolved["t_final"] = t_final;
            if (run_variant->count()) resolved["variant"] = variant;
            if (run_noplots->count()) resolved["plots"] = false;
            return do_run(resolved);
        }
        if (cmp_out->count()) resolved["out_dir"] = out_dir;
        if (cmp_dt->count()) resolved["dt"] = dt;
        if (cmp_tf->count()) resolved["t_final"] = t_final;
        if (!cmp_variant->count())
            variants = {"developed", "developed-without-composite", "fse-rbfnn-cfb"};
        return do_compare(resolved, variants);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << " (t=" << num_short(e.t_abort) << ")\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << " (t=" << num_short(e.t_abort) << ")\n";
        return 3;
    }
}

}  // namespace ffbs
