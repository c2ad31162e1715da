#include "hyperstab/errors.hpp"
#include "hyperstab/scenario.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace hyperstab;

constexpr double kCheckTol = 1e-6;

struct Options {
    std::string scenario_path;
    std::string out_path;
    std::string trace_path;
    double dt_override = 0.0;
    unsigned seed = 0;
    bool quiet = false;
};

VerdictContext make_context(const LoadedScenario& loaded, const CommonLyapunovReport& lyap) {
    VerdictContext ctx;
    ctx.u_sq_cap = loaded.analysis.u_sq_cap;
    ctx.delta = loaded.analysis.delta;
    ctx.certificate_exists = lyap.exists_certificate;
    ctx.nonexistence_witness = !lyap.necessary_test_failures.empty();
    if (ctx.nonexistence_witness)
        ctx.witness_detail = lyap.necessary_test_failures.front().first + ": " +
                             lyap.necessary_test_failures.front().second;
    return ctx;
}

int cmd_analyze(const Options& opt) {
    const LoadedScenario loaded = load_scenario(opt.scenario_path);
    const auto analyses = analyze_all_modes(loaded);
    const auto lyap = lyapunov_battery(loaded.scenario.modes, loaded.analysis.lyapunov);
    const auto verdict =
        hyperstability_verdict(loaded.scenario.modes, loaded.scenario.schedule,
                         loaded.scenario.devices, analyses, make_context(loaded, lyap),
                         loaded.scenario.horizon);
    const auto report = build_analysis_report(loaded, analyses, lyap, verdict);
    if (opt.out_path.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream out(opt.out_path);
        out << report.dump(2) << "\n";
    }
    if (!opt.quiet) std::cerr << "verdict: " << to_string(verdict.verdict) << "\n";
    return 0;
}

int cmd_simulate(const Options& opt) {
    LoadedScenario loaded = load_scenario(opt.scenario_path);
    if (opt.dt_override > 0.0) loaded.scenario.dt = opt.dt_override;
    const auto analyses = analyze_all_modes(loaded);
    const SimulationTrace trace = simulate(loaded.scenario, &analyses);

    const std::string out = opt.out_path.empty() ? "trace.csv" : opt.out_path;
    write_trace_csv(trace, out);

    double max_E = -std::numeric_limits<double>::infinity();
    double min_g = std::numeric_limits<double>::infinity();
    double min_popov = std::numeric_limits<double>::infinity();
    for (const auto& s : trace.steps) {
        max_E = std::max(max_E, s.E);
        min_g = std::min(min_g, s.g_floor);
        min_popov = std::min(min_popov, s.popov);
    }
    if (!opt.quiet) {
        const auto& last = trace.steps.back();
        std::printf("final |x| = %.6g\n", last.x.norm());
        std::printf("final |u| = %.6g\n", std::abs(last.u));
        std::printf("max E = %.6g\n", max_E);
        std::printf("min g_floor = %.6g\n", min_g);
        const double gamma = trace.gamma;
        if (min_popov < -gamma - 1e-6 * (1.0 + gamma))
            std::printf("popov violation: integral reached %.6g below -gamma = %.6g\n",
                        min_popov, -gamma);
        else
            std::printf("popov violations: none\n");
        if (!loaded.scenario.schedule.marked.empty() && !trace.diverged) {
            const auto contraction = contraction_check(trace, loaded.scenario.schedule.marked,
                                                       loaded.analysis.delta);
            for (const auto& p : contraction.pairs)
                if (!p.skipped)
                    std::printf("contraction [%g, %g]: ratio %.6g\n", p.t_from, p.t_to, p.ratio);
        }
        if (trace.diverged)
            std::printf("DIVERGED at t = %.6g\n", *trace.divergence_time);
    }
    return trace.diverged ? 2 : 0;
}

int cmd_bounds(const Options& opt) {
    const LoadedScenario loaded = load_scenario(opt.scenario_path);
    const auto analyses = analyze_all_modes(loaded);
    const auto cls = classify_schedule(loaded.scenario.schedule, analyses);
    if (cls.any_negative() && !loaded.analysis.u_sq_cap)
        throw ParameterError("schedule has STI_n intervals; declare analysis.u_sq_cap");

    const auto rows =
        residence_bound_table(loaded.scenario.schedule, analyses,
                              loaded.analysis.u_sq_cap.value_or(0.0), loaded.analysis.delta,
                              loaded.scenario.horizon);
    bool any_max = false;
    for (const auto& row : rows) {
        if (row.is_minimum) {
            std::printf("minimum residence at t = %g: required %.6g, dwell %.6g [%s]\n", row.t,
                        row.bound, row.dwell, row.ok ? "ok" : "VIOLATED");
        } else {
            any_max = true;
            std::printf("maximum residence at t = %g: bound %.6g (g = %.6g, max|Re G| = %.6g, "
                        "u^2 cap = %.6g), dwell %.6g [%s]\n",
                        row.t, row.bound, row.g_at_entry, row.max_abs_re, row.max_u_sq,
                        row.dwell, row.ok ? "ok" : "VIOLATED");
        }
    }
    if (!any_max) std::printf("no STI_n intervals; no maximum residence constraints\n");
    return 0;
}

int cmd_check(const Options& opt) {
    const LoadedScenario loaded = load_scenario(opt.scenario_path);
    const SimulationTrace trace = read_trace_csv(opt.trace_path);
    if (trace.scenario_digest != loaded.scenario.digest)
        throw ProvenanceError("trace digest does not match the scenario");

    const double gamma = loaded.scenario.max_gamma();
    bool all_pass = true;
    auto check = [&](const std::string& name, bool pass, double margin) {
        std::printf("[%s] %s (margin %.3g)\n", pass ? "PASS" : "FAIL", name.c_str(), margin);
        all_pass = all_pass && pass;
    };

    double min_g = std::numeric_limits<double>::infinity();
    double min_E = std::numeric_limits<double>::infinity();
    double max_E = -std::numeric_limits<double>::infinity();
    double min_popov = std::numeric_limits<double>::infinity();
    double max_abs_u = 0.0;
    for (const auto& s : trace.steps) {
        min_g = std::min(min_g, s.g_floor);
        min_E = std::min(min_E, s.E);
        max_E = std::max(max_E, s.E);
        min_popov = std::min(min_popov, s.popov);
        max_abs_u = std::max(max_abs_u, std::abs(s.u));
    }

    check("energy floor nonnegative", min_g >= -kCheckTol, min_g);
    check("popov floor", min_popov >= -gamma - 1e-6 * (1.0 + gamma), min_popov + gamma);

    const bool zero_state_probe =
        loaded.scenario.x0.norm() == 0.0 && loaded.scenario.probe.present();
    if (zero_state_probe) {
        check("energy nonnegative", min_E >= -kCheckTol, min_E);
        check("energy below gamma", max_E <= gamma + kCheckTol, gamma - max_E);
    }

    if (!loaded.scenario.schedule.marked.empty() && max_abs_u < 1e-12) {
        const auto contraction =
            contraction_check(trace, loaded.scenario.schedule.marked, loaded.analysis.delta);
        double worst = 0.0;
        for (const auto& p : contraction.pairs)
            if (!p.skipped) worst = std::max(worst, p.ratio);
        check("marked-instant contraction", contraction.pass,
              loaded.analysis.delta * (1.0 + kTolContr) - worst);
    }

    if (loaded.analysis.K_sat && loaded.analysis.lambda_sat) {
        const auto analyses = analyze_all_modes(loaded);
        const auto sat = saturation_vanishing_check(
            trace, loaded.scenario.schedule, analyses, *loaded.analysis.K_sat,
            *loaded.analysis.lambda_sat, loaded.analysis.lambda0, gamma);
        check("saturation-vanishing envelope", sat.pass,
              sat.first_violation_time ? -*sat.first_violation_time : 0.0);
        if (!sat.vacuous)
            std::printf("energy ceiling: %.9g\n", sat.energy_ceiling);
    }
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"switched-system hyperstability analysis toolkit"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--seed", opt.seed, "seed for randomized suites");
    app.add_flag("--quiet", opt.quiet, "suppress progress output");

    auto* analyze = app.add_subcommand("analyze", "classify modes and emit the verdict report");
    analyze->add_option("--scenario", opt.scenario_path, "scenario file")->required();
    analyze->add_option("--out", opt.out_path, "report output path");

    auto* simulate = app.add_subcommand("simulate", "integrate the closed loop and write a trace");
    simulate->add_option("--scenario", opt.scenario_path, "scenario file")->required();
    simulate->add_option("--out", opt.out_path, "trace output path");
    simulate->add_option("--dt", opt.dt_override, "integration step override");

    auto* bounds = app.add_subcommand("bounds", "print residence-time bound tables");
    bounds->add_option("--scenario", opt.scenario_path, "scenario file")->required();

    auto* chk = app.add_subcommand("check", "run the invariant suite against a trace");
    chk->add_option("--scenario", opt.scenario_path, "scenario file")->required();
    chk->add_option("--trace", opt.trace_path, "trace CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (bounds->parsed()) return cmd_bounds(opt);
        if (chk->parsed()) return cmd_check(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
