#include "hyperstab/supervisor.hpp"

#include "hyperstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyperstab {

namespace {
constexpr double kTimeTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

size_t interval_index(const std::vector<SwitchEntry>& entries, double t) {
    if (entries.empty() || t < entries.front().t - kTimeTol)
        throw CoverageError("time precedes the schedule");
    size_t i = 0;
    while (i + 1 < entries.size() && entries[i + 1].t <= t + kTimeTol) ++i;
    return i;
}
}  // namespace

size_t SimulationTrace::index_at(double t) const {
    const auto it = std::lower_bound(steps.begin(), steps.end(), t - kTimeTol,
                                     [](const TraceStep& s, double v) { return s.t < v; });
    if (it == steps.end() || std::abs(it->t - t) > kTimeTol)
        throw CoverageError("time is not a grid point of the trace");
    return static_cast<size_t>(it - steps.begin());
}

void SwitchingSchedule::validate(int num_modes) const {
    if (sti.empty() || std::abs(sti.front().t) > kTimeTol)
        throw ValidationError("schedule must start with t0 = 0 in sti");
    if (sti0.empty() || std::abs(sti0.front().t) > kTimeTol)
        throw ValidationError("schedule must start with t0 = 0 in sti0");
    for (size_t i = 1; i < sti.size(); ++i) {
        const double gap = sti[i].t - sti[i - 1].t;
        if (gap <= kTimeTol) throw ValidationError("sti must be strictly increasing");
        if (gap < min_dwell - kTimeTol)
            throw ValidationError("sti gap below the minimum dwell");
        if (num_modes > 1 && sti[i].id == sti[i - 1].id)
            throw ValidationError("consecutive sti modes must differ");
    }
    for (size_t i = 1; i < sti0.size(); ++i)
        if (sti0[i].t <= sti0[i - 1].t + kTimeTol)
            throw ValidationError("sti0 must be strictly increasing");
    auto in_sti = [&](double t) {
        for (const auto& e : sti)
            if (std::abs(e.t - t) <= kTimeTol) return true;
        return false;
    };
    for (const auto& e : sti0)
        if (!in_sti(e.t))
            throw ValidationError("sti0 instant " + std::to_string(e.t) + " not in sti");

    int prev_index = -1;
    for (double m : marked) {
        int idx = -1;
        for (size_t i = 0; i < sti.size(); ++i)
            if (std::abs(sti[i].t - m) <= kTimeTol) idx = static_cast<int>(i);
        if (idx < 0)
            throw ValidationError("marked instant " + std::to_string(m) + " not in sti");
        if (prev_index >= 0 && idx - prev_index > kMaxMarkedGap)
            throw ValidationError("marked instants exceed the index-gap limit");
        if (idx <= prev_index)
            throw ValidationError("marked instants must be increasing");
        prev_index = idx;
    }
}

int SwitchingSchedule::mode_at(double t) const { return sti[interval_index(sti, t)].id; }
int SwitchingSchedule::device_at(double t) const { return sti0[interval_index(sti0, t)].id; }

double SwitchingSchedule::interval_end(size_t i, double horizon) const {
    return i + 1 < sti.size() ? sti[i + 1].t : horizon;
}

std::string to_string(InstantClass c) {
    switch (c) {
        case InstantClass::P: return "STI_p";
        case InstantClass::N: return "STI_n";
        case InstantClass::Z: return "STI_z";
    }
    return "?";
}

bool InstantClassification::any_negative() const {
    return std::any_of(classes.begin(), classes.end(),
                       [](InstantClass c) { return c == InstantClass::N; });
}

ModeAnalysis analyze_mode(const StateSpaceMode& mode, double eps_margin,
                          const FrequencyGrid& grid) {
    ModeAnalysis out;
    out.mode_id = mode.mode_id;
    out.pr = classify_pr(mode, grid);
    out.envelope = decay_envelope(mode.A, eps_margin);

    const TransferFunction g = minimal_realization(transfer_function(mode));
    for (const auto& p : polynomial_roots(g.den))
        if (std::abs(p) < kCancelTol) out.has_pole_at_origin = true;

    switch (out.pr.cls) {
        case PRClass::PositiveMin:
            out.instant_class = InstantClass::P;
            out.floor_min_re = out.pr.min_re;
            break;
        case PRClass::NegativeMin:
            out.instant_class = InstantClass::N;
            break;
        case PRClass::ZeroMin:
            // Relative-degree-one SPR modes are credited to STI_p with their
            // finite-grid minimum; only non-strict modes land in STI_z.
            if (out.pr.is_strictly_positive_real) {
                out.instant_class = InstantClass::P;
                out.floor_min_re = out.pr.min_re_finite;
                out.spr_relative_degree_one = true;
            } else {
                out.instant_class = InstantClass::Z;
            }
            break;
    }
    return out;
}

InstantClassification classify_schedule(const SwitchingSchedule& schedule,
                                        const std::map<int, ModeAnalysis>& analyses) {
    InstantClassification out;
    out.classes.reserve(schedule.sti.size());
    for (const auto& e : schedule.sti) {
        const auto it = analyses.find(e.id);
        if (it == analyses.end())
            throw ValidationError("mode " + std::to_string(e.id) + " has no analysis");
        out.classes.push_back(it->second.instant_class);
    }
    return out;
}

double energy_floor_step(double floor, InstantClass cls, const ModeAnalysis& mode,
                         const std::vector<double>& u_window, double dt) {
    if (u_window.size() < 2) throw CoverageError("input window must span the interval");
    switch (cls) {
        case InstantClass::P: {
            double integral = 0.0;
            for (size_t i = 1; i < u_window.size(); ++i)
                integral += 0.5 * dt *
                            (u_window[i - 1] * u_window[i - 1] + u_window[i] * u_window[i]);
            return floor + mode.floor_min_re * integral;
        }
        case InstantClass::N: {
            double max_sq = 0.0;
            for (double u : u_window) max_sq = std::max(max_sq, u * u);
            const double span = dt * static_cast<double>(u_window.size() - 1);
            return floor - span * mode.pr.max_abs_re * max_sq;
        }
        case InstantClass::Z:
            return floor;
    }
    return floor;
}

double max_residence_bound(double g, double max_abs_re, double max_u_sq) {
    if (g < 0.0) throw FloorDepletedError("energy floor is negative");
    if (max_u_sq < 0.0) throw ParameterError("max u^2 must be nonnegative");
    if (max_u_sq == 0.0 || max_abs_re == 0.0) return kInf;
    return g / (max_abs_re * max_u_sq);
}

double min_residence_bound(const std::vector<EnvelopeTerm>& intermediates,
                           double K_marked, double rho_marked, double delta) {
    if (delta <= 0.0 || delta >= 1.0) throw ParameterError("delta must lie in (0, 1)");
    if (rho_marked <= 0.0) throw StabilityError("marked parameterization must be stable");
    if (K_marked < 1.0) throw ParameterError("envelope constant K must be >= 1");

    double sum_ln_k = std::log(K_marked);
    double sum_rho_t = 0.0;
    for (const auto& term : intermediates) {
        if (term.K < 1.0) throw ParameterError("envelope constant K must be >= 1");
        sum_ln_k += std::log(term.K);
        sum_rho_t += term.rho * term.T;
    }
    return std::max(0.0, (sum_ln_k - sum_rho_t - std::log(delta)) / rho_marked);
}

ContractionOutcome contraction_check(const SimulationTrace& trace,
                                     const std::vector<double>& marked, double delta,
                                     double tol) {
    ContractionOutcome out;
    for (size_t k = 0; k + 1 < marked.size(); ++k) {
        const Vector& x_from = trace.steps[trace.index_at(marked[k])].x;
        const Vector& x_to = trace.steps[trace.index_at(marked[k + 1])].x;
        ContractionPair pair;
        pair.t_from = marked[k];
        pair.t_to = marked[k + 1];
        if (x_from.norm() < 1e-12) {
            pair.skipped = true;
        } else {
            pair.ratio = x_to.norm() / x_from.norm();
            if (pair.ratio > delta * (1.0 + tol)) out.pass = false;
        }
        out.pairs.push_back(pair);
    }
    return out;
}

SaturationOutcome saturation_vanishing_check(const SimulationTrace& trace,
                                             const SwitchingSchedule& schedule,
                                             const std::map<int, ModeAnalysis>& analyses,
                                             double K, double lambda, double lambda0,
                                             double gamma) {
    if (K <= 0.0 || lambda <= 0.0 || lambda0 <= 0.0)
        throw ParameterError("K, lambda and lambda0 must be positive");
    const double horizon = trace.horizon();

    SaturationOutcome out;
    std::optional<double> t_star;
    double ln_ratio_max = 0.0;
    for (size_t i = 0; i < schedule.sti.size(); ++i) {
        const ModeAnalysis& ma = analyses.at(schedule.sti[i].id);
        if (ma.instant_class != InstantClass::N) continue;
        if (ma.has_pole_at_origin)
            throw ApplicabilityError("non-positive-real interval with a pole at s = 0");
        const double t_i = schedule.sti[i].t;
        const double t_end = std::min(schedule.interval_end(i, horizon), horizon);
        if (!t_star) t_star = t_i;
        const double dwell = t_end - t_i;
        if (dwell > 0.0) ln_ratio_max = std::max(ln_ratio_max, std::log(dwell) / (2.0 * dwell));

        const double cap = K * std::exp(-lambda * t_i);
        for (const auto& step : trace.steps) {
            if (step.t < t_i - kTimeTol || step.t >= t_end - kTimeTol) continue;
            if (std::abs(step.u) > cap * (1.0 + 1e-12)) {
                out.pass = false;
                if (!out.first_violation_time) out.first_violation_time = step.t;
                break;
            }
        }
    }

    out.lambda_required = std::max(lambda0, ln_ratio_max);
    if (!t_star) {
        out.vacuous = true;
        out.energy_ceiling = gamma;
        return out;
    }
    out.lambda_constraint_ok = lambda > out.lambda_required;
    if (!out.lambda_constraint_ok) out.pass = false;
    out.energy_ceiling = gamma + K * K / (1.0 - std::exp(-2.0 * lambda0 * *t_star));
    return out;
}

std::vector<ResidenceBoundRow> residence_bound_table(const SwitchingSchedule& schedule,
                                                     const std::map<int, ModeAnalysis>& analyses,
                                                     double u_sq_cap, double delta,
                                                     double horizon) {
    if (u_sq_cap < 0.0) throw ParameterError("input cap must be nonnegative");
    std::vector<ResidenceBoundRow> rows;

    // Depletion-limited maxima, with u^2 held at the declared cap on every interval.
    double g = 0.0;
    for (size_t i = 0; i < schedule.sti.size(); ++i) {
        const ModeAnalysis& ma = analyses.at(schedule.sti[i].id);
        const double t_i = schedule.sti[i].t;
        const double t_end = std::min(schedule.interval_end(i, horizon), horizon);
        const double dwell = t_end - t_i;
        switch (ma.instant_class) {
            case InstantClass::P:
                g += ma.floor_min_re * u_sq_cap * dwell;
                break;
            case InstantClass::N: {
                ResidenceBoundRow row;
                row.t = t_i;
                row.dwell = dwell;
                row.g_at_entry = g;
                row.max_abs_re = ma.pr.max_abs_re;
                row.max_u_sq = u_sq_cap;
                row.bound = max_residence_bound(std::max(g, 0.0), ma.pr.max_abs_re, u_sq_cap);
                row.ok = dwell < row.bound;
                rows.push_back(row);
                g -= dwell * ma.pr.max_abs_re * u_sq_cap;
                break;
            }
            case InstantClass::Z:
                break;
        }
    }

    // Contraction-driven minima for consecutive marked pairs.
    for (size_t k = 0; k + 1 < schedule.marked.size(); ++k) {
        const double t_from = schedule.marked[k];
        const double t_to = schedule.marked[k + 1];
        const size_t i_from = interval_index(schedule.sti, t_from);
        const ModeAnalysis& marked_ma = analyses.at(schedule.sti[i_from].id);

        std::vector<EnvelopeTerm> intermediates;
        for (size_t i = i_from + 1; i < schedule.sti.size() && schedule.sti[i].t < t_to - kTimeTol;
             ++i) {
            const ModeAnalysis& ma = analyses.at(schedule.sti[i].id);
            intermediates.push_back({ma.envelope.K, ma.envelope.rho,
                                     std::min(schedule.interval_end(i, horizon), t_to) -
                                         schedule.sti[i].t});
        }
        ResidenceBoundRow row;
        row.t = t_from;
        row.dwell = schedule.interval_end(i_from, horizon) - t_from;
        row.is_minimum = true;
        row.bound = min_residence_bound(intermediates, marked_ma.envelope.K,
                                        marked_ma.envelope.rho, delta);
        row.ok = row.dwell >= row.bound - kTimeTol;
        rows.push_back(row);
    }
    return rows;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::UnconditionallyAsymptoticallyHyperstable:
            return "UnconditionallyAsymptoticallyHyperstable";
        case Verdict::NotUnconditional: return "NotUnconditional";
        case Verdict::ConditionallyAsymptoticallyHyperstable:
            return "ConditionallyAsymptoticallyHyperstable";
        case Verdict::Undetermined: return "Undetermined";
    }
    return "?";
}

AnalysisVerdict hyperstability_verdict(const std::vector<StateSpaceMode>& modes,
                                       const SwitchingSchedule& schedule,
                                       const std::vector<FeedbackDevice>& devices,
                                       const std::map<int, ModeAnalysis>& analyses,
                                       const VerdictContext& ctx, double horizon) {
    AnalysisVerdict out;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        out.conditions.push_back({name, pass, detail});
        if (!pass && out.failed_condition.empty()) out.failed_condition = name;
        return pass;
    };

    bool all_spr = true;
    for (const auto& m : modes)
        all_spr = all_spr && analyses.at(m.mode_id).pr.is_strictly_positive_real;
    add("all-modes-spr", all_spr, all_spr ? "" : "some mode is not strictly positive real");

    bool devices_ok = true;
    for (const auto& d : devices) devices_ok = devices_ok && d.passive_by_construction();
    add("device-popov", devices_ok,
        devices_ok ? "all devices passive by construction"
                   : "device Popov condition not verifiable statically");

    add("no-nonexistence-witness", !ctx.nonexistence_witness, ctx.witness_detail);
    add("common-lyapunov-certificate", ctx.certificate_exists,
        ctx.certificate_exists ? "validated common P" : "no validated common P");

    if (all_spr && ctx.nonexistence_witness) {
        out.verdict = Verdict::NotUnconditional;
        out.failed_condition = "no-nonexistence-witness";
        return out;
    }
    if (all_spr && ctx.certificate_exists && devices_ok) {
        out.verdict = Verdict::UnconditionallyAsymptoticallyHyperstable;
        return out;
    }

    // Conditional checklist.
    const InstantClassification cls = classify_schedule(schedule, analyses);
    const bool first_spr =
        analyses.at(schedule.sti.front().id).pr.is_strictly_positive_real;
    add("first-activation-spr", first_spr,
        first_spr ? "" : "first active parameterization is not strictly positive real");

    bool preceded_ok = true;
    for (size_t i = 0; i < cls.classes.size(); ++i) {
        if (cls.classes[i] != InstantClass::N) continue;
        const bool prev_spr =
            i > 0 && analyses.at(schedule.sti[i - 1].id).pr.is_strictly_positive_real;
        preceded_ok = preceded_ok && prev_spr;
    }
    add("negative-preceded-by-spr", preceded_ok,
        preceded_ok ? "" : "a non-positive-real interval is not preceded by an SPR one");

    bool max_res_ok = true;
    std::string max_res_detail;
    if (cls.any_negative() && !ctx.u_sq_cap) {
        max_res_ok = false;
        max_res_detail = "input-magnitude cap required for offline residence bounds";
    } else {
        out.bounds = residence_bound_table(schedule, analyses, ctx.u_sq_cap.value_or(0.0),
                                           ctx.delta, horizon);
        for (const auto& row : out.bounds)
            if (!row.is_minimum && !row.ok) {
                max_res_ok = false;
                max_res_detail = "dwell at t = " + std::to_string(row.t) + " exceeds bound";
            }
    }
    add("max-residence", max_res_ok, max_res_detail);

    bool min_res_ok = true;
    std::string min_res_detail;
    for (const auto& row : out.bounds)
        if (row.is_minimum && !row.ok) {
            min_res_ok = false;
            min_res_detail = "marked dwell at t = " + std::to_string(row.t) + " below minimum";
        }
    for (double m : schedule.marked) {
        const ModeAnalysis& ma = analyses.at(schedule.mode_at(m));
        if (ma.envelope.rho <= 0.0) {
            min_res_ok = false;
            min_res_detail = "marked parameterization at t = " + std::to_string(m) +
                             " is not stable";
        }
    }
    add("min-residence", min_res_ok, min_res_detail);

    if (first_spr && preceded_ok && max_res_ok && min_res_ok && devices_ok)
        out.verdict = Verdict::ConditionallyAsymptoticallyHyperstable;
    else
        out.verdict = Verdict::Undetermined;
    return out;
}

}  // namespace hyperstab
