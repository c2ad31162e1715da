#include "hyperstab/simulator.hpp"

#include "hyperstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyperstab {

namespace {
constexpr double kDivergenceNorm = 1e12;
constexpr double kTimeTol = 1e-9;
}  // namespace

double Probe::value(double t) const {
    switch (kind) {
        case Kind::None:
            return 0.0;
        case Kind::Exp:
            return amplitude * std::exp(-rate * t);
        case Kind::Tabulated: {
            if (table_t.empty()) return 0.0;
            if (t <= table_t.front()) return table_w.front();
            if (t >= table_t.back()) return table_w.back();
            const auto it = std::upper_bound(table_t.begin(), table_t.end(), t);
            const size_t hi = static_cast<size_t>(it - table_t.begin());
            const double wgt = (t - table_t[hi - 1]) / (table_t[hi] - table_t[hi - 1]);
            return table_w[hi - 1] + wgt * (table_w[hi] - table_w[hi - 1]);
        }
    }
    return 0.0;
}

const StateSpaceMode& Scenario::mode(int id) const {
    for (const auto& m : modes)
        if (m.mode_id == id) return m;
    throw ValidationError("unresolved mode id " + std::to_string(id));
}

const FeedbackDevice& Scenario::device(int id) const {
    for (const auto& d : devices)
        if (d.device_id == id) return d;
    throw ValidationError("unresolved device id " + std::to_string(id));
}

double Scenario::max_gamma() const {
    double g = 0.0;
    for (const auto& d : devices) g = std::max(g, d.gamma);
    return g > 0.0 ? g : 1.0;
}

void Scenario::validate() const {
    if (dt <= 0.0) throw ValidationError("dt must be positive");
    if (horizon <= 0.0) throw ValidationError("horizon must be positive");
    if (modes.empty() || devices.empty())
        throw ValidationError("scenario needs at least one mode and one device");
    for (const auto& m : modes) m.validate();
    for (const auto& d : devices) d.validate();
    for (size_t i = 0; i < modes.size(); ++i)
        for (size_t j = i + 1; j < modes.size(); ++j)
            if (modes[i].mode_id == modes[j].mode_id)
                throw ValidationError("duplicate mode id");
    const int n = modes.front().order();
    for (const auto& m : modes)
        if (m.order() != n) throw ValidationError("all modes must share the state dimension");
    if (x0.size() != n) throw ValidationError("x0 must match the state dimension");
    schedule.validate(static_cast<int>(modes.size()));
    if (schedule.sti.back().t > horizon + kTimeTol)
        throw ValidationError("horizon must cover the last switching instant");
    for (const auto& e : schedule.sti) mode(e.id);
    for (const auto& e : schedule.sti0) {
        const FeedbackDevice& d = device(e.id);
        // Algebraic loop with d != 0 needs a monotone device for a unique fixed point.
        const int m_id = schedule.mode_at(e.t);
        if (mode(m_id).d != 0.0 && !d.monotone_in_y())
            throw ConfigurationError("feedthrough requires a monotone feedback device");
    }
}

OutputSolveResult output_solve(const StateSpaceMode& mode, const Vector& x,
                               const FeedbackDevice& device, double t, double w) {
    const double cx = mode.c.dot(x);
    OutputSolveResult out;
    if (mode.d == 0.0) {
        out.y = cx;
        out.u = -device.phi(out.y, t) + w;
        return out;
    }
    if (!device.monotone_in_y() || mode.d < 0.0)
        throw ConfigurationError("feedthrough loop needs d >= 0 and a monotone device");

    // Solve y = cx - d phi(y, t) + d w; residual r(y) is increasing in y.
    auto residual = [&](double y) { return y - cx + mode.d * device.phi(y, t) - mode.d * w; };
    double lo = cx + mode.d * w, hi = lo;
    double width = std::max(1.0, std::abs(lo));
    for (int i = 0; i < 80 && residual(lo) > 0.0; ++i) {
        lo -= width;
        width *= 2.0;
    }
    width = std::max(1.0, std::abs(hi));
    for (int i = 0; i < 80 && residual(hi) < 0.0; ++i) {
        hi += width;
        width *= 2.0;
    }
    if (residual(lo) > 0.0 || residual(hi) < 0.0)
        throw FixedPointError("no sign change bracketing the output equation");

    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (std::abs(r) < 1e-13) {
            lo = hi = mid;
            break;
        }
        (r > 0.0 ? hi : lo) = mid;
    }
    out.y = 0.5 * (lo + hi);
    if (std::abs(residual(out.y)) > 1e-12)
        throw FixedPointError("output equation residual above tolerance");
    out.u = -device.phi(out.y, t) + w;
    return out;
}

SimulationTrace simulate(const Scenario& scenario, const std::map<int, ModeAnalysis>* analyses) {
    scenario.validate();

    SimulationTrace trace;
    trace.scenario_digest = scenario.digest;
    trace.dt = scenario.dt;
    trace.gamma = scenario.max_gamma();

    // Grid: uniform dt within each switching interval, snapped to the instants.
    std::vector<double> boundaries;
    for (const auto& e : scenario.schedule.sti)
        if (e.t < scenario.horizon - kTimeTol) boundaries.push_back(e.t);
    boundaries.push_back(scenario.horizon);

    Vector x = scenario.x0;
    double E = 0.0, popov = 0.0, g_floor = 0.0;

    // Per-interval floor bookkeeping.
    double g_interval_start = 0.0, u_sq_integral = 0.0, u_sq_max = 0.0, interval_t0 = 0.0;

    auto record = [&](double t, const StateSpaceMode& mode, const FeedbackDevice& device,
                      const ModeAnalysis* ma) {
        const double w = scenario.probe.value(t);
        const auto yu = output_solve(mode, x, device, t, w);
        TraceStep step;
        step.t = t;
        step.mode_id = mode.mode_id;
        step.device_id = device.device_id;
        step.x = x;
        step.u = yu.u;
        step.y = yu.y;
        step.E = E;
        step.popov = popov;
        if (ma) {
            switch (ma->instant_class) {
                case InstantClass::P:
                    g_floor = g_interval_start + ma->floor_min_re * u_sq_integral;
                    break;
                case InstantClass::N:
                    g_floor = g_interval_start -
                              (t - interval_t0) * ma->pr.max_abs_re * u_sq_max;
                    break;
                case InstantClass::Z:
                    g_floor = g_interval_start;
                    break;
            }
        }
        step.g_floor = g_floor;
        trace.steps.push_back(step);
        return yu;
    };

    bool first = true;
    for (size_t seg = 0; seg + 1 < boundaries.size() && !trace.diverged; ++seg) {
        const double t_a = boundaries[seg], t_b = boundaries[seg + 1];
        const StateSpaceMode& mode = scenario.mode(scenario.schedule.mode_at(t_a));
        const FeedbackDevice& device = scenario.device(scenario.schedule.device_at(t_a));
        const ModeAnalysis* ma = nullptr;
        if (analyses) {
            const auto it = analyses->find(mode.mode_id);
            if (it == analyses->end())
                throw ValidationError("missing analysis for mode " +
                                      std::to_string(mode.mode_id));
            ma = &it->second;
        }

        g_interval_start = g_floor;
        u_sq_integral = 0.0;
        u_sq_max = 0.0;
        interval_t0 = t_a;

        // State augmented with the running quadratures (E, Popov integral,
        // interval int u^2), so they inherit the fourth-order accuracy.
        const long n = x.size();
        auto deriv = [&](double t, const Vector& zs) -> Vector {
            const double w = scenario.probe.value(t);
            const Vector xs = zs.head(n);
            const auto yu = output_solve(mode, xs, device, t, w);
            Vector dz(n + 3);
            dz.head(n) = mode.A * xs + mode.b * yu.u;
            dz(n) = yu.y * yu.u;
            dz(n + 1) = (w - yu.u) * yu.y;
            dz(n + 2) = yu.u * yu.u;
            return dz;
        };

        if (first) {
            const auto yu = record(t_a, mode, device, ma);
            u_sq_max = yu.u * yu.u;
            first = false;
        } else {
            // Interval start coincides with the last recorded grid point; restart
            // the interval accumulators from the recorded input there.
            const double u0 = trace.steps.back().u;
            u_sq_max = u0 * u0;
        }

        Vector z(n + 3);
        z.head(n) = x;
        z(n) = E;
        z(n + 1) = popov;
        z(n + 2) = 0.0;

        const int steps = std::max(1, static_cast<int>(std::ceil((t_b - t_a) / scenario.dt -
                                                                 kTimeTol)));
        for (int k = 0; k < steps; ++k) {
            const double t0 = t_a + k * scenario.dt;
            const double t1 = k + 1 == steps ? t_b : t0 + scenario.dt;
            const double h = t1 - t0;

            const Vector k1 = deriv(t0, z);
            const Vector k2 = deriv(t0 + 0.5 * h, z + 0.5 * h * k1);
            const Vector k3 = deriv(t0 + 0.5 * h, z + 0.5 * h * k2);
            const Vector k4 = deriv(t1, z + h * k3);
            z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

            x = z.head(n);
            E = z(n);
            popov = z(n + 1);
            u_sq_integral = z(n + 2);

            if (!x.allFinite() || x.norm() > kDivergenceNorm) {
                trace.diverged = true;
                trace.divergence_time = t1;
                break;
            }

            const auto yu = record(t1, mode, device, ma);
            u_sq_max = std::max(u_sq_max, yu.u * yu.u);
        }
    }
    return trace;
}

double energy(const SimulationTrace& trace, double t) {
    if (trace.steps.empty() || t < trace.steps.front().t - kTimeTol ||
        t > trace.horizon() + kTimeTol)
        throw ParameterError("time outside the trace horizon");
    const auto it = std::lower_bound(trace.steps.begin(), trace.steps.end(), t,
                                     [](const TraceStep& s, double v) { return s.t < v; });
    if (it == trace.steps.begin()) return it->E;
    if (it == trace.steps.end()) return trace.steps.back().E;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (hi.t - lo.t < kTimeTol) return hi.E;
    const double wgt = (t - lo.t) / (hi.t - lo.t);
    return lo.E + wgt * (hi.E - lo.E);
}

ParsevalReport parseval_crosscheck(const SimulationTrace& trace,
                                   const std::vector<StateSpaceMode>& modes,
                                   const SwitchingSchedule& schedule) {
    if (trace.steps.empty()) throw CoverageError("empty trace");
    if (trace.steps.front().x.norm() > 1e-12)
        throw ApplicabilityError("Parseval cross-check requires zero initial state");
    if (std::abs(trace.steps.back().u) > 1e-8)
        throw ApplicabilityError("input has not decayed at the horizon");

    const double horizon = trace.horizon();
    const double d_omega = 2.0 * M_PI / (8.0 * std::max(horizon, 1.0));
    const double omega_max = M_PI / trace.dt;
    const int n_omega = static_cast<int>(std::ceil(omega_max / d_omega));

    std::vector<double> boundaries;
    for (const auto& e : schedule.sti)
        if (e.t < horizon - kTimeTol) boundaries.push_back(e.t);
    boundaries.push_back(horizon);

    ParsevalReport report;
    report.total_time = trace.steps.back().E;

    for (size_t seg = 0; seg + 1 < boundaries.size(); ++seg) {
        const double t_a = boundaries[seg], t_b = boundaries[seg + 1];
        ParsevalSegment ps;
        ps.t_begin = t_a;
        ps.t_end = t_b;
        ps.mode_id = schedule.mode_at(t_a);
        const StateSpaceMode* mode = nullptr;
        for (const auto& m : modes)
            if (m.mode_id == ps.mode_id) mode = &m;
        if (!mode) throw ValidationError("unresolved mode in Parseval check");
        const TransferFunction g = transfer_function(*mode);

        std::vector<double> ts, us;
        for (const auto& s : trace.steps) {
            if (s.t < t_a - kTimeTol || s.t > t_b + kTimeTol) continue;
            ts.push_back(s.t);
            us.push_back(s.u);
        }
        // Energy in the truncated window (the window excludes its right endpoint,
        // consistent with the right-continuous switch convention).
        ps.time_energy = energy(trace, t_b) - energy(trace, t_a);

        // (1/2pi) int Re G |U|^2 dw = (1/pi) int_0^wmax, by hodograph symmetry.
        double acc = 0.0;
        double prev_val = 0.0;
        for (int k = 0; k <= n_omega; ++k) {
            const double w = k * d_omega;
            Complex U(0.0, 0.0);
            Complex rot(1.0, 0.0);
            Complex prev_phase = std::polar(1.0, -w * ts[0]);
            double prev_dt = -1.0;
            for (size_t i = 1; i < ts.size(); ++i) {
                const double hstep = ts[i] - ts[i - 1];
                if (std::abs(hstep - prev_dt) > 1e-12) {
                    rot = std::polar(1.0, -w * hstep);
                    prev_dt = hstep;
                }
                const Complex cur_phase = prev_phase * rot;
                U += 0.5 * hstep * (us[i - 1] * prev_phase + us[i] * cur_phase);
                prev_phase = cur_phase;
            }
            const double val = freq_response(g, w).real() * std::norm(U);
            if (k > 0) acc += 0.5 * d_omega * (prev_val + val);
            prev_val = val;
        }
        ps.freq_energy = acc / M_PI;
        ps.abs_discrepancy = std::abs(ps.freq_energy - ps.time_energy);
        ps.rel_discrepancy = ps.abs_discrepancy / std::max(1e-12, std::abs(ps.time_energy));
        report.total_freq += ps.freq_energy;
        report.segments.push_back(ps);
    }

    report.abs_discrepancy = std::abs(report.total_freq - report.total_time);
    report.rel_discrepancy =
        report.abs_discrepancy / std::max(1e-12, std::abs(report.total_time));
    return report;
}

std::vector<MarginPoint> lower_bound_check(const SimulationTrace& trace,
                                           const SwitchingSchedule& schedule) {
    if (trace.steps.empty()) throw CoverageError("empty trace");
    if (trace.steps.front().x.norm() > 1e-12)
        throw ApplicabilityError("lower-bound check requires zero initial state");
    std::vector<MarginPoint> out;
    auto add_at = [&](double t) {
        const TraceStep& s = trace.steps[trace.index_at(t)];
        out.push_back({s.t, s.E, s.g_floor, s.E - s.g_floor});
    };
    for (const auto& e : schedule.sti)
        if (e.t <= trace.horizon() + kTimeTol) add_at(e.t);
    add_at(trace.horizon());
    return out;
}

}  // namespace hyperstab
