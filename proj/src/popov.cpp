#include "hyperstab/popov.hpp"

#include "hyperstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyperstab {

namespace {

double table_lookup(const std::vector<double>& ts, const std::vector<double>& vs,
                    double t, bool interpolate) {
    if (ts.empty()) throw ConfigurationError("empty device table");
    if (t <= ts.front()) return vs.front();
    if (t >= ts.back()) return vs.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const size_t hi = static_cast<size_t>(it - ts.begin());
    if (!interpolate) return vs[hi - 1];  // step function, right-continuous
    const double w = (t - ts[hi - 1]) / (ts[hi] - ts[hi - 1]);
    return vs[hi - 1] + w * (vs[hi] - vs[hi - 1]);
}

}  // namespace

std::string to_string(DeviceKind k) {
    switch (k) {
        case DeviceKind::LinearGain: return "linear";
        case DeviceKind::Sector: return "sector";
        case DeviceKind::Saturation: return "saturation";
        case DeviceKind::Relay: return "relay";
        case DeviceKind::TimeVaryingGain: return "time_varying_gain";
        case DeviceKind::Tabulated: return "tabulated";
    }
    return "?";
}

double FeedbackDevice::phi(double y, double t) const {
    switch (kind) {
        case DeviceKind::LinearGain:
            return k * y;
        case DeviceKind::Sector:
            // phi/y = k1 + (k2 - k1)/(1 + y^2), inside [k1, k2] for k2 >= k1.
            return y * (k1 + (k2 - k1) / (1.0 + y * y));
        case DeviceKind::Saturation:
            return std::clamp(k * y, -limit, limit);
        case DeviceKind::Relay:
            if (y > threshold) return 1.0;
            if (y < -threshold) return -1.0;
            return 0.0;
        case DeviceKind::TimeVaryingGain:
            return table_lookup(table_t, table_v, t, /*interpolate=*/false) * y;
        case DeviceKind::Tabulated:
            return table_lookup(table_t, table_v, t, /*interpolate=*/true);
    }
    throw ConfigurationError("unknown device kind");
}

bool FeedbackDevice::passive_by_construction() const {
    switch (kind) {
        case DeviceKind::LinearGain:
            return k >= 0.0;
        case DeviceKind::Sector:
            return k1 >= 0.0 && k2 >= k1;
        case DeviceKind::Saturation:
            return k >= 0.0;
        case DeviceKind::Relay:
            return threshold >= 0.0;
        case DeviceKind::TimeVaryingGain:
            return std::all_of(table_v.begin(), table_v.end(), [](double v) { return v >= 0.0; });
        case DeviceKind::Tabulated:
            return false;
    }
    return false;
}

bool FeedbackDevice::monotone_in_y() const {
    switch (kind) {
        case DeviceKind::LinearGain:
            return k >= 0.0;
        case DeviceKind::Sector:
            // Slope bound of the built-in sector shape: phi' >= k1 - (k2 - k1)/8.
            return k1 >= 0.0 && k2 >= k1 && k2 <= 9.0 * k1;
        case DeviceKind::Saturation:
            return k >= 0.0;
        case DeviceKind::TimeVaryingGain:
            return std::all_of(table_v.begin(), table_v.end(), [](double v) { return v >= 0.0; });
        case DeviceKind::Tabulated:
            return true;  // independent of y, hence trivially nondecreasing
        case DeviceKind::Relay:
            return false;
    }
    return false;
}

void FeedbackDevice::validate() const {
    if (gamma <= 0.0) throw ConfigurationError("device gamma must be positive");
    switch (kind) {
        case DeviceKind::Sector:
            if (k2 < k1) throw ConfigurationError("sector bounds must satisfy k1 <= k2");
            break;
        case DeviceKind::Saturation:
            if (limit <= 0.0) throw ConfigurationError("saturation limit must be positive");
            break;
        case DeviceKind::Relay:
            if (threshold < 0.0) throw ConfigurationError("relay threshold must be nonnegative");
            break;
        case DeviceKind::TimeVaryingGain:
        case DeviceKind::Tabulated:
            if (table_t.size() != table_v.size() || table_t.empty())
                throw ConfigurationError("device table needs matching nonempty t/v lists");
            if (!std::is_sorted(table_t.begin(), table_t.end()))
                throw ConfigurationError("device table instants must be nondecreasing");
            break;
        default:
            break;
    }
}

PopovLedger::PopovLedger(double gamma_) : gamma(gamma_) {
    times.push_back(0.0);
    cumulative.push_back(0.0);
}

void PopovLedger::update(double y, double phi_val, double dt) {
    if (dt <= 0.0) throw ParameterError("ledger step must be positive");
    const double integrand = phi_val * y;
    const double next = cumulative.back() + 0.5 * dt * (last_integrand + integrand);
    times.push_back(times.back() + dt);
    cumulative.push_back(next);
    last_integrand = integrand;
    if (!violated_at && next < -gamma - tol()) violated_at = times.back();
}

namespace {

FloorCheckOutcome window_floor(const PopovLedger& ledger, double t_lo, double t_hi) {
    if (ledger.times.back() + 1e-12 < t_hi || ledger.times.front() > t_lo + 1e-12)
        throw CoverageError("ledger does not cover the requested window");
    FloorCheckOutcome out;
    out.min_margin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ledger.times.size(); ++i) {
        const double t = ledger.times[i];
        if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
        const double margin = ledger.cumulative[i] + ledger.gamma;
        out.min_margin = std::min(out.min_margin, margin);
        if (margin < -ledger.tol() && out.pass) {
            out.pass = false;
            out.first_violation_time = t;
        }
    }
    return out;
}

}  // namespace

FloorCheckOutcome interval_floor_check(const PopovLedger& ledger, double t_i, double t_next) {
    return window_floor(ledger, t_i, t_next);
}

FloorCheckOutcome tail_floor_check(const PopovLedger& ledger, double t_q, bool finite_schedule) {
    if (!finite_schedule)
        throw ApplicabilityError("tail check applies only to finite switching schedules");
    return window_floor(ledger, t_q, ledger.times.back());
}

}  // namespace hyperstab
