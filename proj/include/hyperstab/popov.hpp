#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hyperstab {

enum class DeviceKind {
    LinearGain,       // phi = k y
    Sector,           // phi/y in [k1, k2]
    Saturation,       // phi = clamp(k y, -L, L)
    Relay,            // phi = sign(y) outside the threshold band
    TimeVaryingGain,  // phi = k(t) y, k piecewise constant >= 0
    Tabulated         // phi = table(t), independent of y
};

std::string to_string(DeviceKind k);

// One nonlinearity phi_{j0}(y, t) of the feedback family, with its Popov constant.
struct FeedbackDevice {
    int device_id = 0;
    DeviceKind kind = DeviceKind::LinearGain;
    double k = 1.0;         // LinearGain, Saturation slope
    double k1 = 0.0;        // Sector lower bound
    double k2 = 1.0;        // Sector upper bound
    double limit = 1.0;     // Saturation limit
    double threshold = 0.0; // Relay dead band
    std::vector<double> table_t;  // TimeVaryingGain / Tabulated breakpoints
    std::vector<double> table_v;
    double gamma = 1.0;

    double phi(double y, double t) const;
    // Built-in passive kinds satisfy phi(y,t) y >= 0 pointwise.
    bool passive_by_construction() const;
    // Monotone nondecreasing in y, required to close an algebraic loop with d != 0.
    bool monotone_in_y() const;
    void validate() const;
};

struct FloorCheckOutcome {
    bool pass = true;
    std::optional<double> first_violation_time;
    double min_margin = 0.0;  // min over the window of cum - (-gamma)
};

// Running record of the Popov integral int_0^t phi(y) y dtau.
struct PopovLedger {
    double gamma = 1.0;
    std::vector<double> times;      // sample instants, starting at 0
    std::vector<double> cumulative; // integral values at those instants
    double last_integrand = 0.0;
    std::optional<double> violated_at;

    explicit PopovLedger(double gamma_ = 1.0);
    double tol() const { return 1e-6 * (1.0 + gamma); }
    double integral() const { return cumulative.back(); }
    void update(double y, double phi_val, double dt);
};

FloorCheckOutcome interval_floor_check(const PopovLedger& ledger, double t_i, double t_next);
FloorCheckOutcome tail_floor_check(const PopovLedger& ledger, double t_q, bool finite_schedule);

}  // namespace hyperstab
