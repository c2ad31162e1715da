#pragma once

#include "hyperstab/scenario.hpp"
#include "hyperstab/simulator.hpp"

#include <random>
#include <vector>

namespace fixtures {

using namespace hyperstab;

inline StateSpaceMode scalar_mode(int id, double a, double b = 1.0, double c = 1.0,
                                  double d = 0.0) {
    Matrix A(1, 1);
    A(0, 0) = a;
    Vector bv(1), cv(1);
    bv(0) = b;
    cv(0) = c;
    return StateSpaceMode(id, A, bv, cv, d);
}

// G(s) = 1/(s^2 + beta s + 1): stable, Re G(jw) < 0 above the resonance.
inline StateSpaceMode negative_min_mode(int id, double beta) {
    Matrix A(2, 2);
    A << 0.0, 1.0, -1.0, -beta;
    Vector b(2), c(2);
    b << 0.0, 1.0;
    c << 1.0, 0.0;
    return StateSpaceMode(id, A, b, c, 0.0);
}

// Strictly positive real family G_j = d_j + sum_i k_i/(s + a_i).  All members
// share the strictly proper part (same diagonal A, b, c), so the passivity
// storage function is mode-independent and the energy floor is tight.
struct SprFamily {
    std::vector<StateSpaceMode> modes;
    std::vector<double> d_values;  // = min Re G_j over frequency
};

inline SprFamily spr_family(std::mt19937& rng, int num_modes, int order) {
    std::uniform_real_distribution<double> a_dist(0.5, 3.0);
    std::uniform_real_distribution<double> k_dist(0.2, 1.5);
    std::uniform_real_distribution<double> d_dist(0.1, 0.8);

    Matrix A = Matrix::Zero(order, order);
    Vector b(order), c(order);
    for (int i = 0; i < order; ++i) {
        A(i, i) = -a_dist(rng);
        b(i) = 1.0;
        c(i) = k_dist(rng);
    }
    SprFamily fam;
    for (int j = 0; j < num_modes; ++j) {
        const double d = d_dist(rng) + 0.1 * j;
        fam.modes.push_back(StateSpaceMode(j, A, b, c, d));
        fam.d_values.push_back(d);
    }
    return fam;
}

// phi identically zero: opens the loop so u equals the probe.
inline FeedbackDevice open_loop_device(int id, double gamma = 10.0) {
    FeedbackDevice dev;
    dev.device_id = id;
    dev.kind = DeviceKind::Tabulated;
    dev.table_t = {0.0, 1.0};
    dev.table_v = {0.0, 0.0};
    dev.gamma = gamma;
    return dev;
}

inline FeedbackDevice sector_device(int id, double k1, double k2, double gamma = 10.0) {
    FeedbackDevice dev;
    dev.device_id = id;
    dev.kind = DeviceKind::Sector;
    dev.k1 = k1;
    dev.k2 = k2;
    dev.gamma = gamma;
    return dev;
}

inline FeedbackDevice gain_device(int id, double k, double gamma = 1.0) {
    FeedbackDevice dev;
    dev.device_id = id;
    dev.kind = DeviceKind::LinearGain;
    dev.k = k;
    dev.gamma = gamma;
    return dev;
}

inline Probe exp_probe(double amplitude = 1.0, double rate = 1.0) {
    Probe p;
    p.kind = Probe::Kind::Exp;
    p.amplitude = amplitude;
    p.rate = rate;
    return p;
}

inline Scenario basic_scenario(std::vector<StateSpaceMode> modes,
                               std::vector<FeedbackDevice> devices,
                               SwitchingSchedule schedule, Vector x0, double horizon,
                               double dt = 0.01) {
    Scenario sc;
    sc.modes = std::move(modes);
    sc.devices = std::move(devices);
    sc.schedule = std::move(schedule);
    sc.x0 = std::move(x0);
    sc.horizon = horizon;
    sc.dt = dt;
    sc.digest = "test";
    return sc;
}

inline SwitchingSchedule single_interval(int mode_id = 0, int device_id = 0) {
    SwitchingSchedule sch;
    sch.sti.push_back({0.0, mode_id});
    sch.sti0.push_back({0.0, device_id});
    return sch;
}

}  // namespace fixtures
