#pragma once

#include "hyperstab/lti.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hyperstab {

struct TraceStep {
    double t = 0.0;
    int mode_id = 0;
    int device_id = 0;
    Vector x;
    double u = 0.0;
    double y = 0.0;
    double E = 0.0;        // int_0^t y u
    double g_floor = 0.0;  // switching-dependent energy floor
    double popov = 0.0;    // int_0^t phi(y) y
};

struct SimulationTrace {
    std::vector<TraceStep> steps;
    std::string scenario_digest;
    double dt = 0.0;
    std::string solver = "rk4";
    double gamma = 1.0;
    bool diverged = false;
    std::optional<double> divergence_time;

    double horizon() const { return steps.empty() ? 0.0 : steps.back().t; }
    // Grid index of time t; throws if t is not a grid point.
    size_t index_at(double t) const;
};

}  // namespace hyperstab
