#pragma once

#include "hyperstab/lti.hpp"
#include "hyperstab/popov.hpp"
#include "hyperstab/supervisor.hpp"
#include "hyperstab/trace.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hyperstab {

// Exogenous injection w(t) added to the control: u = -phi(y) + w.
struct Probe {
    enum class Kind { None, Exp, Tabulated };
    Kind kind = Kind::None;
    double amplitude = 1.0;
    double rate = 1.0;  // w = amplitude * exp(-rate t)
    std::vector<double> table_t;
    std::vector<double> table_w;

    double value(double t) const;
    bool present() const { return kind != Kind::None; }
};

struct Scenario {
    std::vector<StateSpaceMode> modes;
    std::vector<FeedbackDevice> devices;
    SwitchingSchedule schedule;
    Vector x0;
    Probe probe;
    double horizon = 10.0;
    double dt = 0.01;
    std::string digest;

    const StateSpaceMode& mode(int id) const;
    const FeedbackDevice& device(int id) const;
    double max_gamma() const;
    void validate() const;
};

struct OutputSolveResult {
    double y = 0.0;
    double u = 0.0;
};

OutputSolveResult output_solve(const StateSpaceMode& mode, const Vector& x,
                               const FeedbackDevice& device, double t, double w);

SimulationTrace simulate(const Scenario& scenario,
                         const std::map<int, ModeAnalysis>* analyses = nullptr);

double energy(const SimulationTrace& trace, double t);

struct ParsevalSegment {
    double t_begin = 0.0;
    double t_end = 0.0;
    int mode_id = 0;
    double freq_energy = 0.0;
    double time_energy = 0.0;
    double abs_discrepancy = 0.0;
    double rel_discrepancy = 0.0;
};

struct ParsevalReport {
    std::vector<ParsevalSegment> segments;
    double total_freq = 0.0;
    double total_time = 0.0;  // E(horizon)
    double abs_discrepancy = 0.0;
    double rel_discrepancy = 0.0;
};

ParsevalReport parseval_crosscheck(const SimulationTrace& trace,
                                   const std::vector<StateSpaceMode>& modes,
                                   const SwitchingSchedule& schedule);

struct MarginPoint {
    double t = 0.0;
    double E = 0.0;
    double g_floor = 0.0;
    double margin = 0.0;  // E - g_floor
};

std::vector<MarginPoint> lower_bound_check(const SimulationTrace& trace,
                                           const SwitchingSchedule& schedule);

}  // namespace hyperstab
