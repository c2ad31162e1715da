#pragma once

#include "hyperstab/lti.hpp"
#include "hyperstab/popov.hpp"
#include "hyperstab/trace.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hyperstab {

inline constexpr double kTolContr = 1e-3;
inline constexpr int kMaxMarkedGap = 64;

struct SwitchEntry {
    double t = 0.0;
    int id = 0;  // mode id in sti, device id in sti0
};

// Switching law: feed-forward instants (sti), feedback instants (sti0 subset of
// sti), marked subset, and the minimum dwell.
struct SwitchingSchedule {
    std::vector<SwitchEntry> sti;
    std::vector<SwitchEntry> sti0;
    std::vector<double> marked;
    double min_dwell = 0.0;

    void validate(int num_modes) const;
    int mode_at(double t) const;
    int device_at(double t) const;
    // End of the interval starting at sti[i]: next instant, or +inf for the last.
    double interval_end(size_t i, double horizon) const;
};

enum class InstantClass { P, N, Z };

std::string to_string(InstantClass c);

struct InstantClassification {
    std::vector<InstantClass> classes;  // aligned with schedule.sti
    bool any_negative() const;
};

// Per-mode analysis consumed by the supervisor's floor and bound machinery.
struct ModeAnalysis {
    int mode_id = 0;
    PRClassification pr;
    DecayEnvelope envelope;
    double floor_min_re = 0.0;  // value credited to STI_p intervals
    bool spr_relative_degree_one = false;  // placed in STI_p with its finite-grid minimum
    bool has_pole_at_origin = false;
    InstantClass instant_class = InstantClass::Z;
};

ModeAnalysis analyze_mode(const StateSpaceMode& mode, double eps_margin,
                          const FrequencyGrid& grid = {});

InstantClassification classify_schedule(const SwitchingSchedule& schedule,
                                        const std::map<int, ModeAnalysis>& analyses);

double energy_floor_step(double floor, InstantClass cls, const ModeAnalysis& mode,
                         const std::vector<double>& u_window, double dt);

double max_residence_bound(double g, double max_abs_re, double max_u_sq);

struct EnvelopeTerm {
    double K = 1.0;
    double rho = 0.0;
    double T = 0.0;  // residence time (unused for the marked mode itself)
};

double min_residence_bound(const std::vector<EnvelopeTerm>& intermediates,
                           double K_marked, double rho_marked, double delta);

struct ContractionPair {
    double t_from = 0.0;
    double t_to = 0.0;
    double ratio = 0.0;
    bool skipped = false;  // departing state below the norm floor
};

struct ContractionOutcome {
    bool pass = true;
    std::vector<ContractionPair> pairs;
};

ContractionOutcome contraction_check(const SimulationTrace& trace,
                                     const std::vector<double>& marked, double delta,
                                     double tol = kTolContr);

struct SaturationOutcome {
    bool pass = true;
    bool vacuous = false;
    bool lambda_constraint_ok = true;
    double lambda_required = 0.0;
    double energy_ceiling = 0.0;  // gamma + K^2/(1 - e^{-2 lambda0 t*})
    std::optional<double> first_violation_time;
};

SaturationOutcome saturation_vanishing_check(const SimulationTrace& trace,
                                             const SwitchingSchedule& schedule,
                                             const std::map<int, ModeAnalysis>& analyses,
                                             double K, double lambda, double lambda0,
                                             double gamma);

enum class Verdict {
    UnconditionallyAsymptoticallyHyperstable,
    NotUnconditional,
    ConditionallyAsymptoticallyHyperstable,
    Undetermined
};

std::string to_string(Verdict v);

struct ConditionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ResidenceBoundRow {
    double t = 0.0;       // interval start
    double dwell = 0.0;
    double bound = 0.0;   // max residence per Eq-class; +inf when unconstrained
    bool is_minimum = false;  // marked-instant minimum bound rather than a maximum
    bool ok = true;
    double g_at_entry = 0.0;
    double max_abs_re = 0.0;
    double max_u_sq = 0.0;
};

struct AnalysisVerdict {
    Verdict verdict = Verdict::Undetermined;
    std::vector<ConditionResult> conditions;
    std::string failed_condition;
    std::vector<ResidenceBoundRow> bounds;
};

struct VerdictContext {
    std::optional<double> u_sq_cap;  // declared cap on u^2 for offline residence bounds
    double delta = 0.5;
    bool certificate_exists = false;
    bool nonexistence_witness = false;
    std::string witness_detail;
};

// Offline residence-bound table: depletion-limited maxima for STI_n intervals
// (floor recursion with u^2 held at the cap) and contraction-driven minima at
// marked instants.
std::vector<ResidenceBoundRow> residence_bound_table(const SwitchingSchedule& schedule,
                                                     const std::map<int, ModeAnalysis>& analyses,
                                                     double u_sq_cap, double delta,
                                                     double horizon);

AnalysisVerdict hyperstability_verdict(const std::vector<StateSpaceMode>& modes,
                                 const SwitchingSchedule& schedule,
                                 const std::vector<FeedbackDevice>& devices,
                                 const std::map<int, ModeAnalysis>& analyses,
                                 const VerdictContext& ctx, double horizon);

}  // namespace hyperstab
