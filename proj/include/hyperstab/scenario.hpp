#pragma once

#include "hyperstab/lyapunov.hpp"
#include "hyperstab/simulator.hpp"
#include "hyperstab/supervisor.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace hyperstab {

struct AnalysisConfig {
    FrequencyGrid grid;
    double eps_margin = 0.1;
    double delta = 0.5;
    double lambda0 = 0.1;
    std::optional<double> K_sat;
    std::optional<double> lambda_sat;
    std::optional<double> u_sq_cap;
    LyapunovInputs lyapunov;
};

struct LoadedScenario {
    Scenario scenario;
    AnalysisConfig analysis;
    nlohmann::json raw;
};

// Strict parse: unknown keys rejected, all schedule invariants enforced.
LoadedScenario load_scenario(const std::string& path);
LoadedScenario parse_scenario(const nlohmann::json& doc);

std::string scenario_digest(const nlohmann::json& doc);

std::map<int, ModeAnalysis> analyze_all_modes(const LoadedScenario& loaded);

nlohmann::json build_analysis_report(const LoadedScenario& loaded,
                                     const std::map<int, ModeAnalysis>& analyses,
                                     const CommonLyapunovReport& lyap,
                                     const AnalysisVerdict& verdict);

void write_trace_csv(const SimulationTrace& trace, const std::string& path);
SimulationTrace read_trace_csv(const std::string& path);

}  // namespace hyperstab
