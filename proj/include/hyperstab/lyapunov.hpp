#pragma once

#include "hyperstab/lti.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hyperstab {

inline constexpr double kTolLyap = 1e-9;

// P = P^T > 0 with Q_i = -(A_i^T P + P A_i) > 0 for every covered mode.
struct LyapunovCertificate {
    Matrix P;
    std::map<int, Matrix> per_mode_Q;
    std::map<int, double> min_eig_Q;
};

enum class SumOutcome { Negative, Zero, Indefinite };

std::string to_string(SumOutcome o);

struct ModeDefiniteness {
    int mode_id = 0;
    double lambda_max = 0.0;  // of A^T P + P A
    bool negative_definite = false;
};

struct CommonLyapunovReport {
    std::optional<LyapunovCertificate> certificate;
    bool exists_certificate = false;
    // Necessary-test failures; any entry forces exists_certificate = false.
    std::vector<std::pair<std::string, std::string>> necessary_test_failures;
    std::vector<std::pair<std::string, SumOutcome>> sum_condition_samples;
    std::string note;
};

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);
std::vector<ModeDefiniteness> check_common_P(const Matrix& P,
                                             const std::vector<StateSpaceMode>& modes);
double perturbation_radius(const StateSpaceMode& anchor, const Matrix& P, double eps);
SumOutcome sum_condition(const std::vector<StateSpaceMode>& modes,
                         const std::vector<Matrix>& x_family);
std::optional<int> inverse_set_screen(const std::vector<StateSpaceMode>& modes);
bool combo_necessary_test(const std::vector<StateSpaceMode>& modes,
                          const std::vector<double>& alphas,
                          const std::vector<double>& betas);
// Gate for the combo test: a failure certifies nonexistence only when the
// combination is entrywise positive.
bool combo_entrywise_positive(const std::vector<StateSpaceMode>& modes,
                              const std::vector<double>& alphas,
                              const std::vector<double>& betas);

struct LyapunovInputs {
    std::optional<Matrix> P;                 // user-supplied candidate
    std::vector<std::vector<Matrix>> x_families;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> combos;
};

CommonLyapunovReport lyapunov_battery(const std::vector<StateSpaceMode>& modes,
                                      const LyapunovInputs& inputs);

}  // namespace hyperstab
