#include "hyperstab/lyapunov.hpp"

#include "hyperstab/errors.hpp"

#include <cmath>

namespace hyperstab {

namespace {

double sym_lambda_max(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    return es.eigenvalues().maxCoeff();
}

double sym_lambda_min(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    return es.eigenvalues().minCoeff();
}

void require_symmetric(const Matrix& M, const char* name) {
    if (M.rows() != M.cols()) throw DimensionError(std::string(name) + " must be square");
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + M.cwiseAbs().maxCoeff()))
        throw DefinitenessError(std::string(name) + " must be symmetric");
}

}  // namespace

std::string to_string(SumOutcome o) {
    switch (o) {
        case SumOutcome::Negative: return "Negative";
        case SumOutcome::Zero: return "Zero";
        case SumOutcome::Indefinite: return "Indefinite";
    }
    return "?";
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
    if (A.rows() != A.cols()) throw DimensionError("A must be square");
    require_symmetric(Q, "Q");
    if (Q.rows() != A.rows()) throw DimensionError("Q must match A");
    if (!is_hurwitz(A)) throw StabilityError("A is not Hurwitz");
    if (sym_lambda_min(Q) <= kTolLyap) throw DefinitenessError("Q must be positive definite");

    // Kronecker formulation: (I (x) A^T + A^T (x) I) vec(P) = -vec(Q).
    const int n = static_cast<int>(A.rows());
    const Matrix At = A.transpose();
    Matrix M = Matrix::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i)
        M.block(i * n, i * n, n, n) += At;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                M(i * n + k, j * n + k) += At(i, j);
    Vector rhs(n * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) rhs(i * n + k) = -Q(k, i);
    const Vector vp = M.fullPivLu().solve(rhs);
    Matrix P(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) P(k, i) = vp(i * n + k);
    P = 0.5 * (P + P.transpose());

    const double residual = (A.transpose() * P + P * A + Q).norm();
    if (residual > kTolLyap * Q.norm())
        throw ConsistencyError("Lyapunov residual exceeds tolerance");
    if (sym_lambda_min(P) <= 0.0) throw ConsistencyError("Lyapunov solution not positive definite");
    return P;
}

std::vector<ModeDefiniteness> check_common_P(const Matrix& P,
                                             const std::vector<StateSpaceMode>& modes) {
    require_symmetric(P, "P");
    if (sym_lambda_min(P) <= 0.0) throw DefinitenessError("P must be positive definite");
    std::vector<ModeDefiniteness> out;
    out.reserve(modes.size());
    for (const auto& m : modes) {
        ModeDefiniteness v;
        v.mode_id = m.mode_id;
        v.lambda_max = sym_lambda_max(m.A.transpose() * P + P * m.A);
        v.negative_definite = v.lambda_max < -kTolLyap;
        out.push_back(v);
    }
    return out;
}

double perturbation_radius(const StateSpaceMode& anchor, const Matrix& P, double eps) {
    if (!is_hurwitz(anchor.A)) throw StabilityError("anchor must be Hurwitz");
    const double abscissa_mag = std::abs(spectral_abscissa(anchor.A));
    if (eps <= 0.0 || eps >= abscissa_mag)
        throw ParameterError("eps must lie in (0, |lambda_max(A)|)");
    require_symmetric(P, "P");

    const Matrix Q = -(anchor.A.transpose() * P + P * anchor.A);
    const double lmin_q = sym_lambda_min(Q);
    const double lmax_q = sym_lambda_max(Q);
    if (lmin_q <= 0.0) throw DefinitenessError("P does not solve a definite Lyapunov equation");

    const DecayEnvelope env = decay_envelope(anchor.A, /*eps_margin=*/eps);
    return lmin_q * (abscissa_mag - eps) / (env.K * env.K * lmax_q);
}

SumOutcome sum_condition(const std::vector<StateSpaceMode>& modes,
                         const std::vector<Matrix>& x_family) {
    if (x_family.size() != modes.size())
        throw DimensionError("X family must pair with the mode list");
    double total_norm = 0.0;
    for (const auto& X : x_family) {
        require_symmetric(X, "X");
        if (sym_lambda_min(X) < -1e-9 * (1.0 + X.cwiseAbs().maxCoeff()))
            throw DefinitenessError("every X_i must be positive semidefinite");
        total_norm += X.norm();
    }
    if (total_norm == 0.0) throw DefinitenessError("at least one X_i must be nonzero");

    Matrix S = Matrix::Zero(modes.front().order(), modes.front().order());
    for (size_t i = 0; i < modes.size(); ++i)
        S += modes[i].A * x_family[i] + x_family[i] * modes[i].A.transpose();

    const double scale = 1.0 + total_norm;
    if (S.norm() <= 1e-9 * scale) return SumOutcome::Zero;
    if (sym_lambda_max(S) < -1e-9 * scale) return SumOutcome::Negative;
    return SumOutcome::Indefinite;
}

std::optional<int> inverse_set_screen(const std::vector<StateSpaceMode>& modes) {
    for (const auto& m : modes) {
        if (!is_hurwitz(m.A)) return m.mode_id;
        Eigen::FullPivLU<Matrix> lu(m.A);
        if (!lu.isInvertible()) throw InversionError("singular mode matrix");
        if (!is_hurwitz(lu.inverse())) return m.mode_id;
    }
    return std::nullopt;
}

namespace {

Matrix combo_matrix(const std::vector<StateSpaceMode>& modes,
                    const std::vector<double>& alphas, const std::vector<double>& betas) {
    if (alphas.size() != modes.size() || betas.size() != modes.size())
        throw DimensionError("alpha/beta lists must pair with the mode list");
    double total = 0.0;
    Matrix S = Matrix::Zero(modes.front().order(), modes.front().order());
    for (size_t i = 0; i < modes.size(); ++i) {
        if (alphas[i] < 0.0 || betas[i] < 0.0)
            throw ParameterError("alpha and beta coefficients must be nonnegative");
        total += alphas[i] + betas[i];
        S += alphas[i] * modes[i].A;
        if (betas[i] > 0.0) {
            Eigen::FullPivLU<Matrix> lu(modes[i].A);
            if (!lu.isInvertible()) throw InversionError("singular mode matrix with beta > 0");
            S += betas[i] * lu.inverse();
        }
    }
    if (total == 0.0) throw ParameterError("combination must be nonzero");
    return S;
}

}  // namespace

bool combo_necessary_test(const std::vector<StateSpaceMode>& modes,
                          const std::vector<double>& alphas,
                          const std::vector<double>& betas) {
    return is_hurwitz(combo_matrix(modes, alphas, betas));
}

bool combo_entrywise_positive(const std::vector<StateSpaceMode>& modes,
                              const std::vector<double>& alphas,
                              const std::vector<double>& betas) {
    return (combo_matrix(modes, alphas, betas).array() > 0.0).all();
}

CommonLyapunovReport lyapunov_battery(const std::vector<StateSpaceMode>& modes,
                                      const LyapunovInputs& inputs) {
    CommonLyapunovReport report;
    if (modes.empty()) return report;

    const auto screen = inverse_set_screen(modes);
    if (screen)
        report.necessary_test_failures.emplace_back(
            "inverse_set_screen", "non-Hurwitz member, mode " + std::to_string(*screen));

    for (size_t k = 0; k < inputs.combos.size(); ++k) {
        const auto& [alphas, betas] = inputs.combos[k];
        if (!combo_necessary_test(modes, alphas, betas) &&
            combo_entrywise_positive(modes, alphas, betas))
            report.necessary_test_failures.emplace_back(
                "combo_necessary_test", "combination " + std::to_string(k) + " not Hurwitz");
    }

    for (size_t k = 0; k < inputs.x_families.size(); ++k) {
        const SumOutcome outcome = sum_condition(modes, inputs.x_families[k]);
        report.sum_condition_samples.emplace_back("family " + std::to_string(k), outcome);
        if (outcome == SumOutcome::Zero)
            report.necessary_test_failures.emplace_back(
                "sum_condition", "zero-sum witness, family " + std::to_string(k));
    }

    if (!report.necessary_test_failures.empty()) {
        report.exists_certificate = false;
        report.note = "nonexistence witness found";
        return report;
    }

    // Existence only by an explicit validated P: the user candidate first, then
    // each per-mode solve with Q = I as a candidate.
    std::vector<Matrix> candidates;
    if (inputs.P) candidates.push_back(*inputs.P);
    for (const auto& m : modes) {
        if (!is_hurwitz(m.A)) continue;
        candidates.push_back(solve_lyapunov(m.A, Matrix::Identity(m.order(), m.order())));
    }
    for (const auto& P : candidates) {
        const auto verdicts = check_common_P(P, modes);
        bool all_ok = true;
        for (const auto& v : verdicts) all_ok = all_ok && v.negative_definite;
        if (!all_ok) continue;
        LyapunovCertificate cert;
        cert.P = P;
        for (const auto& m : modes) {
            const Matrix Q = -(m.A.transpose() * P + P * m.A);
            cert.per_mode_Q[m.mode_id] = Q;
            cert.min_eig_Q[m.mode_id] = sym_lambda_min(Q);
        }
        report.certificate = std::move(cert);
        report.exists_certificate = true;
        return report;
    }
    report.note = "undetermined: no candidate P validated and no witness found";
    return report;
}

}  // namespace hyperstab
