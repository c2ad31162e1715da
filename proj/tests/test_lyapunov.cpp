#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "hyperstab/errors.hpp"
#include "hyperstab/lyapunov.hpp"

#include <cmath>
#include <random>

using namespace hyperstab;

namespace {

// Hurwitz by construction: symmetric negative definite part plus a skew term
// keeps the field of values in the open left half-plane.
Matrix random_hurwitz(std::mt19937& rng, int n, double margin = 0.5) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix B(n, n), S(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            B(i, j) = dist(rng);
            S(i, j) = dist(rng);
        }
    return -(B * B.transpose()) - margin * Matrix::Identity(n, n) +
           0.5 * (S - S.transpose());
}

Matrix random_spd(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix C(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = dist(rng);
    return C * C.transpose() + 0.1 * Matrix::Identity(n, n);
}

double sym_lambda_max(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("lyapunov solve: scalar and analytic cases") {
    const Matrix A = -Matrix::Identity(2, 2);
    const Matrix P = solve_lyapunov(A, Matrix::Identity(2, 2));
    // A = -I: A^T P + P A = -2P = -I, so P = I/2.
    CHECK((P - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-12);

    CHECK_THROWS_AS(solve_lyapunov(Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
                    StabilityError);
    CHECK_THROWS_AS(solve_lyapunov(A, -Matrix::Identity(2, 2)), DefinitenessError);
}

TEST_CASE("lyapunov solve agrees with the integral representation") {
    Matrix A(2, 2);
    A << 0.0, 1.0, -1.0, -1.0;
    const Matrix Q = Matrix::Identity(2, 2);
    const Matrix P = solve_lyapunov(A, Q);

    // P = int_0^inf e^{A^T t} Q e^{A t} dt, Simpson quadrature to T = 50.
    const double h = 0.005, T = 50.0;
    const int n_steps = static_cast<int>(T / h);
    Matrix acc = Matrix::Zero(2, 2);
    Matrix Eh = matrix_exponential(A, h);
    Matrix Ecur = Matrix::Identity(2, 2);
    Matrix prev_term = Ecur.transpose() * Q * Ecur;
    for (int k = 0; k < n_steps; ++k) {
        const Matrix Emid = Ecur * matrix_exponential(A, 0.5 * h);
        Ecur = Ecur * Eh;
        const Matrix mid_term = Emid.transpose() * Q * Emid;
        const Matrix cur_term = Ecur.transpose() * Q * Ecur;
        acc += (h / 6.0) * (prev_term + 4.0 * mid_term + cur_term);
        prev_term = cur_term;
    }
    CHECK((P - acc).norm() < 1e-5);
}

TEST_CASE("lyapunov residuals on random hurwitz matrices") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 4;  // up to 5
        const Matrix A = random_hurwitz(rng, n);
        const Matrix Q = random_spd(rng, n);
        const Matrix P = solve_lyapunov(A, Q);
        const double rel = (A.transpose() * P + P * A + Q).norm() / Q.norm();
        CHECK(rel < 1e-8);
        Eigen::SelfAdjointEigenSolver<Matrix> es(P);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("common-P check over a mode set") {
    std::vector<StateSpaceMode> modes;
    modes.push_back(fixtures::scalar_mode(0, -1.0));
    Matrix A2(1, 1);
    A2(0, 0) = -2.0;
    modes.push_back(StateSpaceMode(1, A2, Vector::Ones(1), Vector::Ones(1), 0.0));

    const auto verdicts = check_common_P(Matrix::Identity(1, 1), modes);
    REQUIRE(verdicts.size() == 2);
    CHECK(verdicts[0].negative_definite);
    CHECK(verdicts[0].lambda_max == doctest::Approx(-2.0));
    CHECK(verdicts[1].lambda_max == doctest::Approx(-4.0));
}

TEST_CASE("perturbation radius is sound") {
    std::mt19937 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3;
        Matrix A = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) A(i, i) = -1.0 - 0.7 * i - 0.3 * gauss(rng);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) A(i, j) = 0.1 * gauss(rng);
        if (!is_hurwitz(A)) continue;
        const StateSpaceMode anchor(0, A, Vector::Ones(n), Vector::Ones(n), 0.0);
        const Matrix P = solve_lyapunov(A, Matrix::Identity(n, n));
        const double eps = 0.2 * std::abs(spectral_abscissa(A));
        const double r = perturbation_radius(anchor, P, eps);
        CHECK(r > 0.0);

        for (int s = 0; s < 100; ++s) {
            Matrix D(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) D(i, j) = gauss(rng);
            D *= 0.98 * r / spectral_norm(D);
            const Matrix Ap = A + D;
            CHECK(sym_lambda_max(Ap.transpose() * P + P * Ap) < 0.0);
        }
    }
}

TEST_CASE("perturbation radius rejects bad arguments") {
    const StateSpaceMode anchor = fixtures::scalar_mode(0, -1.0);
    const Matrix P = 0.5 * Matrix::Identity(1, 1);
    // Scalar a = -1, P = 1/2: Q = 1, K = 1, radius = (1 - eps).
    CHECK(perturbation_radius(anchor, P, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_THROWS_AS(perturbation_radius(anchor, P, 1.5), ParameterError);
    CHECK_THROWS_AS(perturbation_radius(fixtures::scalar_mode(0, 1.0), P, 0.5),
                    StabilityError);
}

TEST_CASE("sum condition outcomes") {
    std::vector<StateSpaceMode> modes;
    Matrix rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;
    modes.push_back(StateSpaceMode(0, rot, Vector::Ones(2), Vector::Ones(2), 0.0));
    // Skew-symmetric A with X = I: AX + XA^T = A + A^T = 0.
    std::vector<Matrix> family{Matrix::Identity(2, 2)};
    CHECK(sum_condition(modes, family) == SumOutcome::Zero);

    std::vector<StateSpaceMode> stable{fixtures::scalar_mode(0, -1.0)};
    std::vector<Matrix> fam1{Matrix::Identity(1, 1)};
    CHECK(sum_condition(stable, fam1) == SumOutcome::Negative);

    std::vector<StateSpaceMode> unstable{fixtures::scalar_mode(0, 1.0)};
    CHECK(sum_condition(unstable, fam1) == SumOutcome::Indefinite);

    CHECK_THROWS_AS(sum_condition(stable, std::vector<Matrix>{}), DimensionError);
    std::vector<Matrix> zero_fam{Matrix::Zero(1, 1)};
    CHECK_THROWS_AS(sum_condition(stable, zero_fam), DefinitenessError);
}

TEST_CASE("inverse-set screen flags non-hurwitz members") {
    std::vector<StateSpaceMode> modes;
    modes.push_back(fixtures::scalar_mode(0, -1.0));
    modes.push_back(fixtures::scalar_mode(1, 2.0));
    const auto hit = inverse_set_screen(modes);
    REQUIRE(hit.has_value());
    CHECK(*hit == 1);

    std::vector<StateSpaceMode> ok;
    ok.push_back(fixtures::scalar_mode(0, -1.0));
    ok.push_back(fixtures::scalar_mode(1, -3.0));
    CHECK(!inverse_set_screen(ok).has_value());
}

TEST_CASE("combo necessary test with entrywise-positivity gate") {
    // Scalar modes a = -1 and a = -2: alpha_1 A_1 + beta_2 A_2^{-1} etc.
    std::vector<StateSpaceMode> modes;
    modes.push_back(fixtures::scalar_mode(0, -1.0));
    modes.push_back(fixtures::scalar_mode(1, -2.0));
    CHECK(combo_necessary_test(modes, {1.0, 1.0}, {0.0, 0.0}));  // -3 < 0
    CHECK(!combo_entrywise_positive(modes, {1.0, 1.0}, {0.0, 0.0}));
    CHECK_THROWS_AS(combo_necessary_test(modes, {-1.0, 0.0}, {0.0, 0.0}), ParameterError);
}

TEST_CASE("battery: certificate for a compatible pair") {
    std::vector<StateSpaceMode> modes;
    modes.push_back(fixtures::scalar_mode(0, -1.0));
    modes.push_back(fixtures::scalar_mode(1, -2.5));
    const auto report = lyapunov_battery(modes, {});
    CHECK(report.exists_certificate);
    REQUIRE(report.certificate.has_value());
    CHECK(report.certificate->min_eig_Q.at(0) > 0.0);
    CHECK(report.certificate->min_eig_Q.at(1) > 0.0);
}

TEST_CASE("battery: witness forces nonexistence") {
    std::vector<StateSpaceMode> modes;
    Matrix rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;
    modes.push_back(StateSpaceMode(0, rot, Vector::Ones(2), Vector::Ones(2), 0.0));
    modes.push_back(
        StateSpaceMode(1, -Matrix::Identity(2, 2), Vector::Ones(2), Vector::Ones(2), 0.0));

    LyapunovInputs inputs;
    inputs.x_families.push_back({Matrix::Identity(2, 2), Matrix::Zero(2, 2)});
    const auto report = lyapunov_battery(modes, inputs);
    CHECK(!report.exists_certificate);
    CHECK(!report.necessary_test_failures.empty());
}
