#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace hyperstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

inline constexpr double kTolHurwitz = 1e-9;
inline constexpr double kTolPr = 1e-9;
inline constexpr double kTolEnv = 1e-6;
inline constexpr double kCancelTol = 1e-7;

// One constant parameterization (A, b, c, d) of the feed-forward loop.
struct StateSpaceMode {
    int mode_id = 0;
    Matrix A;
    Vector b;
    Vector c;
    double d = 0.0;

    StateSpaceMode() = default;
    StateSpaceMode(int id, Matrix A_, Vector b_, Vector c_, double d_);

    int order() const { return static_cast<int>(A.rows()); }
    void validate() const;
};

// Rational G(s) = num(s)/den(s), coefficients in descending degree, den monic.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;

    Complex eval(Complex s) const;
    int degree_num() const { return static_cast<int>(num.size()) - 1; }
    int degree_den() const { return static_cast<int>(den.size()) - 1; }
    int relative_degree() const { return degree_den() - degree_num(); }
    // Limit of G(jw) as w -> infinity: lead ratio for relative degree 0, else 0.
    double limit_at_infinity() const;
};

enum class PRClass { PositiveMin, ZeroMin, NegativeMin };

std::string to_string(PRClass c);

struct PRClassification {
    PRClass cls = PRClass::ZeroMin;
    double min_re = 0.0;             // inf over finite grid and the omega->inf limit
    double argmin_omega = 0.0;       // valid when !argmin_at_infinity
    bool argmin_at_infinity = false;
    double min_re_finite = 0.0;      // min over the finite grid only
    double max_abs_re = 0.0;         // max |Re G(jw)| over grid and limit
    bool is_strictly_positive_real = false;
    bool is_positive_real = false;
    int relative_degree = 0;
    std::string reason;              // set when not positive real
};

// Constants with ||exp(A t)||_2 <= K exp(-rho t) on the validation grid.
struct DecayEnvelope {
    double K = 1.0;
    double rho = 0.0;
};

struct FrequencyGrid {
    double omega_min = 1e-3;
    double omega_max = 1e4;
    int points = 2048;

    std::vector<double> omegas() const;  // logarithmic, with 0 prepended
};

struct ExtremumResult {
    double value = 0.0;
    double argmin_omega = 0.0;
    bool at_infinity = false;
};

std::vector<Complex> eigenvalues(const Matrix& A);
bool is_hurwitz(const Matrix& A);
double spectral_abscissa(const Matrix& A);
Matrix matrix_exponential(const Matrix& A, double t);
double spectral_norm(const Matrix& M);

TransferFunction transfer_function(const StateSpaceMode& mode);
std::vector<Complex> polynomial_roots(const std::vector<double>& coeffs);
TransferFunction minimal_realization(const TransferFunction& g, double cancel_tol = kCancelTol);

Complex freq_response(const TransferFunction& g, double omega);
ExtremumResult min_real_part(const TransferFunction& g, const FrequencyGrid& grid = {});
ExtremumResult max_abs_real_part(const TransferFunction& g, const FrequencyGrid& grid = {});

PRClassification classify_pr(const StateSpaceMode& mode, const FrequencyGrid& grid = {});
DecayEnvelope decay_envelope(const Matrix& A, double eps_margin,
                             double t_max = 50.0, double t_step = 0.01);

}  // namespace hyperstab
