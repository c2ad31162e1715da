#include "hyperstab/lti.hpp"

#include "hyperstab/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace hyperstab {

namespace {

Complex horner(const std::vector<double>& coeffs, Complex s) {
    Complex acc(0.0, 0.0);
    for (double c : coeffs) acc = acc * s + c;
    return acc;
}

// Magnitude scale of the polynomial at |s|, used to detect near-zero evaluations.
double poly_scale(const std::vector<double>& coeffs, double mag) {
    double acc = 0.0;
    for (double c : coeffs) acc = acc * mag + std::abs(c);
    return acc;
}

void trim_leading(std::vector<double>& p) {
    double max_abs = 0.0;
    for (double c : p) max_abs = std::max(max_abs, std::abs(c));
    const double thresh = 1e-12 * std::max(1.0, max_abs);
    size_t k = 0;
    while (k + 1 < p.size() && std::abs(p[k]) < thresh) ++k;
    p.erase(p.begin(), p.begin() + static_cast<long>(k));
    if (p.size() == 1 && std::abs(p[0]) < thresh) p[0] = 0.0;
}

// Golden-section minimization of f over [lo, hi].
template <typename F>
double golden_minimize(F f, double lo, double hi, double rel_tol, double& arg) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > rel_tol * (std::abs(a) + std::abs(b) + 1e-300)) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    arg = 0.5 * (a + b);
    return f(arg);
}

struct SweepResult {
    double min_re = 0.0;
    double argmin = 0.0;
    double max_abs_re = 0.0;
    double arg_max_abs = 0.0;
};

// Sweep Re G(jw) over the grid, skipping frequencies near listed axis poles,
// with golden-section refinement around the grid extrema.
SweepResult sweep_real_part(const TransferFunction& g, const FrequencyGrid& grid,
                            const std::vector<double>& skip_omegas) {
    const auto ws = grid.omegas();
    auto near_pole = [&](double w) {
        for (double p : skip_omegas)
            if (std::abs(w - p) <= 1e-6 * (1.0 + p)) return true;
        return false;
    };
    auto re_at = [&](double w) { return freq_response(g, w).real(); };

    std::vector<double> kept;
    kept.reserve(ws.size());
    for (double w : ws)
        if (!near_pole(w)) kept.push_back(w);
    if (kept.empty()) throw PoleProximityError("every grid frequency is near a pole", 0.0);

    size_t imin = 0, imax = 0;
    double vmin = re_at(kept[0]);
    double vmax = std::abs(vmin);
    double best_min = vmin, best_max = vmax;
    for (size_t i = 1; i < kept.size(); ++i) {
        const double v = re_at(kept[i]);
        if (v < best_min) {
            best_min = v;
            imin = i;
        }
        if (std::abs(v) > best_max) {
            best_max = std::abs(v);
            imax = i;
        }
    }

    auto refine = [&](size_t idx, auto f, double& arg) {
        const double lo = idx > 0 ? kept[idx - 1] : kept[idx];
        const double hi = idx + 1 < kept.size() ? kept[idx + 1] : kept[idx];
        if (hi <= lo) {
            arg = kept[idx];
            return f(kept[idx]);
        }
        return golden_minimize(f, lo, hi, 1e-9, arg);
    };

    SweepResult out;
    out.min_re = refine(imin, re_at, out.argmin);
    out.max_abs_re = -refine(
        imax, [&](double w) { return -std::abs(re_at(w)); }, out.arg_max_abs);
    return out;
}

}  // namespace

StateSpaceMode::StateSpaceMode(int id, Matrix A_, Vector b_, Vector c_, double d_)
    : mode_id(id), A(std::move(A_)), b(std::move(b_)), c(std::move(c_)), d(d_) {
    validate();
}

void StateSpaceMode::validate() const {
    if (A.rows() != A.cols()) throw DimensionError("A must be square");
    if (b.size() != A.rows() || c.size() != A.rows())
        throw DimensionError("b and c must match the order of A");
    if (!A.allFinite() || !b.allFinite() || !c.allFinite() || !std::isfinite(d))
        throw ValidationError("mode entries must be finite");
}

Complex TransferFunction::eval(Complex s) const {
    return horner(num, s) / horner(den, s);
}

double TransferFunction::limit_at_infinity() const {
    if (relative_degree() == 0) return num.front() / den.front();
    return 0.0;
}

std::vector<double> FrequencyGrid::omegas() const {
    if (points < 2 || omega_min <= 0.0 || omega_max <= omega_min)
        throw ParameterError("invalid frequency grid");
    std::vector<double> ws;
    ws.reserve(static_cast<size_t>(points) + 1);
    ws.push_back(0.0);
    const double l0 = std::log10(omega_min), l1 = std::log10(omega_max);
    for (int i = 0; i < points; ++i)
        ws.push_back(std::pow(10.0, l0 + (l1 - l0) * i / (points - 1)));
    return ws;
}

std::vector<Complex> eigenvalues(const Matrix& A) {
    if (A.rows() != A.cols()) throw DimensionError("eigenvalues: matrix must be square");
    if (A.size() == 0) return {};
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    std::vector<Complex> evs(es.eigenvalues().data(),
                             es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(evs.begin(), evs.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return evs;
}

double spectral_abscissa(const Matrix& A) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues(A)) m = std::max(m, ev.real());
    return m;
}

bool is_hurwitz(const Matrix& A) {
    return spectral_abscissa(A) < -kTolHurwitz;
}

Matrix matrix_exponential(const Matrix& A, double t) {
    if (A.rows() != A.cols()) throw DimensionError("matrix_exponential: matrix must be square");
    if (t < 0.0) throw ParameterError("matrix_exponential: t must be nonnegative");
    return (A * t).exp();
}

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

TransferFunction transfer_function(const StateSpaceMode& mode) {
    mode.validate();
    const int n = mode.order();
    const Matrix& A = mode.A;

    // Leverrier-Faddeev: den coefficients and c^T adj(sI-A) b in one recursion.
    std::vector<double> den(static_cast<size_t>(n) + 1);
    std::vector<double> num_sp(static_cast<size_t>(n) + 1, 0.0);  // strictly proper part
    den[0] = 1.0;
    Matrix B = Matrix::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        num_sp[static_cast<size_t>(k)] = mode.c.dot(B * mode.b);
        const Matrix AB = A * B;
        den[static_cast<size_t>(k)] = -AB.trace() / k;
        B = AB + den[static_cast<size_t>(k)] * Matrix::Identity(n, n);
    }

    TransferFunction g;
    g.den = den;
    g.num.resize(den.size());
    for (size_t k = 0; k < den.size(); ++k) g.num[k] = mode.d * den[k] + num_sp[k];
    trim_leading(g.num);

    // Pointwise cross-check against direct complex solves off the spectrum.
    const Complex samples[] = {{0.73, 0.31}, {-0.41, 1.13}, {1.37, -0.83},
                               {2.11, 0.57}, {-1.71, -1.29}};
    int checked = 0;
    for (const Complex& s : samples) {
        Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
        if (lu.rcond() < 1e-10) continue;
        const Complex direct =
            mode.c.cast<Complex>().dot(lu.solve(mode.b.cast<Complex>())) + mode.d;
        const Complex via_poly = g.eval(s);
        if (std::abs(via_poly - direct) > 1e-8 * (1.0 + std::abs(direct)))
            throw ConsistencyError("transfer function disagrees with resolvent solve");
        ++checked;
    }
    if (checked == 0) throw ConsistencyError("no well-conditioned cross-check samples");
    return g;
}

std::vector<Complex> polynomial_roots(const std::vector<double>& coeffs) {
    std::vector<double> p = coeffs;
    trim_leading(p);
    const int deg = static_cast<int>(p.size()) - 1;
    if (deg <= 0 || (p.size() == 1 && p[0] == 0.0)) return {};
    Matrix C = Matrix::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) C(0, i) = -p[static_cast<size_t>(i) + 1] / p[0];
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    return eigenvalues(C);
}

TransferFunction minimal_realization(const TransferFunction& g, double cancel_tol) {
    auto zeros = polynomial_roots(g.num);
    auto poles = polynomial_roots(g.den);
    const double gain_num = g.num.front();
    const double gain_den = g.den.front();

    std::vector<bool> zero_used(zeros.size(), false);
    std::vector<Complex> kept_poles;
    for (const auto& p : poles) {
        bool cancelled = false;
        for (size_t z = 0; z < zeros.size(); ++z) {
            if (!zero_used[z] && std::abs(zeros[z] - p) < cancel_tol) {
                zero_used[z] = true;
                cancelled = true;
                break;
            }
        }
        if (!cancelled) kept_poles.push_back(p);
    }
    std::vector<Complex> kept_zeros;
    for (size_t z = 0; z < zeros.size(); ++z)
        if (!zero_used[z]) kept_zeros.push_back(zeros[z]);

    auto build = [](const std::vector<Complex>& roots, double gain) {
        std::vector<Complex> c{1.0};
        for (const auto& r : roots) {
            std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
            for (size_t i = 0; i < c.size(); ++i) {
                next[i] += c[i];
                next[i + 1] -= c[i] * r;
            }
            c = next;
        }
        std::vector<double> out(c.size());
        for (size_t i = 0; i < c.size(); ++i) out[i] = gain * c[i].real();
        return out;
    };

    TransferFunction out;
    out.num = build(kept_zeros, gain_num / gain_den);
    out.den = build(kept_poles, 1.0);
    if (out.num.empty()) out.num = {0.0};
    return out;
}

Complex freq_response(const TransferFunction& g, double omega) {
    const Complex s(0.0, omega);
    const Complex den_val = horner(g.den, s);
    const double scale = poly_scale(g.den, std::abs(omega));
    if (std::abs(den_val) < 1e-12 * std::max(scale, 1e-300))
        throw PoleProximityError("frequency response evaluated at a pole", omega);
    return horner(g.num, s) / den_val;
}

ExtremumResult min_real_part(const TransferFunction& g, const FrequencyGrid& grid) {
    const SweepResult sweep = sweep_real_part(g, grid, {});
    const double limit = g.limit_at_infinity();
    ExtremumResult out;
    if (limit < sweep.min_re) {
        out.value = limit;
        out.at_infinity = true;
    } else {
        out.value = sweep.min_re;
        out.argmin_omega = sweep.argmin;
    }
    return out;
}

ExtremumResult max_abs_real_part(const TransferFunction& g, const FrequencyGrid& grid) {
    const SweepResult sweep = sweep_real_part(g, grid, {});
    const double limit = std::abs(g.limit_at_infinity());
    ExtremumResult out;
    if (limit > sweep.max_abs_re) {
        out.value = limit;
        out.at_infinity = true;
    } else {
        out.value = sweep.max_abs_re;
        out.argmin_omega = sweep.arg_max_abs;
    }
    return out;
}

std::string to_string(PRClass c) {
    switch (c) {
        case PRClass::PositiveMin: return "PositiveMin";
        case PRClass::ZeroMin: return "ZeroMin";
        case PRClass::NegativeMin: return "NegativeMin";
    }
    return "?";
}

PRClassification classify_pr(const StateSpaceMode& mode, const FrequencyGrid& grid) {
    const TransferFunction g = minimal_realization(transfer_function(mode));
    const auto poles = polynomial_roots(g.den);

    PRClassification out;
    out.relative_degree = g.relative_degree();

    bool hurwitz = true;
    bool unstable = false;
    std::vector<double> critical_omegas;
    bool critical_ok = true;
    for (size_t i = 0; i < poles.size(); ++i) {
        const Complex p = poles[i];
        if (p.real() < -kTolHurwitz) continue;
        hurwitz = false;
        if (p.real() > kTolHurwitz) {
            unstable = true;
            continue;
        }
        // Critical pole: must be simple with nonnegative real residue.
        critical_omegas.push_back(std::abs(p.imag()));
        int mult = 0;
        for (const auto& q : poles)
            if (std::abs(q - p) < kCancelTol) ++mult;
        if (mult > 1) {
            critical_ok = false;
            continue;
        }
        Complex dden(0.0, 0.0);  // den'(p)
        const int deg = g.degree_den();
        for (int k = 0; k < deg; ++k)
            dden = dden * p + static_cast<double>(deg - k) * g.den[static_cast<size_t>(k)];
        const Complex residue = horner(g.num, p) / dden;
        if (residue.real() < -kTolPr || std::abs(residue.imag()) > 1e-6 * (1.0 + std::abs(residue)))
            critical_ok = false;
    }

    const SweepResult sweep = sweep_real_part(g, grid, critical_omegas);
    const double limit = g.limit_at_infinity();
    out.min_re_finite = sweep.min_re;
    if (limit < sweep.min_re) {
        out.min_re = limit;
        out.argmin_omega = 0.0;
        out.argmin_at_infinity = true;
    } else {
        out.min_re = sweep.min_re;
        out.argmin_omega = sweep.argmin;
    }
    out.max_abs_re = std::max(sweep.max_abs_re, std::abs(limit));

    if (out.min_re > kTolPr)
        out.cls = PRClass::PositiveMin;
    else if (out.min_re < -kTolPr)
        out.cls = PRClass::NegativeMin;
    else
        out.cls = PRClass::ZeroMin;

    if (out.relative_degree > 1) {
        out.reason = "relative degree exceeds one";
    } else if (unstable) {
        out.reason = "unstable pole";
    } else if (!critical_ok) {
        out.reason = "repeated or negative-residue critical pole";
    } else {
        // Strict positive realness: Hurwitz poles and Re G > 0 at every finite grid omega.
        out.is_strictly_positive_real = hurwitz && sweep.min_re > 0.0;
        out.is_positive_real = sweep.min_re >= -kTolPr;
    }
    if (out.is_strictly_positive_real) out.is_positive_real = true;
    if (!out.is_positive_real && out.reason.empty()) out.reason = "Re G(jw) negative on the grid";
    return out;
}

DecayEnvelope decay_envelope(const Matrix& A, double eps_margin,
                             double t_max, double t_step) {
    if (eps_margin <= 0.0) throw ParameterError("eps_margin must be positive");
    const auto evs = eigenvalues(A);
    const double abscissa = spectral_abscissa(A);

    bool repeated_at_abscissa = false;
    for (size_t i = 0; i < evs.size(); ++i) {
        if (std::abs(evs[i].real() - abscissa) > 1e-8) continue;
        int mult = 0;
        for (const auto& q : evs)
            if (std::abs(q - evs[i]) < kCancelTol) ++mult;
        if (mult > 1) repeated_at_abscissa = true;
    }

    DecayEnvelope env;
    env.rho = repeated_at_abscissa ? -abscissa - eps_margin : -abscissa;

    const Matrix step = matrix_exponential(A, t_step);
    Matrix E = Matrix::Identity(A.rows(), A.cols());
    double sup = 1.0;
    const int steps = static_cast<int>(std::round(t_max / t_step));
    for (int k = 1; k <= steps; ++k) {
        E = step * E;
        sup = std::max(sup, spectral_norm(E) * std::exp(env.rho * k * t_step));
    }
    env.K = std::max(1.0, sup);

    // Re-validate the envelope on the same grid.
    E = Matrix::Identity(A.rows(), A.cols());
    for (int k = 0; k <= steps; ++k) {
        if (spectral_norm(E) > env.K * std::exp(-env.rho * k * t_step) * (1.0 + kTolEnv))
            throw ConsistencyError("decay envelope violated on validation grid");
        if (k < steps) E = step * E;
    }
    return env;
}

}  // namespace hyperstab
