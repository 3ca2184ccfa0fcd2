#include "tpm/liealg.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tpm::lie {

std::string to_string(AlgebraKind k) { return k == AlgebraKind::su2 ? "su2" : "su11"; }

std::string to_string(Drive d) {
    switch (d) {
        case Drive::linear: return "linear";
        case Drive::sine: return "sin";
        case Drive::constant: return "const";
    }
    return "linear";
}

AlgebraKind algebra_kind_from_string(std::string_view s) {
    if (s == "su2") return AlgebraKind::su2;
    if (s == "su11") return AlgebraKind::su11;
    throw std::invalid_argument("unknown algebra kind '" + std::string(s) + "'");
}

Drive drive_from_string(std::string_view s) {
    if (s == "linear") return Drive::linear;
    if (s == "sin") return Drive::sine;
    if (s == "const") return Drive::constant;
    throw std::invalid_argument("unknown drive '" + std::string(s) + "'");
}

void AlgebraModel::validate() const {
    if (!std::isfinite(alpha)) throw std::invalid_argument("AlgebraModel: alpha must be finite");
    if (kind == AlgebraKind::su2) {
        const double twice = 2.0 * j;
        if (!(j >= 0.5) || std::abs(twice - std::round(twice)) > 1e-12 || twice > 4096)
            throw std::invalid_argument("AlgebraModel: su2 spin j must be a half-integer >= 1/2");
    } else {
        if (cutoff < kMinCutoff || cutoff > kMaxCutoff) {
            std::ostringstream os;
            os << "AlgebraModel: su11 cutoff must lie in [" << kMinCutoff << ", " << kMaxCutoff << "]";
            throw std::invalid_argument(os.str());
        }
        if (!(bargmann_h > 0.0)) throw std::invalid_argument("AlgebraModel: Bargmann index must be positive");
    }
}

Eigen::Index AlgebraModel::dim() const {
    return kind == AlgebraKind::su2 ? static_cast<Eigen::Index>(std::lround(2.0 * j)) + 1 : cutoff;
}

double AlgebraModel::f(double tau) const {
    switch (drive) {
        case Drive::linear: return tau;
        case Drive::sine: return std::sin(tau);
        case Drive::constant: return 1.0;
    }
    return tau;
}

namespace {

Eigen::MatrixXcd raising(const AlgebraModel& m) {
    const Eigen::Index d = m.dim();
    Eigen::MatrixXcd kp = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const double nn = static_cast<double>(n);
        kp(n + 1, n) = m.kind == AlgebraKind::su2 ? std::sqrt((nn + 1.0) * (2.0 * m.j - nn))
                                                  : std::sqrt((nn + 1.0) * (2.0 * m.bargmann_h + nn));
    }
    return kp;
}

Eigen::MatrixXcd weight_diagonal(const AlgebraModel& m) {
    const Eigen::Index d = m.dim();
    Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index n = 0; n < d; ++n)
        k0(n, n) = m.kind == AlgebraKind::su2 ? static_cast<double>(n) - m.j : m.bargmann_h + static_cast<double>(n);
    return k0;
}

// sinh(z)/z
cplx sinhc(cplx z) { return std::abs(z) < 1e-8 ? cplx(1.0) + z * z / 6.0 : std::sinh(z) / z; }

using Mat2 = Eigen::Matrix2cd;

// exp(M) for 2x2 M.
Mat2 expm2(const Mat2& m) {
    const cplx half_tr = 0.5 * m.trace();
    const Mat2 traceless = m - half_tr * Mat2::Identity();
    const cplx s = std::sqrt(-traceless.determinant());
    return std::exp(half_tr) * (std::cosh(s) * Mat2::Identity() + sinhc(s) * traceless);
}

Mat2 k0_2() { return (Mat2() << 0.5, 0.0, 0.0, -0.5).finished(); }
Mat2 kp_2() { return (Mat2() << 0.0, I_unit, 0.0, 0.0).finished(); }
Mat2 km_2() { return (Mat2() << 0.0, 0.0, I_unit, 0.0).finished(); }

Mat2 w_tau_2(double alpha, double tau) {
    const Mat2 h1 = alpha * (kp_2() + km_2()) + k0_2();
    const Mat2 w = expm2(I_unit * (kp_2() + km_2()));
    return expm2(-I_unit * tau * h1) * w * expm2(I_unit * tau * h1);
}

// Arithmetic-geometric mean.
double agm(double a, double b) {
    for (int it = 0; it < 64 && std::abs(a - b) > 1e-16 * a; ++it) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return 0.5 * (a + b);
}

void require_quarter(const AlgebraModel& m) {
    m.validate();
    if (m.kind != AlgebraKind::su11 || std::abs(m.bargmann_h - 0.25) > 1e-15)
        throw std::invalid_argument("coherent-state closed forms require su11 with h = 1/4");
}

}  // namespace

Generators generator_matrices(const AlgebraModel& model) {
    model.validate();
    Eigen::MatrixXcd kp = raising(model);
    Eigen::MatrixXcd km = kp.transpose();
    return Generators{Operator::hermitian(weight_diagonal(model)), Operator::general(std::move(kp)),
                      Operator::general(std::move(km))};
}

double commutator_residual(const Generators& gens, double sigma, int excluded_top) {
    const Eigen::MatrixXcd& k0 = gens.k0.matrix();
    const Eigen::MatrixXcd& kp = gens.k_plus.matrix();
    const Eigen::MatrixXcd& km = gens.k_minus.matrix();
    const Eigen::Index keep = std::max<Eigen::Index>(0, k0.rows() - excluded_top);
    if (keep == 0) return 0.0;
    const Eigen::MatrixXcd c1 = km * kp - kp * km - 2.0 * sigma * k0;
    const Eigen::MatrixXcd c2 = k0 * kp - kp * k0 - kp;
    const Eigen::MatrixXcd c3 = k0 * km - km * k0 + km;
    return std::max({c1.topLeftCorner(keep, keep).cwiseAbs().maxCoeff(),
                     c2.topLeftCorner(keep, keep).cwiseAbs().maxCoeff(),
                     c3.topLeftCorner(keep, keep).cwiseAbs().maxCoeff()});
}

EffectiveCoefficients effective_coefficients(const AlgebraModel& model, double tau) {
    const double x = 2.0 * model.alpha * model.f(tau);
    if (model.kind == AlgebraKind::su2) return {2.0 * model.alpha * std::cos(x), model.alpha * std::sin(x)};
    return {2.0 * model.alpha * std::cosh(x), model.alpha * std::sinh(x)};
}

EffectiveObservable effective_observable(const AlgebraModel& model, double tau) {
    const Generators g = generator_matrices(model);
    const EffectiveCoefficients c = effective_coefficients(model, tau);
    Eigen::MatrixXcd m = c.A0 * g.k0.matrix() + I_unit * c.A1 * (g.k_plus.matrix() - g.k_minus.matrix());
    return {c, Operator::hermitian(std::move(m))};
}

LanczosCoefficients closed_form_lanczos(const AlgebraModel& model, double tau, int n_max) {
    model.validate();
    if (n_max < 0) throw std::invalid_argument("closed_form_lanczos: n_max must be >= 0");
    const bool su2 = model.kind == AlgebraKind::su2;
    const int limit = su2 ? static_cast<int>(std::lround(2.0 * model.j)) : model.cutoff / 2;
    if (n_max > limit) {
        std::ostringstream os;
        os << "closed_form_lanczos: n_max " << n_max << " exceeds " << limit;
        throw std::invalid_argument(os.str());
    }
    const EffectiveCoefficients c = effective_coefficients(model, tau);
    LanczosCoefficients out;
    for (int n = 0; n <= n_max; ++n) {
        const double nn = n;
        if (su2) {
            out.a.push_back(c.A0 * (nn - model.j));
            if (n > 0) out.b.push_back(c.A1 * std::sqrt(nn * (2.0 * model.j - nn + 1.0)));
        } else {
            out.a.push_back(c.A0 * (nn + model.bargmann_h));
            if (n > 0) out.b.push_back(c.A1 * std::sqrt(nn * (2.0 * model.bargmann_h + nn - 1.0)));
        }
    }
    return out;
}

CoherentParameters su11_coherent_parameters(const AlgebraModel& model, double tau, double u) {
    require_quarter(model);
    const double x = 2.0 * model.alpha * model.f(tau);
    CoherentParameters p;
    const cplx c_plus = u * model.alpha * std::sinh(x);
    const cplx c_minus = -c_plus;
    const cplx c0 = -2.0 * I_unit * u * model.alpha * std::cosh(x);
    p.theta = std::sqrt(0.25 * c0 * c0 - c_plus * c_minus);
    const cplx sc = sinhc(p.theta);
    p.g = std::cosh(p.theta) - 0.5 * c0 * sc;
    p.c_plus = c_plus * sc / p.g;
    p.c_minus = c_minus * sc / p.g;
    p.c_zero = 1.0 / (p.g * p.g);

    // g = cos(y) + i cosh(x) sin(y), y = alpha u, winds continuously
    const double y = model.alpha * u;
    const double k = std::floor((y + 0.5 * std::numbers::pi) / std::numbers::pi);
    const double reduced = y - k * std::numbers::pi;
    const double continuous = std::atan(std::cosh(x) * std::tan(reduced)) + k * std::numbers::pi;
    const double principal = std::arg(p.g);
    const double arg = principal + 2.0 * std::numbers::pi * std::round((continuous - principal) / (2.0 * std::numbers::pi));
    p.amplitude0 = std::polar(std::pow(std::abs(p.g), -0.5), -0.5 * arg);
    return p;
}

ComplexityTrace su11_coherent_amplitudes(const AlgebraModel& model, double tau, std::span<const double> u_grid) {
    require_quarter(model);
    const Eigen::Index levels = model.cutoff;
    const double a1 = effective_coefficients(model, tau).A1;
    const cplx step_phase = a1 < 0.0 ? I_unit : -I_unit;  // (i s)^-1

    ComplexityTrace out;
    out.u_grid.assign(u_grid.begin(), u_grid.end());
    out.phi.resize(levels, static_cast<Eigen::Index>(u_grid.size()));
    for (std::size_t g = 0; g < u_grid.size(); ++g) {
        const CoherentParameters p = su11_coherent_parameters(model, tau, u_grid[g]);
        if (std::abs(p.c_plus) >= 1.0) {
            std::ostringstream os;
            os << "su11_coherent_amplitudes: |C+| = " << std::abs(p.c_plus) << " >= 1 at tau=" << tau
               << ", u=" << u_grid[g];
            throw NumericalError(os.str());
        }
        cplx term = p.amplitude0;
        double weight = 1.0;  // sqrt(Gamma(n+1/2)/(n! sqrt(pi)))
        for (Eigen::Index n = 0; n < levels; ++n) {
            if (n > 0) {
                weight *= std::sqrt((static_cast<double>(n) - 0.5) / static_cast<double>(n));
                term *= step_phase * p.c_plus;
            }
            out.phi(n, static_cast<Eigen::Index>(g)) = term * weight;
        }
    }
    finalize_trace(out);
    return out;
}

std::vector<double> su11_spread_complexity_closed(const AlgebraModel& model, double tau,
                                                  std::span<const double> u_grid) {
    require_quarter(model);
    std::vector<double> out;
    out.reserve(u_grid.size());
    for (double u : u_grid) {
        const CoherentParameters p = su11_coherent_parameters(model, tau, u);
        const double big_f = std::norm(p.c_plus);
        if (big_f >= 1.0) throw NumericalError("su11_spread_complexity_closed: |C+| >= 1");
        // |phi_1|^2 = |C0|^(1/2) |C+|^2 / 2
        const double phi1_sq = std::abs(p.amplitude0) * std::abs(p.amplitude0) * big_f * 0.5;
        out.push_back(phi1_sq / std::pow(1.0 - big_f, 1.5));
    }
    return out;
}

Eigen::MatrixXcd normal_ordered_matrix(cplx x, cplx a0_pow_h, cplx a0, cplx y, int levels, double h) {
    const Eigen::Index d = levels;
    auto ladder_exp = [&](cplx z) {
        Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(d, d);
        for (Eigen::Index n = 0; n < d; ++n) {
            l(n, n) = 1.0;
            for (Eigen::Index m = n; m + 1 < d; ++m) {
                const double mm = static_cast<double>(m);
                l(m + 1, n) = l(m, n) * z * std::sqrt((mm + 1.0) * (2.0 * h + mm)) / static_cast<double>(m + 1 - n);
            }
        }
        return l;
    };
    Eigen::VectorXcd diag(d);
    cplx power = a0_pow_h;
    for (Eigen::Index n = 0; n < d; ++n) {
        diag(n) = power;
        power *= a0;
    }
    return ladder_exp(x) * diag.asDiagonal() * ladder_exp(y).transpose();
}

NormalOrderedForm heisenberg_W_decomposition(double alpha, double tau, int cutoff, int check_levels) {
    if (check_levels < 2 || 4 * check_levels > cutoff)
        throw std::invalid_argument("heisenberg_W_decomposition: need 2 <= check_levels <= cutoff/4");
    const double h = 0.25;
    for (int cut = cutoff;; cut *= 2) {
        AlgebraModel model;
        model.kind = AlgebraKind::su11;
        model.alpha = alpha;
        model.cutoff = cut;
        const Generators g = generator_matrices(model);
        const Eigen::MatrixXcd l = g.k_plus.matrix() + g.k_minus.matrix();

        const SpectralDecomposition ls = eigendecompose(Operator::hermitian(l));
        const Eigen::MatrixXcd w = ls.propagator(-1.0);  // exp(+i L)
        const SpectralDecomposition h1 = eigendecompose(Operator::hermitian(alpha * l + g.k0.matrix()));
        const Eigen::MatrixXcd u = h1.propagator(tau);
        const Eigen::MatrixXcd wt = u * w * u.adjoint();

        NormalOrderedForm out;
        out.cutoff = cut;
        const cplx a0_pow_h = wt(0, 0);
        out.a_zero = std::pow(a0_pow_h, 4);
        out.a_plus = wt(1, 0) / (std::sqrt(2.0 * h) * a0_pow_h);
        out.a_minus = wt(0, 1) / (std::sqrt(2.0 * h) * a0_pow_h);
        const Eigen::MatrixXcd r = normal_ordered_matrix(out.a_plus, a0_pow_h, out.a_zero, out.a_minus, check_levels, h);
        out.residual = (r - wt.topLeftCorner(check_levels, check_levels)).cwiseAbs().maxCoeff();
        if (out.residual <= 1e-6) return out;
        if (2 * cut > kMaxCutoff) {
            std::ostringstream os;
            os << "heisenberg_W_decomposition: truncation residual " << out.residual << " at cutoff " << cut
               << " (raise cutoff)";
            throw NumericalError(os.str());
        }
    }
}

NormalOrderedForm disentangle_w_tau(double alpha, double tau) {
    const Mat2 m = w_tau_2(alpha, tau);
    // exp(A+ K+) exp(ln A0 K0) exp(A- K-) = [[., i A+ / s], [i A- / s, 1/s]], s = A0^(1/2)
    NormalOrderedForm out;
    out.a_zero = 1.0 / (m(1, 1) * m(1, 1));
    out.a_plus = -I_unit * m(0, 1) / m(1, 1);
    out.a_minus = -I_unit * m(1, 0) / m(1, 1);
    return out;
}

std::vector<cplx> acf_from_b_decomposition(double alpha, double tau, std::span<const double> u_grid) {
    const Mat2 wt = w_tau_2(alpha, tau);
    const Mat2 wt_inv = wt.inverse();
    auto m22 = [&](double u) {
        const Mat2 e = (Mat2() << std::exp(-0.5 * I_unit * u), 0.0, 0.0, std::exp(0.5 * I_unit * u)).finished();
        return (wt_inv * e * wt)(1, 1);
    };
    // G = B0^(1/4) = M22^(-1/2); track arg(M22) continuously from u = 0
    std::vector<cplx> out;
    out.reserve(u_grid.size());
    double u_prev = 0.0;
    double arg = 0.0;
    constexpr double kMaxStep = 0.02;
    for (double u : u_grid) {
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(u - u_prev) / kMaxStep)));
        for (int s = 1; s <= steps; ++s) {
            const double us = u_prev + (u - u_prev) * static_cast<double>(s) / steps;
            const double principal = std::arg(m22(us));
            arg = principal + 2.0 * std::numbers::pi * std::round((arg - principal) / (2.0 * std::numbers::pi));
        }
        u_prev = u;
        out.push_back(std::polar(std::pow(std::abs(m22(u)), -0.5), -0.5 * arg));
    }
    return out;
}

std::vector<double> ipr_model(double alpha, std::span<const double> tau_grid) {
    std::vector<double> out;
    out.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        const Mat2 m = w_tau_2(alpha, tau);
        // |A+|^2 = |m12|^2/|m22|^2 and 1 - |A+|^2 = 1/|m22|^2 (SU(1,1) norm)
        const double g22 = std::norm(m(1, 1));
        const double z2 = std::norm(m(0, 1)) / g22;
        // sum_n ((1/2)_n/n!)^2 k^n = (2/pi) K(k), K via AGM(1, sqrt(1 - k^2))
        const double k_comp = std::sqrt((1.0 + z2) / g22);
        out.push_back(1.0 / (g22 * agm(1.0, k_comp)));
    }
    return out;
}

std::vector<double> b1_model(double alpha, std::span<const double> tau_grid) {
    std::vector<double> out;
    out.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        const Mat2 m = w_tau_2(alpha, tau);
        // Var K0 = 2h |z|^2 / (1 - |z|^2)^2 = 2h |m12|^2 |m22|^2
        out.push_back(std::sqrt(0.5) * std::abs(m(0, 1)) * std::abs(m(1, 1)));
    }
    return out;
}

}  // namespace tpm::lie
