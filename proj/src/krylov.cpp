#include "tpm/krylov.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <sstream>

namespace tpm {

namespace {

double gershgorin_range(const Eigen::MatrixXcd& m) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double radius = m.row(r).cwiseAbs().sum() - std::abs(m(r, r));
        lo = std::min(lo, m(r, r).real() - radius);
        hi = std::max(hi, m(r, r).real() + radius);
    }
    return hi - lo;
}

}  // namespace

double default_termination_threshold(const SpectralDecomposition& h) {
    return kTerminationScale * std::max(h.spectral_range(), std::numeric_limits<double>::min());
}

KrylovDecomposition lanczos(const LinearMap& apply, const StateVector& psi0, double threshold,
                            Eigen::Index max_dim) {
    const Eigen::Index dim = psi0.dim();
    if (max_dim <= 0 || max_dim > dim) max_dim = dim;
    if (!(threshold >= 0.0)) throw std::invalid_argument("lanczos: termination threshold must be >= 0");

    KrylovDecomposition out;
    out.termination_threshold = threshold;
    out.basis.resize(dim, max_dim);
    out.basis.col(0) = psi0.amplitudes();

    Eigen::VectorXcd w;
    for (Eigen::Index n = 0;; ++n) {
        w = apply(out.basis.col(n));
        out.a.push_back(out.basis.col(n).dot(w).real());
        if (n + 1 == max_dim) break;

        w -= out.a.back() * out.basis.col(n);
        if (n > 0) w -= out.b.back() * out.basis.col(n - 1);

        const auto done = out.basis.leftCols(n + 1);
        for (int pass = 0; pass < 2; ++pass) {
            const double before = w.norm();
            const Eigen::VectorXcd c = done.adjoint() * w;
            w -= done * c;
            if (c.cwiseAbs().maxCoeff() <= kReorthogonalizationTrigger * before) break;
        }

        const double bn = w.norm();
        if (bn <= threshold) break;
        out.b.push_back(bn);
        out.basis.col(n + 1) = w / bn;
    }
    out.basis.conservativeResize(dim, out.dim_krylov());
    return out;
}

KrylovDecomposition lanczos(const Operator& h, const StateVector& psi0, LanczosOptions opts) {
    if (!h.is_hermitian()) throw ContractError("lanczos: generator must be Hermitian");
    if (h.dim() != psi0.dim()) throw std::invalid_argument("lanczos: dimension mismatch");
    const double thr = opts.termination_threshold >= 0.0
                           ? opts.termination_threshold
                           : kTerminationScale * std::max(gershgorin_range(h.matrix()),
                                                          std::numeric_limits<double>::min());
    const Eigen::MatrixXcd& m = h.matrix();
    return lanczos([&m](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return m * v; }, psi0, thr,
                   opts.max_dim);
}

KrylovDecomposition lanczos(const SpectralDecomposition& h, const StateVector& psi0, LanczosOptions opts) {
    if (h.dim() != psi0.dim()) throw std::invalid_argument("lanczos: dimension mismatch");
    const double thr =
        opts.termination_threshold >= 0.0 ? opts.termination_threshold : default_termination_threshold(h);
    return lanczos([&h](const Eigen::VectorXcd& v) { return h.apply(v); }, psi0, thr, opts.max_dim);
}

double orthonormality_defect(const KrylovDecomposition& k) {
    const Eigen::MatrixXcd g = k.basis.adjoint() * k.basis;
    return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double tridiagonal_residual(const KrylovDecomposition& k, const Operator& h, bool include_last) {
    const Eigen::Index kd = k.dim_krylov();
    const Eigen::Index last = include_last ? kd : kd - 1;
    double worst = 0.0;
    for (Eigen::Index n = 0; n < last; ++n) {
        Eigen::VectorXcd r = h.matrix() * k.basis.col(n) - k.a[n] * k.basis.col(n);
        if (n + 1 < kd) r -= k.b[n] * k.basis.col(n + 1);
        if (n > 0) r -= k.b[n - 1] * k.basis.col(n - 1);
        worst = std::max(worst, r.norm());
    }
    return worst;
}

double ComplexityTrace::max_norm_deviation() const {
    double worst = 0.0;
    for (Eigen::Index g = 0; g < phi.cols(); ++g)
        worst = std::max(worst, std::abs(phi.col(g).squaredNorm() - 1.0));
    return worst;
}

void finalize_trace(ComplexityTrace& trace) {
    const Eigen::Index grid = trace.phi.cols();
    trace.complexity.assign(static_cast<std::size_t>(grid), 0.0);
    trace.survival.assign(static_cast<std::size_t>(grid), 0.0);
    for (Eigen::Index g = 0; g < grid; ++g) {
        double c = 0.0;
        for (Eigen::Index n = 1; n < trace.phi.rows(); ++n) c += static_cast<double>(n) * std::norm(trace.phi(n, g));
        trace.complexity[static_cast<std::size_t>(g)] = c;
        trace.survival[static_cast<std::size_t>(g)] = trace.phi.rows() > 0 ? std::norm(trace.phi(0, g)) : 0.0;
    }
}

ComplexityTrace amplitudes(const KrylovDecomposition& k, const SpectralDecomposition& h0,
                           const StateVector& psi0, std::span<const double> u_grid) {
    if (k.basis.rows() != psi0.dim() || h0.dim() != psi0.dim())
        throw std::invalid_argument("amplitudes: dimension mismatch");
    const double overlap = std::abs(k.basis.col(0).dot(psi0.amplitudes()));
    if (std::abs(overlap - 1.0) > 1e-10)
        throw std::invalid_argument("amplitudes: Krylov basis was not built from this initial state");

    const Eigen::Index dim = psi0.dim();
    const Eigen::Index grid = static_cast<Eigen::Index>(u_grid.size());
    const Eigen::VectorXcd c = h0.coefficients(psi0.amplitudes());
    // (K^dagger V) * diag-phase-weighted coefficients
    const Eigen::MatrixXcd kv = k.basis.adjoint() * h0.eigenvectors;
    Eigen::MatrixXcd evolved(dim, grid);
    for (Eigen::Index g = 0; g < grid; ++g) {
        const double u = u_grid[static_cast<std::size_t>(g)];
        for (Eigen::Index m = 0; m < dim; ++m) evolved(m, g) = std::exp(-I_unit * (h0.eigenvalues(m) * u)) * c(m);
    }

    ComplexityTrace out;
    out.u_grid.assign(u_grid.begin(), u_grid.end());
    out.phi.noalias() = kv * evolved;
    finalize_trace(out);
    return out;
}

ComplexityTrace amplitudes_by_integration(const KrylovDecomposition& k, std::span<const double> u_grid,
                                          double rel_tol) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    const std::size_t kd = static_cast<std::size_t>(k.dim_krylov());
    if (kd == 0) throw std::invalid_argument("amplitudes_by_integration: empty Krylov decomposition");

    // state = (Re phi_0..Re phi_{K-1}, Im phi_0..Im phi_{K-1}); d/du phi = -i T phi
    auto rhs = [&k, kd](const State& y, State& dy, double) {
        for (std::size_t n = 0; n < kd; ++n) {
            double tr = k.a[n] * y[n];
            double ti = k.a[n] * y[kd + n];
            if (n > 0) {
                tr += k.b[n - 1] * y[n - 1];
                ti += k.b[n - 1] * y[kd + n - 1];
            }
            if (n + 1 < kd) {
                tr += k.b[n] * y[n + 1];
                ti += k.b[n] * y[kd + n + 1];
            }
            dy[n] = ti;
            dy[kd + n] = -tr;
        }
    };

    ComplexityTrace out;
    out.u_grid.assign(u_grid.begin(), u_grid.end());
    out.phi.resize(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(u_grid.size()));

    State y(2 * kd, 0.0);
    y[0] = 1.0;
    std::size_t column = 0;
    auto observer = [&](const State& s, double) {
        for (std::size_t n = 0; n < kd; ++n)
            out.phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(column)) = cplx(s[n], s[kd + n]);
        ++column;
    };

    if (!u_grid.empty()) {
        std::vector<double> times(u_grid.begin(), u_grid.end());
        const bool starts_at_zero = times.front() == 0.0;
        if (!starts_at_zero) times.insert(times.begin(), 0.0);
        auto stepper = odeint::make_controlled(rel_tol * 1e-3, rel_tol, odeint::runge_kutta_dopri5<State>());
        const double dt0 = 1e-3 / std::max(1.0, std::abs(k.a[0]) + (k.b.empty() ? 0.0 : k.b[0]));
        if (starts_at_zero) {
            odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt0, observer);
        } else {
            bool skip = true;
            odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt0,
                                    [&](const State& s, double t) {
                                        if (skip) {
                                            skip = false;
                                            return;
                                        }
                                        observer(s, t);
                                    });
        }
    }
    finalize_trace(out);
    return out;
}

std::vector<double> spread_complexity(const ComplexityTrace& trace) {
    ComplexityTrace copy;
    copy.phi = trace.phi;
    finalize_trace(copy);
    return copy.complexity;
}

std::vector<cplx> spectral_moments(const StateVector& psi, const SpectralDecomposition& h, int count) {
    if (count < 1) throw std::invalid_argument("spectral_moments: count must be positive");
    const Eigen::VectorXd p = h.coefficients(psi.amplitudes()).cwiseAbs2();
    std::vector<cplx> out;
    cplx factor = 1.0;
    for (int n = 0; n < count; ++n) {
        double mu = 0.0;
        for (Eigen::Index m = 0; m < p.size(); ++m) mu += p(m) * std::pow(h.eigenvalues(m), n);
        out.push_back(factor * mu);
        factor *= -I_unit;
    }
    return out;
}

LanczosCoefficients lanczos_from_moments(std::span<const cplx> moments) {
    const std::size_t count = moments.size();
    if (count < 3 || count % 2 == 0)
        throw std::invalid_argument("lanczos_from_moments: need an odd number (>= 3) of moments M_0..M_2k");
    const int pairs = static_cast<int>((count - 1) / 2);
    if (pairs > kMaxMomentPairs) {
        std::ostringstream os;
        os << "lanczos_from_moments: at most " << kMaxMomentPairs
           << " pairs from raw moments; use lanczos for deeper coefficients";
        throw std::invalid_argument(os.str());
    }
    if (std::abs(moments[0] - 1.0) > 1e-12)
        throw PreconditionError("lanczos_from_moments: M_0 must equal 1", std::abs(moments[0] - 1.0));

    // mu_n = i^n M_n must be real
    using real = long double;
    std::vector<real> mu(count);
    cplx factor = 1.0;
    double scale = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
        const cplx m = factor * moments[n];
        scale = std::max(scale, std::abs(m));
        if (std::abs(m.imag()) > 1e-9 * std::max(1.0, std::abs(m)))
            throw PreconditionError("lanczos_from_moments: moments are not those of a real spectrum",
                                    std::abs(m.imag()));
        mu[n] = m.real();
        factor *= I_unit;
    }

    const real mean = mu[1];
    const real var = mu[2] - mean * mean;
    LanczosCoefficients out;
    if (!(var > static_cast<real>(kMomentExhaustionTol) * std::max<real>(1, mean * mean))) {
        out.a.push_back(static_cast<double>(mean));
        return out;
    }
    const real sd = std::sqrt(var);

    // centered, scaled moments nu_n = E[((x - mean)/sd)^n]
    std::vector<real> nu(count, 0);
    for (std::size_t n = 0; n < count; ++n) {
        real binom = 1;
        real acc = 0;
        for (std::size_t j = 0; j <= n; ++j) {
            acc += binom * mu[j] * std::pow(-mean, static_cast<real>(n - j));
            binom = binom * static_cast<real>(n - j) / static_cast<real>(j + 1);
        }
        nu[n] = acc / std::pow(sd, static_cast<real>(n));
    }

    // Chebyshev algorithm: sigma[k][l] = int pi_k(x) x^l dmu
    const std::size_t L = count;
    std::vector<real> sigma_prev(L, 0), sigma_cur(nu.begin(), nu.end()), sigma_next(L, 0);
    std::vector<real> alpha{nu[1] / nu[0]};
    std::vector<real> beta{nu[0]};
    for (std::size_t k = 1; 2 * k <= L - 1; ++k) {
        for (std::size_t l = k; l + k <= L - 1; ++l)
            sigma_next[l] = sigma_cur[l + 1] - alpha[k - 1] * sigma_cur[l] - beta[k - 1] * sigma_prev[l];
        const real bk = sigma_next[k] / sigma_cur[k - 1];
        if (!(bk > static_cast<real>(kMomentExhaustionTol))) break;
        beta.push_back(bk);
        if (2 * k + 1 <= L - 1)
            alpha.push_back(sigma_next[k + 1] / sigma_next[k] - sigma_cur[k] / sigma_cur[k - 1]);
        sigma_prev.swap(sigma_cur);
        sigma_cur.swap(sigma_next);
    }

    for (real a : alpha) out.a.push_back(static_cast<double>(mean + sd * a));
    for (std::size_t k = 1; k < beta.size(); ++k) out.b.push_back(static_cast<double>(sd * std::sqrt(beta[k])));
    return out;
}

ThermoIdentities thermo_identities(const TpmSetup& setup, double tau) {
    const StateVector psi = perturbed_state(setup, tau);
    const Eigen::VectorXcd h_psi = setup.observable.apply(psi.amplitudes());

    ThermoIdentities out;
    out.scale = setup.observable.max_abs_eigenvalue();
    out.mean = psi.amplitudes().dot(h_psi).real();
    out.variance = h_psi.squaredNorm() - out.mean * out.mean;

    const KrylovDecomposition k = lanczos(setup.observable, psi, LanczosOptions{2, -1.0});
    out.a0_lanczos = k.a.front();
    out.b1_sq_lanczos = k.b.empty() ? 0.0 : k.b.front() * k.b.front();
    out.a0_check = std::abs(out.a0_lanczos - out.mean);
    out.b1_check = std::abs(out.b1_sq_lanczos - out.variance);
    return out;
}

namespace {

// Pools |c_k| over groups of sorted eigenvalues equal within `tol`.
LevelKrylov pooled_lanczos(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& magnitudes, double tol,
                           double threshold) {
    std::vector<double> energies, weights;
    for (Eigen::Index first = 0; first < eigenvalues.size();) {
        Eigen::Index last = first + 1;
        while (last < eigenvalues.size() && eigenvalues(last) - eigenvalues(last - 1) <= tol) ++last;
        const double w = magnitudes.segment(first, last - first).norm();
        if (w > kLevelWeightFloor) {
            energies.push_back(eigenvalues.segment(first, last - first).mean());
            weights.push_back(w);
        }
        first = last;
    }
    const auto levels = static_cast<Eigen::Index>(weights.size());
    LevelKrylov out;
    out.energies = Eigen::Map<const Eigen::VectorXd>(energies.data(), levels);
    out.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), levels);
    const Eigen::VectorXcd diag = out.energies.cast<cplx>();
    out.krylov = lanczos([&diag](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return diag.cwiseProduct(v); },
                         StateVector::normalized(out.weights.cast<cplx>()), threshold, 0);
    return out;
}

}  // namespace

LevelKrylov level_lanczos(const SpectralDecomposition& h, const StateVector& psi) {
    if (psi.dim() != h.dim()) throw std::invalid_argument("level_lanczos: dimension mismatch");
    return pooled_lanczos(h.eigenvalues, h.coefficients(psi.amplitudes()).cwiseAbs(),
                          kDegeneracyTol * std::max(1.0, h.max_abs_eigenvalue()), default_termination_threshold(h));
}

ComplexityTrace level_amplitudes(const LevelKrylov& k, std::span<const double> u_grid) {
    const Eigen::Index levels = k.energies.size();
    const auto grid = static_cast<Eigen::Index>(u_grid.size());
    Eigen::MatrixXcd evolved(levels, grid);
    for (Eigen::Index g = 0; g < grid; ++g) {
        const double u = u_grid[static_cast<std::size_t>(g)];
        for (Eigen::Index l = 0; l < levels; ++l) evolved(l, g) = std::exp(-I_unit * (k.energies(l) * u)) * k.weights(l);
    }
    ComplexityTrace out;
    out.u_grid.assign(u_grid.begin(), u_grid.end());
    out.phi.noalias() = k.krylov.basis.adjoint() * evolved;
    finalize_trace(out);
    return out;
}

double interpretation_equivalence(const TpmSetup& setup, double tau, std::span<const double> u_grid) {
    // evolve W_tau|E0> with H0
    const ComplexityTrace t1 = level_amplitudes(level_lanczos(setup.observable, perturbed_state(setup, tau)), u_grid);

    // evolve |E0> with O_ef = W_tau^dagger H0 W_tau. O_ef is diagonalized in
    // extended precision: in double its eigenvectors carry errors of order
    // eps |H0| / gap, which shifts the weights of sparsely populated levels.
    // The rotation is projected back onto the unitary group first; its
    // rounding defect otherwise splits near-degenerate levels the same way.
    using ComplexL = std::complex<long double>;
    using MatrixL = Eigen::Matrix<ComplexL, Eigen::Dynamic, Eigen::Dynamic>;
    const MatrixL wt = heisenberg_evolve(setup.perturbation, setup.evolution, tau).matrix().cast<ComplexL>();
    const MatrixL v = setup.observable.eigenvectors.cast<ComplexL>();
    MatrixL vw = v.adjoint() * wt;
    {
        Eigen::HouseholderQR<MatrixL> qr(vw);
        MatrixL q = qr.householderQ() * MatrixL::Identity(vw.rows(), vw.cols());
        const MatrixL r = qr.matrixQR().template triangularView<Eigen::Upper>();
        for (Eigen::Index k = 0; k < q.cols(); ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
        vw = q;
    }
    MatrixL o = vw.adjoint() * setup.observable.eigenvalues.cast<ComplexL>().asDiagonal() * vw;
    o = (0.5L * (o + o.adjoint())).eval();
    const Eigen::SelfAdjointEigenSolver<MatrixL> ef(o);
    if (ef.info() != Eigen::Success) throw NumericalError("interpretation_equivalence: solver failed");
    const Eigen::VectorXd e2 = ef.eigenvalues().cast<double>();
    const Eigen::VectorXd c2 =
        (ef.eigenvectors().adjoint() * setup.initial.amplitudes().cast<ComplexL>()).cwiseAbs().cast<double>();
    const double scale = std::max(1.0, e2.cwiseAbs().maxCoeff());
    const ComplexityTrace t2 = level_amplitudes(
        pooled_lanczos(e2, c2, kDegeneracyTol * scale, kTerminationScale * (e2(e2.size() - 1) - e2(0))), u_grid);

    const Eigen::Index rows = std::max(t1.phi.rows(), t2.phi.rows());
    double worst = 0.0;
    for (Eigen::Index n = 0; n < rows; ++n) {
        for (Eigen::Index g = 0; g < t1.phi.cols(); ++g) {
            const cplx p1 = n < t1.phi.rows() ? t1.phi(n, g) : cplx{};
            const cplx p2 = n < t2.phi.rows() ? t2.phi(n, g) : cplx{};
            worst = std::max(worst, std::abs(p1 - p2));
        }
    }
    return worst;
}

}  // namespace tpm
