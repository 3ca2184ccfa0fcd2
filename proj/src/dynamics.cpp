#include "tpm/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace tpm {

namespace {

void require_dims(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw std::invalid_argument(os.str());
    }
}

void validate_setup(const TpmSetup& s) {
    const Eigen::Index d = s.initial.dim();
    require_dims(d, s.perturbation.dim(), "TpmSetup perturbation");
    require_dims(d, s.observable.dim(), "TpmSetup observable");
    require_dims(d, s.evolution.dim(), "TpmSetup evolution");
    if (!s.perturbation.is_unitary())
        throw ContractError("TpmSetup: perturbation must be unitary");
    require_eigenstate(s.initial, s.observable);
}

double degeneracy_tol(const SpectralDecomposition& h) {
    return kDegeneracyTol * std::max(1.0, h.max_abs_eigenvalue());
}

}  // namespace

Operator heisenberg_evolve(const Operator& w, const SpectralDecomposition& h1, double tau) {
    require_dims(w.dim(), h1.dim(), "heisenberg_evolve");
    if (!w.is_unitary()) throw ContractError("heisenberg_evolve: W must be unitary");
    if (tau == 0.0) return w;
    const Eigen::MatrixXcd u = h1.propagator(tau);
    Eigen::MatrixXcd wt = u * w.matrix() * u.adjoint();
    return Operator::unitary(std::move(wt));
}

StateVector u_evolve(const StateVector& psi, const SpectralDecomposition& h0, double u) {
    require_dims(psi.dim(), h0.dim(), "u_evolve");
    if (u == 0.0) return psi;
    return StateVector::normalized(h0.evolve(psi.amplitudes(), u));
}

double eigenstate_residual(const StateVector& psi, const SpectralDecomposition& h) {
    require_dims(psi.dim(), h.dim(), "eigenstate_residual");
    const Eigen::VectorXcd c = h.coefficients(psi.amplitudes());
    const double mean = (c.cwiseAbs2().array() * h.eigenvalues.array()).sum();
    const Eigen::VectorXcd hc = ((h.eigenvalues.array() - mean).cast<cplx>() * c.array()).matrix();
    return hc.norm();
}

void require_eigenstate(const StateVector& psi, const SpectralDecomposition& h, double tol) {
    const double r = eigenstate_residual(psi, h);
    if (r > tol) {
        std::ostringstream os;
        os << "initial state is not an eigenstate of the observable (residual " << r << ")";
        throw PreconditionError(os.str(), r);
    }
}

StateVector perturbed_state(const TpmSetup& setup, double tau) {
    validate_setup(setup);
    // W_tau|O0> = U W U^dagger |O0>, U = exp(-i H1 tau)
    const Eigen::VectorXcd back = setup.evolution.evolve(setup.initial.amplitudes(), -tau);
    const Eigen::VectorXcd kicked = setup.perturbation.matrix() * back;
    return StateVector::normalized(setup.evolution.evolve(kicked, tau));
}

CFTrace characteristic_function(const TpmSetup& setup, double tau, std::span<const double> u_grid) {
    const StateVector psi = perturbed_state(setup, tau);
    const Eigen::VectorXd p = setup.observable.coefficients(psi.amplitudes()).cwiseAbs2();
    const Eigen::VectorXd& e = setup.observable.eigenvalues;

    CFTrace out;
    out.tau = tau;
    out.u_grid.assign(u_grid.begin(), u_grid.end());
    out.values.reserve(u_grid.size());
    for (double u : u_grid) {
        cplx g = 0.0;
        for (Eigen::Index n = 0; n < p.size(); ++n) g += p(n) * std::exp(-I_unit * (e(n) * u));
        out.values.push_back(g);
    }
    return out;
}

cplx otoc_four_point(const TpmSetup& setup, double tau, double u) {
    validate_setup(setup);
    const Eigen::MatrixXcd wt = heisenberg_evolve(setup.perturbation, setup.evolution, tau).matrix();
    // V = exp(i u O) = propagator(-u)
    const Eigen::MatrixXcd v = setup.observable.propagator(-u);
    Eigen::VectorXcd x = v * setup.initial.amplitudes();
    x = wt * x;
    x = v.adjoint() * x;
    x = wt.adjoint() * x;
    return setup.initial.amplitudes().dot(x);
}

std::vector<double> fotoc(const TpmSetup& setup, double tau, std::span<const double> u_grid) {
    const CFTrace cf = characteristic_function(setup, tau, u_grid);
    std::vector<double> out;
    out.reserve(cf.values.size());
    for (const cplx& g : cf.values) out.push_back(std::norm(g));
    return out;
}

std::vector<double> eigenspace_weights(const StateVector& psi, const SpectralDecomposition& basis) {
    require_dims(psi.dim(), basis.dim(), "eigenspace_weights");
    const Eigen::VectorXd p = basis.coefficients(psi.amplitudes()).cwiseAbs2();
    std::vector<double> w;
    for (auto [first, last] : basis.degenerate_groups(degeneracy_tol(basis)))
        w.push_back(p.segment(first, last - first).sum());
    return w;
}

double ipr(const StateVector& psi, const SpectralDecomposition& basis) {
    double s = 0.0;
    for (double w : eigenspace_weights(psi, basis)) s += w * w;
    return s;
}

double fotoc_long_u_average(const TpmSetup& setup, double tau) {
    const StateVector psi = perturbed_state(setup, tau);
    const Eigen::VectorXd p = setup.observable.coefficients(psi.amplitudes()).cwiseAbs2();
    double s = 0.0;
    for (auto [first, last] : setup.observable.degenerate_groups(degeneracy_tol(setup.observable))) {
        double transition = 0.0;
        for (Eigen::Index n = first; n < last; ++n) transition += p(n);
        s += transition * transition;
    }
    return s;
}

}  // namespace tpm
