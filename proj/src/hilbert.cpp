#include "tpm/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tpm {

std::string to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "open";
}

Boundary boundary_from_string(std::string_view s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "open") return Boundary::open;
    throw std::invalid_argument("unknown boundary '" + std::string(s) + "'");
}

void SpinChainSpec::validate() const {
    if (n_sites < 2 || n_sites > kMaxSites) {
        std::ostringstream os;
        os << "SpinChainSpec: n_sites must lie in [2, " << kMaxSites << "], got " << n_sites;
        throw std::invalid_argument(os.str());
    }
    if (!std::isfinite(J) || !std::isfinite(h) || !std::isfinite(g))
        throw std::invalid_argument("SpinChainSpec: couplings must be finite");
}

namespace {

void check_site(int site, int n_sites) {
    if (n_sites < 1 || n_sites > kMaxSites)
        throw std::invalid_argument("n_sites out of range");
    if (site < 1 || site > n_sites) {
        std::ostringstream os;
        os << "site " << site << " outside 1.." << n_sites;
        throw std::invalid_argument(os.str());
    }
}

// Bit of basis index `state` that encodes `site`.
inline int site_bit(Eigen::Index state, int site, int n_sites) {
    return static_cast<int>((state >> (n_sites - site)) & 1);
}

inline double z_value(Eigen::Index state, int site, int n_sites) {
    return site_bit(state, site, n_sites) ? -1.0 : 1.0;
}

}  // namespace

Operator pauli_chain_operator(int site, Axis axis, int n_sites) {
    check_site(site, n_sites);
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    const Eigen::Index flip = Eigen::Index{1} << (n_sites - site);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        switch (axis) {
            case Axis::z: m(s, s) = z_value(s, site, n_sites); break;
            case Axis::x: m(s ^ flip, s) = 1.0; break;
            case Axis::y:
                // sigma^y |0> = i|1>, sigma^y |1> = -i|0>
                m(s ^ flip, s) = site_bit(s, site, n_sites) ? -I_unit : I_unit;
                break;
        }
    }
    return Operator::hermitian_unitary(std::move(m));
}

Operator ising_hamiltonian(const SpinChainSpec& spec) {
    spec.validate();
    const int n = spec.n_sites;
    const Eigen::Index dim = spec.dim();
    const int bonds = spec.boundary == Boundary::periodic ? n : n - 1;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (int i = 1; i <= bonds; ++i) {
            const int next = i % n + 1;
            diag -= spec.J * z_value(s, i, n) * z_value(s, next, n);
        }
        for (int i = 1; i <= n; ++i) {
            diag -= spec.g * z_value(s, i, n);
            m(s ^ (Eigen::Index{1} << (n - i)), s) -= spec.h;
        }
        m(s, s) += diag;
    }
    return Operator::hermitian(std::move(m));
}

Operator local_perturbation(int site, double theta, int n_sites) {
    check_site(site, n_sites);
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (Eigen::Index k = 0; k < dim; ++k)
        m(k, k) = cplx(c, -s * z_value(k, site, n_sites));
    return Operator::unitary(std::move(m));
}

int default_perturbation_site(int n_sites) { return (n_sites + 1) / 2; }

double SpectralDecomposition::spectral_range() const {
    if (eigenvalues.size() == 0) return 0.0;
    return eigenvalues(eigenvalues.size() - 1) - eigenvalues(0);
}

double SpectralDecomposition::max_abs_eigenvalue() const {
    return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

Eigen::VectorXcd SpectralDecomposition::coefficients(const Eigen::VectorXcd& psi) const {
    if (psi.size() != dim()) throw std::invalid_argument("SpectralDecomposition: dimension mismatch");
    return eigenvectors.adjoint() * psi;
}

Eigen::VectorXcd SpectralDecomposition::apply(const Eigen::VectorXcd& psi) const {
    Eigen::VectorXcd c = coefficients(psi);
    return eigenvectors * (eigenvalues.cast<cplx>().cwiseProduct(c));
}

Eigen::VectorXcd SpectralDecomposition::evolve(const Eigen::VectorXcd& psi, double t) const {
    Eigen::VectorXcd c = coefficients(psi);
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-I_unit * (eigenvalues(k) * t));
    return eigenvectors * c;
}

Eigen::MatrixXcd SpectralDecomposition::propagator(double t) const {
    Eigen::VectorXcd phases(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) phases(k) = std::exp(-I_unit * (eigenvalues(k) * t));
    return eigenvectors * phases.asDiagonal() * eigenvectors.adjoint();
}

Eigen::MatrixXcd SpectralDecomposition::reconstruct() const {
    return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
}

std::vector<std::pair<Eigen::Index, Eigen::Index>>
SpectralDecomposition::degenerate_groups(double tol) const {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;
    Eigen::Index first = 0;
    for (Eigen::Index k = 1; k <= dim(); ++k) {
        if (k == dim() || eigenvalues(k) - eigenvalues(k - 1) > tol) {
            groups.emplace_back(first, k);
            first = k;
        }
    }
    return groups;
}

namespace {

void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double a = std::abs(v(k));
        // strict comparison keeps the first index among near-equal maxima
        if (a > best_abs * (1.0 + 1e-12)) {
            best_abs = a;
            best = k;
        }
    }
    if (best_abs > 0.0) v *= std::conj(v(best)) / best_abs;
    v(best) = cplx(std::abs(v(best)), 0.0);
}

}  // namespace

SpectralDecomposition eigendecompose(const Operator& h) {
    if (!h.is_hermitian())
        throw ContractError("eigendecompose: operator is not flagged Hermitian");
    const Eigen::MatrixXcd& m = h.matrix();

    SpectralDecomposition out;
    if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.real());
        if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver failed");
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
        if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver failed");
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors();
    }

    for (Eigen::Index k = 0; k < out.dim(); ++k) fix_phase(out.eigenvectors.col(k));

    const double tol = kDegeneracyTol * std::max(1.0, out.max_abs_eigenvalue());
    for (auto [first, last] : out.degenerate_groups(tol)) {
        if (last - first < 2) continue;
        std::vector<Eigen::Index> order(static_cast<std::size_t>(last - first));
        std::iota(order.begin(), order.end(), first);
        const Eigen::MatrixXd mags = out.eigenvectors.middleCols(first, last - first).cwiseAbs();
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            const auto ca = mags.col(a - first);
            const auto cb = mags.col(b - first);
            return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
        });
        const Eigen::MatrixXcd block = out.eigenvectors.middleCols(first, last - first);
        for (std::size_t k = 0; k < order.size(); ++k)
            out.eigenvectors.col(first + static_cast<Eigen::Index>(k)) = block.col(order[k] - first);
    }
    return out;
}

}  // namespace tpm
