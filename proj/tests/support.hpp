#pragma once

// Shared random instances and brute-force oracles for the test suites.

#include "tpm/dynamics.hpp"

#include <random>

namespace tpm::testing {

inline Eigen::MatrixXcd random_matrix(Eigen::Index dim, std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = cplx(n(rng), n(rng));
    return m;
}

inline Eigen::MatrixXcd random_hermitian(Eigen::Index dim, std::mt19937& rng) {
    const Eigen::MatrixXcd m = random_matrix(dim, rng);
    return 0.5 * (m + m.adjoint());
}

// Haar-like unitary from the QR factorization of a Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(Eigen::Index dim, std::mt19937& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_matrix(dim, rng));
    return qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
}

inline StateVector random_state(Eigen::Index dim, std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXcd v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v(k) = cplx(n(rng), n(rng));
    return StateVector::normalized(v);
}

// exp(m) by scaling and squaring around a plain Taylor series.
inline Eigen::MatrixXcd taylor_expm(const Eigen::MatrixXcd& m) {
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
    const Eigen::MatrixXcd a = m / std::ldexp(1.0, squarings);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    Eigen::MatrixXcd sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

// Random protocol instance: H0 = V diag(E) V^dagger with a random unitary V,
// random H1 and W, initial state the eigenvector `index` of H0.
inline TpmSetup random_setup(Eigen::Index dim, std::mt19937& rng, Eigen::Index index = 0) {
    SpectralDecomposition h0 = eigendecompose(Operator::hermitian(random_hermitian(dim, rng)));
    SpectralDecomposition h1 = eigendecompose(Operator::hermitian(random_hermitian(dim, rng)));
    StateVector e0(h0.eigenvectors.col(index));
    return TpmSetup{std::move(e0), Operator::unitary(random_unitary(dim, rng)), std::move(h0), std::move(h1)};
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace tpm::testing
