#pragma once

// Spin-chain operators in the computational basis (site 1 is the most
// significant bit; bit value 0 is the sigma^z = +1 state) and dense
// Hermitian eigendecompositions.

#include "tpm/operator.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tpm {

enum class Axis { x, y, z };
enum class Boundary { periodic, open };

std::string to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

inline constexpr int kMaxSites = 14;

// H = -sum_i [ J s^z_{i+1} s^z_i + h s^x_i + g s^z_i ]
struct SpinChainSpec {
    int n_sites = 2;
    double J = 1.0;
    double h = 0.0;
    double g = 0.0;
    Boundary boundary = Boundary::periodic;

    void validate() const;
    Eigen::Index dim() const { return Eigen::Index{1} << n_sites; }
};

// I x ... x sigma_axis (at `site`, 1-based) x ... x I.
Operator pauli_chain_operator(int site, Axis axis, int n_sites);

Operator ising_hamiltonian(const SpinChainSpec& spec);

// exp(-i theta sigma^z_site) = cos(theta) I - i sin(theta) sigma^z_site.
Operator local_perturbation(int site, double theta, int n_sites);

// Bulk site ceil(n/2).
int default_perturbation_site(int n_sites);

// Eigenvalues ascending, eigenvectors as orthonormal columns.
//
// Within a block of degenerate eigenvalues (|dE| <= kDegeneracyTol scaled by
// max(1, max|E|)) columns are ordered lexicographically by the absolute
// values of their components, and every column's largest-modulus component
// (first one on ties) is made real positive, so output is reproducible.
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;

    Eigen::Index dim() const { return eigenvalues.size(); }
    double spectral_range() const;
    double max_abs_eigenvalue() const;

    // Coefficients <v_n|psi>.
    Eigen::VectorXcd coefficients(const Eigen::VectorXcd& psi) const;
    // H psi evaluated spectrally.
    Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const;
    // exp(-i H t) psi.
    Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, double t) const;
    // exp(-i H t) as a dense matrix.
    Eigen::MatrixXcd propagator(double t) const;
    // V diag(lambda) V^dagger.
    Eigen::MatrixXcd reconstruct() const;

    // Half-open index ranges [first, last) of eigenvalues equal within `tol`
    // (chained over consecutive sorted values).
    std::vector<std::pair<Eigen::Index, Eigen::Index>> degenerate_groups(double tol) const;
};

inline constexpr double kDegeneracyTol = 1e-10;

SpectralDecomposition eigendecompose(const Operator& h);

}  // namespace tpm
