#pragma once

// Lanczos tridiagonalization, Krylov amplitudes and spread complexity of
// the u-evolution, plus the moment route to the Lanczos coefficients.

#include "tpm/dynamics.hpp"

#include <functional>
#include <span>
#include <vector>

namespace tpm {

struct LanczosOptions {
    // 0 means "up to the Hilbert-space dimension".
    Eigen::Index max_dim = 0;
    // Stop once b_{n+1} <= threshold. Negative selects 1e-10 times an upper
    // bound of the spectral range (Gershgorin for dense operators, exact for
    // spectral decompositions).
    double termination_threshold = -1.0;
};

inline constexpr double kTerminationScale = 1e-10;
// A second Gram-Schmidt pass runs when any projection of the first one
// exceeds this fraction of the residual norm.
inline constexpr double kReorthogonalizationTrigger = 1e-10;

// Orthonormal Krylov vectors (columns of `basis`, basis.col(0) = psi0) with
// diagonal coefficients a_0..a_{K-1} and off-diagonal b_1..b_{K-1}, all
// b_n > termination_threshold. Basis phases make every b_n real positive.
struct KrylovDecomposition {
    Eigen::MatrixXcd basis;
    std::vector<double> a;
    std::vector<double> b;
    double termination_threshold = 0.0;

    Eigen::Index dim_krylov() const { return static_cast<Eigen::Index>(a.size()); }
};

struct LanczosCoefficients {
    std::vector<double> a;
    std::vector<double> b;
};

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

// Three-term recursion with full reorthogonalization at every step.
KrylovDecomposition lanczos(const Operator& h, const StateVector& psi0, LanczosOptions opts = {});
// Same recursion with H applied through its spectral decomposition.
KrylovDecomposition lanczos(const SpectralDecomposition& h, const StateVector& psi0,
                            LanczosOptions opts = {});
// Core routine; `apply` must realize a Hermitian map.
KrylovDecomposition lanczos(const LinearMap& apply, const StateVector& psi0, double threshold,
                            Eigen::Index max_dim);

double default_termination_threshold(const SpectralDecomposition& h);

// max |<K_m|K_n> - delta_mn|
double orthonormality_defect(const KrylovDecomposition& k);
// max_n || H K_n - (a_n K_n + b_{n+1} K_{n+1} + b_n K_{n-1}) ||; the last
// vector has no b_{n+1} term so its residual measures the truncation.
double tridiagonal_residual(const KrylovDecomposition& k, const Operator& h, bool include_last = false);

// phi: dim_krylov x grid amplitudes phi_n(u) = <K_n| exp(-i H0 u) |psi0>.
struct ComplexityTrace {
    std::vector<double> u_grid;
    Eigen::MatrixXcd phi;
    std::vector<double> complexity;  // sum_n n |phi_n|^2
    std::vector<double> survival;    // |phi_0|^2

    // max_u | sum_n |phi_n(u)|^2 - 1 |
    double max_norm_deviation() const;
};

// Fills complexity and survival from phi.
void finalize_trace(ComplexityTrace& trace);

// Spectral evolution followed by projection on the Krylov vectors.
ComplexityTrace amplitudes(const KrylovDecomposition& k, const SpectralDecomposition& h0,
                           const StateVector& psi0, std::span<const double> u_grid);

// Integrates i d/du phi_n = a_n phi_n + b_n phi_{n-1} + b_{n+1} phi_{n+1}
// from phi_n(0) = delta_n0 with an adaptive Dormand-Prince stepper
// (relative tolerance `rel_tol`, absolute tolerance rel_tol * 1e-3).
ComplexityTrace amplitudes_by_integration(const KrylovDecomposition& k, std::span<const double> u_grid,
                                          double rel_tol = 1e-9);

std::vector<double> spread_complexity(const ComplexityTrace& trace);

// Eigenspaces whose projection norm is at most this are treated as not
// reached by the state.
inline constexpr double kLevelWeightFloor = 1e-9;

// Krylov data of psi expressed on the distinct levels of H: each eigenspace
// (grouped with kDegeneracyTol) becomes one coordinate carrying the norm of
// the projection of psi, so rounding inside exactly degenerate blocks and
// unreached symmetry sectors cannot feed the recursion.
struct LevelKrylov {
    Eigen::VectorXd energies;
    Eigen::VectorXd weights;
    KrylovDecomposition krylov;
};

LevelKrylov level_lanczos(const SpectralDecomposition& h, const StateVector& psi);
ComplexityTrace level_amplitudes(const LevelKrylov& k, std::span<const double> u_grid);

// Derivatives of G(u) = sum_n p_n exp(-i E_n u) at u = 0:
// M_n = (-i)^n <E^n>, n = 0..count-1, from the spectral weights of psi.
std::vector<cplx> spectral_moments(const StateVector& psi, const SpectralDecomposition& h, int count);

inline constexpr int kMaxMomentPairs = 12;
inline constexpr double kMomentExhaustionTol = 1e-10;

// Moments M_0..M_2k -> (a_0..a_{k-1}, b_1..b_k) via the Chebyshev moment
// algorithm on centered, variance-scaled moments. A vanishing Hankel ratio
// (b_n^2 below 1e-10 of the variance) ends the sequence early: the output
// then holds n coefficients a and n-1 coefficients b.
LanczosCoefficients lanczos_from_moments(std::span<const cplx> moments);

struct ThermoIdentities {
    double a0_lanczos = 0.0;
    double b1_sq_lanczos = 0.0;
    double mean = 0.0;      // <E0,tau|H0|E0,tau>
    double variance = 0.0;  // <H0^2> - <H0>^2
    double a0_check = 0.0;  // |a0_lanczos - mean|
    double b1_check = 0.0;  // |b1_sq_lanczos - variance|
    double scale = 0.0;     // max |eigenvalue of H0|
};

ThermoIdentities thermo_identities(const TpmSetup& setup, double tau);

// Compares phi_n(u) from H0-evolution of W_tau|E0> with phi_n(u) from
// O_ef = W_tau^dagger H0 W_tau evolution of |E0>; returns max |difference|
// over n and u (a missing Krylov level counts as amplitude zero). Each route
// runs the level Lanczos recursion on its own spectral decomposition; O_ef
// is diagonalized independently, in long double.
double interpretation_equivalence(const TpmSetup& setup, double tau, std::span<const double> u_grid);

}  // namespace tpm
