#pragma once

// Spectrally exact evolutions for the two-point measurement protocol:
// Heisenberg-picture perturbations, the characteristic function of the
// observable change, the four-point OTOC, FOTOC and IPR.

#include "tpm/hilbert.hpp"

#include <span>
#include <vector>

namespace tpm {

// Inputs shared by every protocol quantity. The observable O is measured
// twice (here always the pre-quench Hamiltonian H0); the perturbation W is
// sandwiched between forward and backward evolution by H1.
struct TpmSetup {
    StateVector initial;              // eigenstate |O_0> of the observable
    Operator perturbation;            // unitary W
    SpectralDecomposition observable; // O = H0
    SpectralDecomposition evolution;  // H1
};

enum class PhaseConvention { raw_acf, shifted };

struct CFTrace {
    double tau = 0.0;
    std::vector<double> u_grid;
    std::vector<cplx> values;
    PhaseConvention phase_convention = PhaseConvention::raw_acf;
};

// W_tau = exp(-i H1 tau) W exp(+i H1 tau).
Operator heisenberg_evolve(const Operator& w, const SpectralDecomposition& h1, double tau);

// exp(-i H0 u) |psi>.
StateVector u_evolve(const StateVector& psi, const SpectralDecomposition& h0, double u);

// ||H|psi> - <H>|psi>||; throws PreconditionError above `tol`.
double eigenstate_residual(const StateVector& psi, const SpectralDecomposition& h);
void require_eigenstate(const StateVector& psi, const SpectralDecomposition& h, double tol = 1e-8);

// |O_0, tau> = W_tau |O_0>, built with matrix-vector products only.
StateVector perturbed_state(const TpmSetup& setup, double tau);

// G(u, tau) = <O_0,tau| exp(-i O u) |O_0,tau>, without the exp(i u O_0)
// prefactor (raw ACF convention).
CFTrace characteristic_function(const TpmSetup& setup, double tau, std::span<const double> u_grid);

// <O_0| W_tau^dagger V^dagger W_tau V |O_0> with V = exp(i u O), evaluated
// with explicit matrices for W_tau and V.
cplx otoc_four_point(const TpmSetup& setup, double tau, double u);

// |G(u, tau)|^2: survival probability of |O_0,tau> under O.
std::vector<double> fotoc(const TpmSetup& setup, double tau, std::span<const double> u_grid);

// Long-u average of the FOTOC, sum over distinct eigenvalues of the squared
// transition probability into that eigenspace.
double fotoc_long_u_average(const TpmSetup& setup, double tau);

// Inverse participation ratio of psi in the eigenbasis of `basis`. Weights
// of exactly degenerate eigenvalues (within kDegeneracyTol) are pooled, i.e.
// the eigenbasis inside a degenerate block is the one aligned with psi.
// On a nondegenerate spectrum this is sum_n |<v_n|psi>|^4.
double ipr(const StateVector& psi, const SpectralDecomposition& basis);

// Probability |<v_n|psi>|^2 pooled over degenerate eigenvalue groups.
std::vector<double> eigenspace_weights(const StateVector& psi, const SpectralDecomposition& basis);

}  // namespace tpm
