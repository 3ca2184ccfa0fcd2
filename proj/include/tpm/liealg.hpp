#pragma once

// Closed-form su(2) / su(1,1) engine. The u-evolution generator is the
// effective observable O_ef = A0 K0 + i A1 (K+ - K-) obtained by conjugating
// 2 alpha K0 with exp(-i f(tau) alpha (K+ + K-)); for these generators the
// Krylov chain of the lowest weight state is the weight basis itself.
//
// Weight-basis conventions:
//   su(2):   K0|j,-j+n> = (n-j)|.>,  K+|j,-j+n> = sqrt((n+1)(2j-n))|j,-j+n+1>
//   su(1,1): K0|h,n> = (h+n)|.>,     K+|h,n>    = sqrt((n+1)(2h+n))|h,n+1>
// with K- the transpose of K+. su(1,1) is truncated at `cutoff` levels.

#include "tpm/krylov.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tpm::lie {

enum class AlgebraKind { su2, su11 };
enum class Drive { linear, sine, constant };

std::string to_string(AlgebraKind k);
std::string to_string(Drive d);
AlgebraKind algebra_kind_from_string(std::string_view s);
Drive drive_from_string(std::string_view s);

inline constexpr int kMinCutoff = 32;
inline constexpr int kDefaultCutoff = 256;
inline constexpr int kMaxCutoff = 1024;
// Levels at the top of a truncated su(1,1) block excluded from checks.
inline constexpr int kBoundaryLevels = 2;

struct AlgebraModel {
    AlgebraKind kind = AlgebraKind::su11;
    double j = 0.5;            // su(2) spin, half-integer >= 1/2
    double bargmann_h = 0.25;  // su(1,1) Bargmann index
    double alpha = 0.3;
    Drive drive = Drive::linear;
    int cutoff = kDefaultCutoff;

    void validate() const;
    Eigen::Index dim() const;
    double sigma() const { return kind == AlgebraKind::su2 ? -1.0 : 1.0; }
    // f(tau): tau, sin(tau) or 1.
    double f(double tau) const;
};

struct Generators {
    Operator k0;
    Operator k_plus;
    Operator k_minus;
};

Generators generator_matrices(const AlgebraModel& model);

// Largest violation of [K-,K+] = 2 sigma K0 and [K0,K+-] = +-K+- over the
// leading `dim - excluded_top` rows and columns.
double commutator_residual(const Generators& gens, double sigma, int excluded_top);

struct EffectiveCoefficients {
    double A0 = 0.0;
    double A1 = 0.0;
};

EffectiveCoefficients effective_coefficients(const AlgebraModel& model, double tau);

struct EffectiveObservable {
    EffectiveCoefficients coeffs;
    Operator matrix;
};

EffectiveObservable effective_observable(const AlgebraModel& model, double tau);

// a_n = A0 (n - j), b_n = A1 sqrt(n (2j - n + 1))       (su2, n_max <= 2j)
// a_n = A0 (n + h), b_n = A1 sqrt(n (2h + n - 1))       (su11, n_max <= cutoff/2)
// for n = 0..n_max (a) and n = 1..n_max (b). b_n carries the sign of A1;
// the Lanczos recursion produces |b_n|.
LanczosCoefficients closed_form_lanczos(const AlgebraModel& model, double tau, int n_max);

// Disentangled form exp(C+ K+) exp(ln C0 K0) exp(C- K-) of exp(-i u O_ef).
struct CoherentParameters {
    cplx c_plus;
    cplx c_minus;
    cplx c_zero;        // C0 = g^-2
    cplx g;
    cplx theta;         // [(c0/2)^2 - c+ c-]^(1/2)
    cplx amplitude0;    // C0^(1/4) on the branch continuous from u = 0
};

CoherentParameters su11_coherent_parameters(const AlgebraModel& model, double tau, double u);

// phi_n(tau,u) = (i s)^-n C0^(1/4) C+^n sqrt(Gamma(n+1/2)/(n! sqrt(pi))) for
// n < cutoff, s = sign(A1). Requires su(1,1) with h = 1/4; throws
// NumericalError when |C+| >= 1.
ComplexityTrace su11_coherent_amplitudes(const AlgebraModel& model, double tau, std::span<const double> u_grid);

// C(tau,u) = |phi_1|^2 / (1 - |C+|^2)^(3/2).
std::vector<double> su11_spread_complexity_closed(const AlgebraModel& model, double tau,
                                                  std::span<const double> u_grid);

// Model used for the IPR study: H0 = K0, H1 = alpha (K+ + K-) + K0 and
// W = exp[i (K+ + K-)] on the h = 1/4 representation.
struct NormalOrderedForm {
    cplx a_plus;
    cplx a_zero;
    cplx a_minus;
    double residual = 0.0;  // reassembly error on the checked block
    int cutoff = 0;         // truncation used (0 for the two-dimensional route)
};

// Extracts A+, A0, A- by matching <h,0|.|h,0>, <h,1|.|h,0> and <h,0|.|h,1>
// of the truncated-representation matrix of W_tau, then checks the
// reassembled product on the leading `check_levels` levels. The cutoff
// doubles (up to kMaxCutoff) while that residual exceeds 1e-6.
NormalOrderedForm heisenberg_W_decomposition(double alpha, double tau, int cutoff = kDefaultCutoff,
                                             int check_levels = 16);

// Same decomposition read off the two-dimensional faithful representation
// K0 = sz/2, K+ = i s+, K- = i s-; exact for all tau.
NormalOrderedForm disentangle_w_tau(double alpha, double tau);

// G(u,tau) = B0(u,tau)^(1/4) from the disentangled form of
// W_tau^dagger exp(-i K0 u) W_tau, branch continuous from u = 0.
std::vector<cplx> acf_from_b_decomposition(double alpha, double tau, std::span<const double> u_grid);

// IPR of W_tau|h,0> in the K0 eigenbasis and b1 = sqrt(Var K0) in that state,
// summed in closed form from the two-dimensional representation.
std::vector<double> ipr_model(double alpha, std::span<const double> tau_grid);
std::vector<double> b1_model(double alpha, std::span<const double> tau_grid);

// Matrix of exp(x K+) exp(ln(a0) K0) exp(y K-) on the leading `levels` h=1/4
// states, with a0^(h+n) = a0_pow_h * a0^n (exact: the factors are triangular).
Eigen::MatrixXcd normal_ordered_matrix(cplx x, cplx a0_pow_h, cplx a0, cplx y, int levels, double h = 0.25);

}  // namespace tpm::lie
