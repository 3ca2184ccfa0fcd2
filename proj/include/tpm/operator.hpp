#pragma once

// Dense operators and normalized states on a finite Hilbert space.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace tpm {

using cplx = std::complex<double>;
inline constexpr cplx I_unit{0.0, 1.0};

// A documented contract of an operation was violated by its input
// (e.g. a non-Hermitian matrix handed to an eigensolver).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// An input failed a checked precondition; `residual` carries the measured
// violation when one is meaningful.
class PreconditionError : public std::domain_error {
public:
    PreconditionError(const std::string& what, double residual = 0.0)
        : std::domain_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// A numerical guarantee could not be met (truncation too small,
// normalization drift, coherent-state parameter out of range).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kNormTol = 1e-10;

// Square complex matrix plus the structural flags that were verified when
// it was built. Immutable after construction.
class Operator {
public:
    // No structural claims.
    static Operator general(Eigen::MatrixXcd m);
    // Verifies max|M - M^dagger| <= 1e-12 (relative to max(1, max|M|)),
    // then stores the exactly symmetrized matrix.
    static Operator hermitian(Eigen::MatrixXcd m);
    // Verifies max|M M^dagger - 1| <= 1e-10.
    static Operator unitary(Eigen::MatrixXcd m);
    // Both checks; used for Pauli strings.
    static Operator hermitian_unitary(Eigen::MatrixXcd m);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
    bool is_hermitian() const noexcept { return hermitian_; }
    bool is_unitary() const noexcept { return unitary_; }

    Operator adjoint() const;

private:
    Operator(Eigen::MatrixXcd m, bool herm, bool unit)
        : m_(std::move(m)), hermitian_(herm), unitary_(unit) {}

    Eigen::MatrixXcd m_;
    bool hermitian_ = false;
    bool unitary_ = false;
};

double hermiticity_defect(const Eigen::MatrixXcd& m);
double unitarity_defect(const Eigen::MatrixXcd& m);

// Normalized pure state. Construction rejects vectors whose norm differs
// from one by more than 1e-10; use `normalized` to rescale explicitly.
class StateVector {
public:
    explicit StateVector(Eigen::VectorXcd amplitudes);
    static StateVector normalized(const Eigen::VectorXcd& v);
    static StateVector basis_state(Eigen::Index dim, Eigen::Index index);

    Eigen::Index dim() const noexcept { return v_.size(); }
    const Eigen::VectorXcd& amplitudes() const noexcept { return v_; }

private:
    Eigen::VectorXcd v_;
};

}  // namespace tpm
