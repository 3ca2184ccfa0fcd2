#include "tpm/operator.hpp"

#include <cmath>
#include <sstream>

namespace tpm {

double hermiticity_defect(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_defect(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    return (m * m.adjoint() - id).cwiseAbs().maxCoeff();
}

namespace {

void require_square(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("Operator: matrix must be square and non-empty");
}

}  // namespace

Operator Operator::general(Eigen::MatrixXcd m) {
    require_square(m);
    return Operator(std::move(m), false, false);
}

Operator Operator::hermitian(Eigen::MatrixXcd m) {
    require_square(m);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double defect = hermiticity_defect(m);
    if (defect > kHermitianTol * scale) {
        std::ostringstream os;
        os << "Operator: matrix is not Hermitian (defect " << defect << ")";
        throw ContractError(os.str());
    }
    Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
    return Operator(std::move(sym), true, false);
}

Operator Operator::unitary(Eigen::MatrixXcd m) {
    require_square(m);
    const double defect = unitarity_defect(m);
    if (defect > kUnitaryTol) {
        std::ostringstream os;
        os << "Operator: matrix is not unitary (defect " << defect << ")";
        throw ContractError(os.str());
    }
    return Operator(std::move(m), false, true);
}

Operator Operator::hermitian_unitary(Eigen::MatrixXcd m) {
    Operator h = hermitian(std::move(m));
    const double defect = unitarity_defect(h.m_);
    if (defect > kUnitaryTol)
        throw ContractError("Operator: matrix is not unitary");
    h.unitary_ = true;
    return h;
}

Operator Operator::adjoint() const {
    return Operator(m_.adjoint(), hermitian_, unitary_);
}

StateVector::StateVector(Eigen::VectorXcd amplitudes) : v_(std::move(amplitudes)) {
    if (v_.size() == 0) throw std::invalid_argument("StateVector: empty amplitude array");
    const double n = v_.norm();
    if (std::abs(n - 1.0) > kNormTol) {
        std::ostringstream os;
        os << "StateVector: norm " << n << " differs from 1";
        throw PreconditionError(os.str(), std::abs(n - 1.0));
    }
}

StateVector StateVector::normalized(const Eigen::VectorXcd& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("StateVector: cannot normalize a zero vector");
    return StateVector(v / n);
}

StateVector StateVector::basis_state(Eigen::Index dim, Eigen::Index index) {
    if (dim <= 0 || index < 0 || index >= dim)
        throw std::invalid_argument("StateVector: basis index out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(index) = 1.0;
    return StateVector(std::move(v));
}

}  // namespace tpm
