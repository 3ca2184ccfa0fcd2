#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace tpm;
using tpm::testing::max_abs;

namespace {

const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();

SpectralDecomposition spectral(const Eigen::MatrixXcd& h) { return eigendecompose(Operator::hermitian(h)); }

TpmSetup identity_setup(Eigen::Index dim, std::mt19937& rng, Eigen::Index index) {
    TpmSetup s = tpm::testing::random_setup(dim, rng, index);
    return TpmSetup{s.initial, Operator::unitary(Eigen::MatrixXcd::Identity(dim, dim)), s.observable, s.evolution};
}

}  // namespace

TEST_CASE("heisenberg evolution trivial cases") {
    std::mt19937 rng(1);
    const TpmSetup s = tpm::testing::random_setup(5, rng);
    CHECK(max_abs(heisenberg_evolve(s.perturbation, s.evolution, 0.0).matrix() - s.perturbation.matrix()) < 1e-13);

    const Operator w = local_perturbation(1, 0.7, 1);
    const SpectralDecomposition h1 = spectral(sz);
    for (double tau : {0.3, 2.0, 17.0})
        CHECK(max_abs(heisenberg_evolve(w, h1, tau).matrix() - w.matrix()) < 1e-14);

    CHECK_THROWS_AS(heisenberg_evolve(w, s.evolution, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(heisenberg_evolve(Operator::general(2.0 * Eigen::MatrixXcd::Identity(5, 5)), s.evolution, 1.0),
                    ContractError);
}

TEST_CASE("heisenberg evolution matches the series exponential") {
    std::mt19937 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXcd h1 = tpm::testing::random_hermitian(4, rng);
        const Eigen::MatrixXcd w = tpm::testing::random_unitary(4, rng);
        for (double tau : {0.05, 0.4, 1.5}) {
            const Eigen::MatrixXcd u = tpm::testing::taylor_expm(-I_unit * tau * h1);
            const Eigen::MatrixXcd expected = u * w * u.adjoint();
            const Operator got = heisenberg_evolve(Operator::unitary(w), spectral(h1), tau);
            CHECK(max_abs(got.matrix() - expected) < 1e-9);
            CHECK(got.is_unitary());
            CHECK(unitarity_defect(got.matrix()) <= 1e-9);
        }
    }
}

TEST_CASE("u evolution") {
    const SpectralDecomposition x = spectral(sx);
    const StateVector zero = StateVector::basis_state(2, 0);
    const StateVector out = u_evolve(zero, x, std::numbers::pi / 2);
    CHECK(std::abs(out.amplitudes()(0)) < 1e-15);
    CHECK(std::abs(out.amplitudes()(1) - cplx(0, -1)) < 1e-15);
    CHECK(max_abs(u_evolve(zero, x, 0.0).amplitudes() - zero.amplitudes()) < 1e-15);

    std::mt19937 rng(4);
    const SpectralDecomposition h = spectral(tpm::testing::random_hermitian(9, rng));
    const StateVector e(h.eigenvectors.col(3));
    const double lambda = h.eigenvalues(3);
    for (double u : {0.5, 3.0, 40.0}) {
        CHECK(max_abs(u_evolve(e, h, u).amplitudes() - std::exp(-I_unit * lambda * u) * e.amplitudes()) < 1e-12);
        const StateVector r = u_evolve(tpm::testing::random_state(9, rng), h, u);
        CHECK(std::abs(r.amplitudes().norm() - 1.0) < 1e-10);
    }
    CHECK_THROWS_AS(u_evolve(zero, h, 1.0), std::invalid_argument);
}

TEST_CASE("characteristic function trivial cases") {
    std::mt19937 rng(6);
    const TpmSetup s = identity_setup(6, rng, 2);
    const std::vector<double> grid{0.0, 0.5, 1.0, 7.0};
    const CFTrace cf = characteristic_function(s, 1.3, grid);
    CHECK(cf.phase_convention == PhaseConvention::raw_acf);
    CHECK(cf.tau == 1.3);
    const double e0 = s.observable.eigenvalues(2);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(cf.values[k] - std::exp(-I_unit * e0 * grid[k])) < 1e-12);
        CHECK(std::abs(std::abs(cf.values[k]) - 1.0) < 1e-12);
    }

    const TpmSetup r = tpm::testing::random_setup(6, rng, 1);
    const CFTrace g = characteristic_function(r, 0.8, grid);
    CHECK(std::abs(g.values[0] - 1.0) < 1e-10);
    for (const cplx& v : g.values) CHECK(std::abs(v) <= 1.0 + 1e-10);
}

TEST_CASE("characteristic function equals the outcome enumeration on a two-site chain") {
    const SpectralDecomposition h0 = eigendecompose(ising_hamiltonian({2, 1.0, 0.4, 0.0, Boundary::open}));
    const SpectralDecomposition h1 = eigendecompose(ising_hamiltonian({2, 1.0, 0.7, 0.2, Boundary::open}));
    const Operator w = local_perturbation(1, std::numbers::pi / 2, 2);
    const TpmSetup s{StateVector(h0.eigenvectors.col(1)), w, h0, h1};
    const double tau = 0.9;

    // P(E_m) = |<E_m| W_tau |E_0>|^2 for every outcome m, with W_tau from the series exponential
    const Eigen::MatrixXcd h1m = ising_hamiltonian({2, 1.0, 0.7, 0.2, Boundary::open}).matrix();
    const Eigen::MatrixXcd u = tpm::testing::taylor_expm(-I_unit * tau * h1m);
    const Eigen::VectorXcd moved = u * w.matrix() * u.adjoint() * h0.eigenvectors.col(1);

    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(0.25 * k);
    const CFTrace cf = characteristic_function(s, tau, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        cplx expected = 0.0;
        for (Eigen::Index m = 0; m < 4; ++m)
            expected += std::norm(h0.eigenvectors.col(m).dot(moved)) * std::exp(-I_unit * grid[k] * h0.eigenvalues(m));
        CHECK(std::abs(cf.values[k] - expected) < 1e-10);
    }
}

TEST_CASE("non-eigenstate initial state is rejected with its residual") {
    std::mt19937 rng(8);
    TpmSetup s = tpm::testing::random_setup(5, rng);
    const TpmSetup bad{tpm::testing::random_state(5, rng), s.perturbation, s.observable, s.evolution};
    const std::vector<double> grid{0.0, 1.0};
    CHECK_THROWS_AS(characteristic_function(bad, 1.0, grid), PreconditionError);
    try {
        characteristic_function(bad, 1.0, grid);
    } catch (const PreconditionError& e) {
        CHECK(e.residual() > 1e-3);
    }
    CHECK_THROWS_AS(fotoc_long_u_average(bad, 1.0), PreconditionError);
    CHECK(eigenstate_residual(s.initial, s.observable) < 1e-12);
}

TEST_CASE("four-point OTOC equals the phase-shifted characteristic function") {
    std::mt19937 rng(9);
    const TpmSetup s = tpm::testing::random_setup(8, rng, 5);
    const double o0 = s.observable.eigenvalues(5);
    CHECK(std::abs(otoc_four_point(s, 0.7, 0.0) - 1.0) < 1e-12);
    for (double u : {0.1, 1.0, 4.5}) {
        const double tau = 0.3 * u;
        const std::vector<double> grid{u};
        const cplx cf = characteristic_function(s, tau, grid).values[0];
        CHECK(std::abs(otoc_four_point(s, tau, u) - std::exp(I_unit * u * o0) * cf) < 1e-10);
    }

    const TpmSetup id = identity_setup(8, rng, 3);
    for (double u : {0.2, 3.0}) CHECK(std::abs(otoc_four_point(id, 1.0, u) - 1.0) < 1e-12);
}

TEST_CASE("FOTOC is the squared modulus of the characteristic function") {
    std::mt19937 rng(10);
    const TpmSetup s = tpm::testing::random_setup(7, rng, 3);
    std::vector<double> grid;
    for (int k = 0; k < 50; ++k) grid.push_back(0.2 * k);
    const std::vector<double> f = fotoc(s, 2.0, grid);
    const CFTrace cf = characteristic_function(s, 2.0, grid);
    CHECK(f[0] == doctest::Approx(1.0));
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(f[k] - std::norm(cf.values[k])) <= 1e-12);

    const TpmSetup id = identity_setup(7, rng, 0);
    for (double v : fotoc(id, 2.0, grid)) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("long-u FOTOC average closed form") {
    std::mt19937 rng(12);
    CHECK(fotoc_long_u_average(identity_setup(6, rng, 2), 3.0) == doctest::Approx(1.0));

    // H0 = sz, |E0> = |0>, W a Hadamard gate, H1 = 0: equal weights 1/2
    const Eigen::MatrixXcd had = (sx + sz) / std::sqrt(2.0);
    const TpmSetup two{StateVector::basis_state(2, 1), Operator::unitary(had), spectral(sz),
                       spectral(Eigen::MatrixXcd::Zero(2, 2))};
    CHECK(fotoc_long_u_average(two, 4.0) == doctest::Approx(0.5));
}

TEST_CASE("long-u FOTOC average against quadrature on nondegenerate spectra") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 3; ++trial) {
        const TpmSetup s = tpm::testing::random_setup(6, rng, 2);
        const double tau = 0.5 + trial;
        const Eigen::VectorXd& e = s.observable.eigenvalues;
        const double spacing = (e(e.size() - 1) - e(0)) / static_cast<double>(e.size() - 1);
        const double big_u = 2000.0 / spacing;
        const double step = 0.02 / (e(e.size() - 1) - e(0));
        const int n = static_cast<int>(std::ceil(big_u / step));
        std::vector<double> grid(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) grid[static_cast<std::size_t>(k)] = big_u * k / n;
        const std::vector<double> f = fotoc(s, tau, grid);
        double integral = 0.0;
        for (int k = 0; k < n; ++k) integral += 0.5 * (f[k] + f[k + 1]) * (grid[k + 1] - grid[k]);
        CHECK(std::abs(integral / big_u - fotoc_long_u_average(s, tau)) < 2e-3);
    }
}

TEST_CASE("inverse participation ratio") {
    std::mt19937 rng(14);
    const SpectralDecomposition h = spectral(tpm::testing::random_hermitian(8, rng));
    CHECK(ipr(StateVector(h.eigenvectors.col(4)), h) == doctest::Approx(1.0));

    const SpectralDecomposition diag = spectral(Eigen::MatrixXcd(Eigen::VectorXd::LinSpaced(8, 0.0, 7.0).cast<cplx>().asDiagonal()));
    const StateVector uniform = StateVector::normalized(Eigen::VectorXcd::Ones(8));
    CHECK(ipr(uniform, diag) == doctest::Approx(1.0 / 8.0));

    for (int trial = 0; trial < 5; ++trial) {
        const StateVector psi = tpm::testing::random_state(8, rng);
        const double p = ipr(psi, h);
        CHECK(p >= 1.0 / 8.0 - 1e-15);
        CHECK(p <= 1.0 + 1e-15);
        double direct = 0.0;
        for (Eigen::Index k = 0; k < 8; ++k) direct += std::pow(std::norm(h.eigenvectors.col(k).dot(psi.amplitudes())), 2);
        CHECK(std::abs(p - direct) < 1e-14);
    }
    CHECK_THROWS_AS(ipr(StateVector::basis_state(3, 0), h), std::invalid_argument);
}

TEST_CASE("IPR of the perturbed state equals the long-u FOTOC average") {
    std::mt19937 rng(15);
    for (int trial = 0; trial < 5; ++trial) {
        const TpmSetup s = tpm::testing::random_setup(10, rng, 4);
        CHECK(std::abs(ipr(perturbed_state(s, 1.7), s.observable) - fotoc_long_u_average(s, 1.7)) < 1e-10);
    }
}

TEST_CASE("degenerate levels are pooled in the IPR") {
    // Two degenerate levels: any basis inside the block gives the same pooled weight
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
    h.diagonal() << 1.0, 1.0, 2.0;
    const SpectralDecomposition d = spectral(h);
    const StateVector psi = StateVector::normalized((Eigen::VectorXcd(3) << 1.0, 1.0, 0.0).finished());
    CHECK(ipr(psi, d) == doctest::Approx(1.0));
    const std::vector<double> w = eigenspace_weights(psi, d);
    REQUIRE(w.size() == 2);
    CHECK(w[0] == doctest::Approx(1.0));
}

TEST_CASE("perturbed state uses the Heisenberg operator") {
    std::mt19937 rng(16);
    const TpmSetup s = tpm::testing::random_setup(6, rng, 1);
    const Eigen::VectorXcd expected = heisenberg_evolve(s.perturbation, s.evolution, 2.5).matrix() * s.initial.amplitudes();
    CHECK(max_abs(perturbed_state(s, 2.5).amplitudes() - expected) < 1e-12);
}
