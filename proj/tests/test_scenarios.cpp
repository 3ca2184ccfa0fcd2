#include "tpm/scenarios.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <numbers>
#include <sstream>

using namespace tpm;
using nlohmann::json;

namespace {

const std::filesystem::path scratch = TPM_SCRATCH_DIR;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> violations_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

ScenarioConfig small_chain(const std::string& dir) {
    ScenarioConfig cfg = preset("case3");
    cfg.chain.n_sites = 6;
    cfg.tau_list = {0.5, 5.0};
    cfg.u_max = 10.0;
    cfg.u_steps = 101;
    cfg.output_dir = scratch / dir;
    return cfg;
}

// C(u) from a Householder tridiagonalization of diag(E) seen from the
// pooled weight vector: reflect w onto e0, tridiagonalize keeping e0 fixed.
std::vector<double> householder_complexity(const Eigen::VectorXd& e, const Eigen::VectorXd& w,
                                           const std::vector<double>& grid) {
    const Eigen::Index d = e.size();
    Eigen::VectorXd v = w;
    v(0) += (w(0) >= 0 ? 1.0 : -1.0) * w.norm();
    const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d) - 2.0 * v * v.transpose() / v.squaredNorm();
    const Eigen::MatrixXd m = p * e.asDiagonal() * p;
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(m);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(d, d);
    t.diagonal() = tri.diagonal();
    t.diagonal(1) = tri.subDiagonal();
    t.diagonal(-1) = tri.subDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    std::vector<double> out;
    for (double u : grid) {
        const Eigen::VectorXcd phase = (-I_unit * u * es.eigenvalues().cast<cplx>()).array().exp();
        const Eigen::VectorXcd phi =
            es.eigenvectors().cast<cplx>() * phase.cwiseProduct(es.eigenvectors().row(0).transpose().cast<cplx>());
        double c = 0.0;
        for (Eigen::Index n = 0; n < d; ++n) c += static_cast<double>(n) * std::norm(phi(n));
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
    const ScenarioConfig cfg = parse_config(R"({"scenario": "spin_chain"})");
    CHECK(cfg.scenario == ScenarioKind::spin_chain);
    CHECK(cfg.chain.n_sites == 10);
    CHECK(cfg.resolved_w_site() == 5);
    CHECK(cfg.resolved_eigenstate_index() == 512);
    CHECK(cfg.u_grid().size() == 2000);
    CHECK(cfg.u_grid().back() == 50.0);
}

TEST_CASE("config fields are read") {
    const ScenarioConfig cfg = parse_config(R"({
        "scenario": "spin_chain",
        "chain": {"n_sites": 7, "boundary": "open", "J0": 0.5, "h1": 2.0},
        "w_site": 2, "theta": 0.3, "eigenstate_index": 3,
        "tau_list": [1, 2.5], "u_max": 4, "u_steps": 5, "output_dir": "x", "phi_columns": 2})");
    CHECK(cfg.chain.n_sites == 7);
    CHECK(cfg.chain.boundary == Boundary::open);
    CHECK(cfg.chain.J0 == 0.5);
    CHECK(cfg.chain.h1 == 2.0);
    CHECK(cfg.resolved_w_site() == 2);
    CHECK(cfg.theta == 0.3);
    CHECK(cfg.resolved_eigenstate_index() == 3);
    CHECK(cfg.tau_list == std::vector<double>{1.0, 2.5});
    CHECK(cfg.u_grid() == std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(cfg.output_dir == "x");
    CHECK(cfg.phi_columns == 2);

    const ScenarioConfig mid = parse_config(R"({"scenario": "spin_chain", "eigenstate_index": "mid"})");
    CHECK(!mid.eigenstate_index);

    const ScenarioConfig lie = parse_config(
        R"({"scenario": "lie_su2", "algebra": {"kind": "su2", "j": 2.5, "alpha": 0.7, "drive": "sin"}})");
    CHECK(lie.algebra.kind == lie::AlgebraKind::su2);
    CHECK(lie.algebra.j == 2.5);
    CHECK(lie.algebra.drive == lie::Drive::sine);
}

TEST_CASE("every violation is reported at once") {
    const auto v = violations_of(R"({
        "scenario": "spin_chain", "colour": "blue", "u_steps": 1.5, "theta": "big",
        "chain": {"n_sites": 6, "boundary": "twisted", "spin": 1}})");
    CHECK(v.size() == 5);
    CHECK(mentions(v, "colour: unknown key"));
    CHECK(mentions(v, "u_steps: expected integer"));
    CHECK(mentions(v, "theta: expected number"));
    CHECK(mentions(v, "chain.boundary"));
    CHECK(mentions(v, "chain.spin: unknown key"));

    const auto w = violations_of(R"({"scenario": "spin_chain", "tau_list": [2, 1], "u_max": -1, "u_steps": 1,
                                     "chain": {"n_sites": 6}, "w_site": 9, "eigenstate_index": 64})");
    CHECK(mentions(w, "tau_list"));
    CHECK(mentions(w, "u_max"));
    CHECK(mentions(w, "u_steps"));
    CHECK(mentions(w, "w_site"));
    CHECK(mentions(w, "eigenstate_index"));

    CHECK(mentions(violations_of(R"({"chain": {}})"), "scenario: required"));
    CHECK(mentions(violations_of(R"({"scenario": "spin_chain", "chain": {"n_sites": 40}})"), "chain"));
    CHECK(mentions(violations_of("{not json"), "malformed JSON"));
    CHECK(mentions(violations_of("[1, 2]"), "JSON object"));
    CHECK(mentions(violations_of(R"({"scenario": "lie_su11", "algebra": {"kind": "su2"}})"), "algebra.kind"));
    CHECK(mentions(violations_of(R"({"scenario": "lie_su11", "algebra": {"alpha_list": [0.3]}})"), "alpha_list"));
    CHECK(mentions(violations_of(R"({"scenario": "quantum"})"), "scenario"));

    CHECK_THROWS_AS(load_config(scratch / "does-not-exist.json"), ConfigError);
}

TEST_CASE("presets") {
    for (const auto& name : preset_names()) {
        const ScenarioConfig cfg = preset(name);
        CHECK_NOTHROW(cfg.validate());
        CHECK(cfg.preset == name);
        CHECK(cfg.output_dir == std::filesystem::path("out") / name);
        // the JSON form reads back to the same configuration
        CHECK(config_to_json(parse_config(config_to_json(cfg))) == config_to_json(cfg));
    }
    const ScenarioConfig c1 = preset("case1");
    CHECK(c1.chain.h0 == 0.4);
    CHECK(c1.chain.h1 == 0.7);
    CHECK(c1.chain.g1 == 0.0);
    const ScenarioConfig c2 = preset("case2");
    CHECK(c2.chain.h1 == 1.4);
    CHECK(c2.chain.g1 == -0.6);
    const ScenarioConfig c3 = preset("case3");
    CHECK(c3.chain.J0 == 0.8);
    CHECK(c3.chain.h0 == 1.2);
    CHECK(c3.chain.g0 == -0.6);
    CHECK(c3.tau_list == std::vector<double>{0.1, 1.0, 5.0, 20.0, 100.0, 500.0});
    const ScenarioConfig ipr = preset("ipr-study");
    CHECK(ipr.resolved_alphas() == std::vector<double>{0.3, 0.7});
    CHECK(ipr.tau_list.size() == 201);
    CHECK(ipr.tau_list.back() == doctest::Approx(20.0));
    CHECK_THROWS_AS(preset("case4"), std::invalid_argument);
}

TEST_CASE("number formatting") {
    CHECK(format_double(1.0) == "1.0000000000000000e+00");
    CHECK(format_double(-0.1) == "-1.0000000000000001e-01");
    CHECK(format_label(0.1) == "0.1");
    CHECK(format_label(500.0) == "500");
    CHECK(format_label(0.30000000000000004) == "0.30000000000000004");
}

TEST_CASE("saturation statistics") {
    const std::vector<double> flat(100, 3.0);
    const SaturationStats f = saturation_stats(flat, 0.25);
    CHECK(f.mean == 3.0);
    CHECK(f.stddev == 0.0);
    CHECK(f.rel_fluct == 0.0);

    // sin^2 over whole periods: mean 1/2, std 1/(2 sqrt 2)
    std::vector<double> s;
    for (int k = 0; k < 4000; ++k) s.push_back(std::pow(std::sin(2 * std::numbers::pi * k / 1000.0), 2));
    const SaturationStats p = saturation_stats(s, 0.5);
    CHECK(p.mean == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p.rel_fluct == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));

    const std::vector<double> zero(10, 0.0);
    CHECK(std::isinf(saturation_stats(zero, 0.25).rel_fluct));
    CHECK_THROWS_AS(saturation_stats(flat, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(saturation_stats(flat, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(saturation_stats(std::vector<double>{}, 0.25), std::invalid_argument);
}

TEST_CASE("growth classification") {
    std::vector<double> tau, flat, expo, linear;
    for (int k = 0; k <= 200; ++k) {
        tau.push_back(0.1 * k);
        flat.push_back(2.0 + 0.3 * std::cos(7.0 * tau.back()));
        expo.push_back(std::exp(1.5 * tau.back()));
        linear.push_back(1.0 + tau.back());
    }
    CHECK(classify_growth(tau, flat).regime == GrowthRegime::bounded);
    const RegimeAssessment e = classify_growth(tau, expo);
    CHECK(e.regime == GrowthRegime::exponential);
    CHECK(e.log_fit.slope == doctest::Approx(1.5));
    CHECK(e.spearman == doctest::Approx(1.0));
    // monotone growth is never bounded
    CHECK(classify_growth(tau, linear).regime != GrowthRegime::bounded);
    CHECK(to_string(GrowthRegime::unclassified) == "unclassified");
}

TEST_CASE("chain evolution matches the full-space pipeline") {
    const ScenarioConfig cfg = small_chain("unused");
    const ChainSystem sys = build_chain_system(cfg);
    CHECK(sys.w_site == 3);
    CHECK(sys.eigenstate_index == 32);
    const std::vector<double> grid = cfg.u_grid();
    for (double tau : cfg.tau_list) {
        const TauResult r = evolve_chain(sys, tau, grid);
        const StateVector psi = perturbed_state(sys.setup, tau);
        const SpectralDecomposition& h0 = sys.setup.observable;
        const Eigen::VectorXcd c = h0.eigenvectors.adjoint() * psi.amplitudes();
        std::vector<double> energies, weights;
        for (Eigen::Index k = 0; k < h0.dim(); ++k) {
            if (k > 0 && h0.eigenvalues(k) - h0.eigenvalues(k - 1) < 1e-9) {
                weights.back() = std::hypot(weights.back(), std::abs(c(k)));
            } else {
                energies.push_back(h0.eigenvalues(k));
                weights.push_back(std::abs(c(k)));
            }
        }
        const auto levels = static_cast<Eigen::Index>(energies.size());
        const std::vector<double> ref = householder_complexity(Eigen::Map<Eigen::VectorXd>(energies.data(), levels),
                                                               Eigen::Map<Eigen::VectorXd>(weights.data(), levels), grid);
        const CFTrace cf = characteristic_function(sys.setup, tau, grid);
        CHECK(r.summary.krylov_dim < levels);
        CHECK(r.summary.max_norm_deviation < 1e-10);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            CHECK(std::abs(r.trace.phi(0, static_cast<Eigen::Index>(g)) - cf.values[g]) < 1e-10);
            CHECK(std::abs(r.trace.complexity[g] - ref[g]) < 1e-8);
        }
        CHECK(r.summary.thermo.a0_check < 1e-10 * r.summary.thermo.scale);
        CHECK(r.summary.ipr.value() == doctest::Approx(ipr(psi, sys.setup.observable)));
        CHECK(r.summary.fotoc_long_u_average.value() == doctest::Approx(*r.summary.ipr));
    }
}

TEST_CASE("algebra evolution matches the closed forms") {
    lie::AlgebraModel su2;
    su2.kind = lie::AlgebraKind::su2;
    su2.j = 4.0;
    su2.alpha = 0.7;
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(0.05 * k);
    const TauResult a = evolve_algebra(su2, 1.0, grid);
    CHECK(a.summary.krylov_dim == 9);
    CHECK(a.summary.closed_form_deviation.value() < 1e-10);

    lie::AlgebraModel su11;
    su11.alpha = 0.3;
    const TauResult b = evolve_algebra(su11, 1.0, grid);
    CHECK(b.summary.closed_form_deviation.value() < 1e-6);
    CHECK(b.summary.thermo.a0_check < 1e-10);
}

TEST_CASE("spin chain run writes deterministic files") {
    const ScenarioConfig cfg = small_chain("chain_a");
    std::filesystem::remove_all(cfg.output_dir);
    const RunReport r = run(cfg);
    CHECK(r.files.size() == 6);
    CHECK(r.taus.size() == 2);

    const auto trace = lines(cfg.output_dir / "complexity_tau=0.5.csv");
    REQUIRE(trace.size() == 103);
    CHECK(trace[0].rfind("# scenario=spin_chain n_sites=6", 0) == 0);
    CHECK(trace[0].find("tau=0.5") != std::string::npos);
    CHECK(trace[1].rfind("u,C,survival,re_phi0,im_phi0,re_phi1,im_phi1", 0) == 0);
    CHECK(trace[2].rfind("0.0000000000000000e+00,", 0) == 0);

    const auto lz = lines(cfg.output_dir / "lanczos_tau=5.csv");
    CHECK(lz[1] == "n,a_n,b_n");
    CHECK(static_cast<Eigen::Index>(lz.size()) == r.taus[1].krylov_dim + 2);
    CHECK(lz[2].find(",0.0000000000000000e+00") != std::string::npos);

    const json summary = json::parse(slurp(cfg.output_dir / "summary.json"));
    CHECK(summary["scenario"] == "spin_chain");
    CHECK(summary["taus"].size() == 2);
    CHECK(summary["taus"][0]["krylov_dim"].get<Eigen::Index>() == r.taus[0].krylov_dim);
    const json manifest = json::parse(slurp(cfg.output_dir / "manifest.json"));
    CHECK(manifest["code_version"] == kCodeVersion);
    CHECK(manifest["n_sites"] == 6);
    CHECK(manifest["w_site"] == 3);
    CHECK(manifest["float_format"] == "%.16e");

    ScenarioConfig again = cfg;
    again.output_dir = scratch / "chain_b";
    std::filesystem::remove_all(again.output_dir);
    run(again);
    for (const char* f : {"complexity_tau=0.5.csv", "complexity_tau=5.csv", "lanczos_tau=0.5.csv",
                          "lanczos_tau=5.csv", "summary.json"})
        CHECK(slurp(cfg.output_dir / f) == slurp(again.output_dir / f));
}

TEST_CASE("ipr study run") {
    ScenarioConfig cfg = preset("ipr-study");
    cfg.output_dir = scratch / "ipr";
    const RunReport r = run(cfg);
    REQUIRE(r.ipr_series.size() == 2);
    const auto csv = lines(cfg.output_dir / "ipr_alpha=0.3.csv");
    CHECK(csv.size() == 203);
    CHECK(csv[1] == "tau,ipr,inv_ipr,b1");
    const json summary = json::parse(slurp(cfg.output_dir / "summary.json"));
    CHECK(summary["ipr_study"][0]["inv_ipr"]["regime"] == "bounded");
    CHECK(summary["ipr_study"][0]["b1"]["regime"] == "bounded");
    CHECK(summary["ipr_study"][1]["inv_ipr"]["regime"] == "exponential");
    CHECK(summary["ipr_study"][1]["b1"]["regime"] == "exponential");
}

TEST_CASE("invalid configs do not run") {
    ScenarioConfig cfg = small_chain("never");
    cfg.u_steps = 0;
    CHECK_THROWS_AS(run(cfg), ConfigError);
    CHECK(!std::filesystem::exists(cfg.output_dir));
}
