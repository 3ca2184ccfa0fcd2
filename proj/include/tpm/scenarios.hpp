#pragma once

// Experiment runner: scenario configuration, presets, per-tau sweeps and
// CSV/JSON persistence.
//
// Output files (all floats "%.16e"):
//   complexity_tau=<tau>.csv  u,C,survival,re_phi0,im_phi0,...
//   lanczos_tau=<tau>.csv     n,a_n,b_n        (b_0 written as 0)
//   ipr_alpha=<alpha>.csv     tau,ipr,inv_ipr,b1   (ipr_study only)
//   summary.json, manifest.json
// Every CSV starts with one '#' line listing the parameters it was built with.

#include "tpm/fit.hpp"
#include "tpm/krylov.hpp"
#include "tpm/liealg.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tpm {

inline constexpr const char* kCodeVersion = "1.0.0";
inline constexpr double kNormalizationTol = 1e-6;
inline constexpr double kSaturationWindow = 0.25;
inline constexpr double kEarlyGrowthWindow = 0.10;

enum class ScenarioKind { spin_chain, lie_su2, lie_su11, ipr_study };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(std::string_view s);

// Invalid configuration; what() joins every violation found.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Pre-quench H0 = H(J0,h0,g0), post-quench H1 = H(J1,h1,g1).
struct ChainParams {
    int n_sites = 10;
    Boundary boundary = Boundary::periodic;
    double J0 = 1.0, h0 = 0.4, g0 = 0.0;
    double J1 = 1.0, h1 = 0.7, g1 = 0.0;

    SpinChainSpec pre() const { return {n_sites, J0, h0, g0, boundary}; }
    SpinChainSpec post() const { return {n_sites, J1, h1, g1, boundary}; }
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::spin_chain;
    std::string preset;                     // label only, empty for hand-written configs
    ChainParams chain;
    std::optional<int> w_site;              // default ceil(n_sites/2)
    double theta = 1.5707963267948966;
    std::optional<Eigen::Index> eigenstate_index;  // default "mid" = dim/2
    std::vector<double> tau_list{0.1, 1.0, 5.0, 20.0, 100.0, 500.0};
    double u_max = 50.0;
    int u_steps = 2000;
    lie::AlgebraModel algebra;
    std::vector<double> alpha_list;         // ipr_study; empty means {algebra.alpha}
    std::filesystem::path output_dir = "out";
    int phi_columns = 8;

    std::vector<std::string> violations() const;
    void validate() const;  // throws ConfigError

    int resolved_w_site() const;
    Eigen::Index resolved_eigenstate_index() const;
    std::vector<double> resolved_alphas() const;
    // u_steps points from 0 to u_max inclusive.
    std::vector<double> u_grid() const;
};

// JSON with the ScenarioConfig field names; unknown keys, type errors and
// invalid values are all reported in one ConfigError.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ScenarioConfig& cfg);

// case1, case2, case3, lie-su11, ipr-study.
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

struct SaturationStats {
    double mean = 0.0;
    double stddev = 0.0;
    double rel_fluct = 0.0;  // +inf when the mean vanishes
};

// Statistics of the final `window_fraction` (in (0, 0.5]) of the samples.
SaturationStats saturation_stats(std::span<const double> values, double window_fraction);
SaturationStats saturation_stats(const ComplexityTrace& trace, double window_fraction);

// Linear fit of C(u) over the first `fraction` of the grid.
LinearFit early_growth_fit(const ComplexityTrace& trace, double fraction);

struct TauSummary {
    double tau = 0.0;
    Eigen::Index krylov_dim = 0;
    double max_norm_deviation = 0.0;
    std::optional<double> fotoc_long_u_average;
    std::optional<double> ipr;
    ThermoIdentities thermo;
    SaturationStats saturation;
    LinearFit early_growth;
    std::optional<double> closed_form_deviation;  // Lie scenarios: max |C_numeric - C_closed|
};

struct TauResult {
    KrylovDecomposition krylov;
    ComplexityTrace trace;
    TauSummary summary;
};

struct ChainSystem {
    SpinChainSpec pre;
    SpinChainSpec post;
    int w_site = 1;
    Eigen::Index eigenstate_index = 0;
    TpmSetup setup;
};

ChainSystem build_chain_system(const ScenarioConfig& cfg);

// Lanczos on H0 from W_tau|E0>, Krylov amplitudes on the grid and the
// per-tau diagnostics. The Krylov basis is expressed on the distinct levels
// of H0 (one coordinate per eigenspace). Throws NumericalError if the
// normalization drifts by more than kNormalizationTol.
TauResult evolve_chain(const ChainSystem& sys, double tau, std::span<const double> u_grid);

// Same pipeline for the effective observable of an algebra model acting on
// the lowest weight state.
TauResult evolve_algebra(const lie::AlgebraModel& model, double tau, std::span<const double> u_grid);

struct IprSeries {
    double alpha = 0.0;
    std::vector<double> tau;
    std::vector<double> ipr;
    std::vector<double> b1;
};

enum class GrowthRegime { bounded, exponential, unclassified };
std::string to_string(GrowthRegime r);

// bounded: Spearman |rho| < 0.5 against tau over the whole series;
// exponential: linear fit of log(values) on tau in [5, 20] with positive
// slope and R^2 > 0.9.
struct RegimeAssessment {
    double spearman = 0.0;
    double max_value = 0.0;
    LinearFit log_fit;
    GrowthRegime regime = GrowthRegime::unclassified;
};

RegimeAssessment classify_growth(std::span<const double> tau, std::span<const double> values);

struct RunReport {
    std::vector<std::filesystem::path> files;
    std::vector<TauSummary> taus;
    std::vector<IprSeries> ipr_series;
};

// Validates, computes every tau in order and writes the output files.
RunReport run(const ScenarioConfig& cfg);

std::string format_double(double x);  // "%.16e"
std::string format_label(double x);   // shortest round-trip representation

}  // namespace tpm
