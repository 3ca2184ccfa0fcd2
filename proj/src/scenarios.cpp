#include "tpm/scenarios.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace tpm {

using nlohmann::json;

std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::spin_chain: return "spin_chain";
        case ScenarioKind::lie_su2: return "lie_su2";
        case ScenarioKind::lie_su11: return "lie_su11";
        case ScenarioKind::ipr_study: return "ipr_study";
    }
    return "spin_chain";
}

ScenarioKind scenario_kind_from_string(std::string_view s) {
    if (s == "spin_chain") return ScenarioKind::spin_chain;
    if (s == "lie_su2") return ScenarioKind::lie_su2;
    if (s == "lie_su11") return ScenarioKind::lie_su11;
    if (s == "ipr_study") return ScenarioKind::ipr_study;
    throw std::invalid_argument("unknown scenario '" + std::string(s) + "'");
}

std::string to_string(GrowthRegime r) {
    switch (r) {
        case GrowthRegime::bounded: return "bounded";
        case GrowthRegime::exponential: return "exponential";
        case GrowthRegime::unclassified: return "unclassified";
    }
    return "unclassified";
}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid scenario config:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::invalid_argument(join_violations(violations)), violations_(std::move(violations)) {}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

std::string format_label(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Config

int ScenarioConfig::resolved_w_site() const { return w_site.value_or(default_perturbation_site(chain.n_sites)); }

Eigen::Index ScenarioConfig::resolved_eigenstate_index() const {
    return eigenstate_index.value_or((Eigen::Index{1} << chain.n_sites) / 2);
}

std::vector<double> ScenarioConfig::resolved_alphas() const {
    return alpha_list.empty() ? std::vector<double>{algebra.alpha} : alpha_list;
}

std::vector<double> ScenarioConfig::u_grid() const {
    std::vector<double> g(static_cast<std::size_t>(std::max(u_steps, 0)));
    for (int k = 0; k < u_steps; ++k) g[static_cast<std::size_t>(k)] = u_max * k / (u_steps - 1);
    return g;
}

std::vector<std::string> ScenarioConfig::violations() const {
    std::vector<std::string> v;
    if (tau_list.empty()) v.push_back("tau_list: must be nonempty");
    for (std::size_t i = 0; i < tau_list.size(); ++i) {
        if (!std::isfinite(tau_list[i])) v.push_back("tau_list[" + std::to_string(i) + "]: must be finite");
        else if (i > 0 && !(tau_list[i] > tau_list[i - 1]))
            v.push_back("tau_list: must be strictly ascending (entry " + std::to_string(i) + ")");
    }
    if (!(u_max > 0.0) || !std::isfinite(u_max)) v.push_back("u_max: must be positive and finite");
    if (u_steps < 2) v.push_back("u_steps: must be >= 2");
    if (phi_columns < 0) v.push_back("phi_columns: must be >= 0");
    if (output_dir.empty()) v.push_back("output_dir: must be nonempty");

    if (scenario == ScenarioKind::spin_chain) {
        const bool sites_ok = chain.n_sites >= 1 && chain.n_sites <= kMaxSites;
        for (const SpinChainSpec& s : {chain.pre(), chain.post()}) {
            try {
                s.validate();
            } catch (const std::exception& e) {
                v.push_back(std::string("chain: ") + e.what());
                break;
            }
        }
        if (!std::isfinite(theta)) v.push_back("theta: must be finite");
        if (sites_ok) {
            if (w_site && (*w_site < 1 || *w_site > chain.n_sites))
                v.push_back("w_site: must lie in [1, n_sites]");
            const Eigen::Index dim = Eigen::Index{1} << chain.n_sites;
            if (eigenstate_index && (*eigenstate_index < 0 || *eigenstate_index >= dim))
                v.push_back("eigenstate_index: must lie in [0, 2^n_sites)");
        }
    } else {
        try {
            algebra.validate();
        } catch (const std::exception& e) {
            v.push_back(std::string("algebra: ") + e.what());
        }
        const bool want_su2 = scenario == ScenarioKind::lie_su2;
        if (want_su2 != (algebra.kind == lie::AlgebraKind::su2))
            v.push_back("algebra.kind: must be " + std::string(want_su2 ? "su2" : "su11") + " for scenario " +
                        to_string(scenario));
        if (scenario == ScenarioKind::ipr_study) {
            if (std::abs(algebra.bargmann_h - 0.25) > 1e-15) v.push_back("algebra.bargmann_h: ipr_study requires 0.25");
            for (double a : resolved_alphas())
                if (!std::isfinite(a)) v.push_back("algebra.alpha_list: entries must be finite");
        } else if (!alpha_list.empty()) {
            v.push_back("algebra.alpha_list: only used by ipr_study");
        }
    }
    return v;
}

void ScenarioConfig::validate() const {
    auto v = violations();
    if (!v.empty()) throw ConfigError(std::move(v));
}

namespace {

class Reader {
public:
    std::vector<std::string> errors;

    void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) errors.push_back(where + it.key() + ": unknown key");
    }

    template <class T>
    void get(const json& obj, const char* key, const std::string& where, T& out, const char* type_name) {
        if (!obj.contains(key)) return;
        if constexpr (std::is_integral_v<T>) {
            if (!obj.at(key).is_number_integer()) {
                errors.push_back(where + key + ": expected " + type_name);
                return;
            }
        }
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            errors.push_back(where + key + ": expected " + type_name);
        }
    }

    template <class Parse>
    void get_enum(const json& obj, const char* key, const std::string& where, Parse parse) {
        if (!obj.contains(key)) return;
        if (!obj.at(key).is_string()) {
            errors.push_back(where + key + ": expected string");
            return;
        }
        try {
            parse(obj.at(key).get<std::string>());
        } catch (const std::invalid_argument& e) {
            errors.push_back(where + key + ": " + e.what());
        }
    }
};

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
    if (!doc.is_object()) throw ConfigError({"top level must be a JSON object"});

    ScenarioConfig cfg;
    Reader r;
    r.check_keys(doc, "",
                 {"scenario", "preset", "chain", "w_site", "theta", "eigenstate_index", "tau_list", "u_max",
                  "u_steps", "algebra", "output_dir", "phi_columns"});
    if (!doc.contains("scenario")) r.errors.push_back("scenario: required");
    r.get_enum(doc, "scenario", "", [&](const std::string& s) { cfg.scenario = scenario_kind_from_string(s); });
    r.get(doc, "preset", "", cfg.preset, "string");

    if (doc.contains("chain")) {
        const json& c = doc.at("chain");
        if (!c.is_object()) {
            r.errors.push_back("chain: expected object");
        } else {
            r.check_keys(c, "chain.", {"n_sites", "boundary", "J0", "h0", "g0", "J1", "h1", "g1"});
            r.get(c, "n_sites", "chain.", cfg.chain.n_sites, "integer");
            r.get_enum(c, "boundary", "chain.",
                       [&](const std::string& s) { cfg.chain.boundary = boundary_from_string(s); });
            r.get(c, "J0", "chain.", cfg.chain.J0, "number");
            r.get(c, "h0", "chain.", cfg.chain.h0, "number");
            r.get(c, "g0", "chain.", cfg.chain.g0, "number");
            r.get(c, "J1", "chain.", cfg.chain.J1, "number");
            r.get(c, "h1", "chain.", cfg.chain.h1, "number");
            r.get(c, "g1", "chain.", cfg.chain.g1, "number");
        }
    }

    if (doc.contains("w_site")) {
        int site = 0;
        r.get(doc, "w_site", "", site, "integer");
        cfg.w_site = site;
    }
    r.get(doc, "theta", "", cfg.theta, "number");
    if (doc.contains("eigenstate_index")) {
        const json& e = doc.at("eigenstate_index");
        if (e.is_string() && e.get<std::string>() == "mid") cfg.eigenstate_index.reset();
        else if (e.is_number_integer()) cfg.eigenstate_index = e.get<Eigen::Index>();
        else r.errors.push_back("eigenstate_index: expected integer or \"mid\"");
    }
    r.get(doc, "tau_list", "", cfg.tau_list, "array of numbers");
    r.get(doc, "u_max", "", cfg.u_max, "number");
    r.get(doc, "u_steps", "", cfg.u_steps, "integer");
    r.get(doc, "phi_columns", "", cfg.phi_columns, "integer");
    if (doc.contains("output_dir")) {
        std::string dir;
        r.get(doc, "output_dir", "", dir, "string");
        cfg.output_dir = dir;
    }

    if (doc.contains("algebra")) {
        const json& a = doc.at("algebra");
        if (!a.is_object()) {
            r.errors.push_back("algebra: expected object");
        } else {
            r.check_keys(a, "algebra.", {"kind", "j", "bargmann_h", "alpha", "alpha_list", "drive", "cutoff"});
            r.get_enum(a, "kind", "algebra.",
                       [&](const std::string& s) { cfg.algebra.kind = lie::algebra_kind_from_string(s); });
            r.get(a, "j", "algebra.", cfg.algebra.j, "number");
            r.get(a, "bargmann_h", "algebra.", cfg.algebra.bargmann_h, "number");
            r.get(a, "alpha", "algebra.", cfg.algebra.alpha, "number");
            r.get(a, "alpha_list", "algebra.", cfg.alpha_list, "array of numbers");
            r.get_enum(a, "drive", "algebra.",
                       [&](const std::string& s) { cfg.algebra.drive = lie::drive_from_string(s); });
            r.get(a, "cutoff", "algebra.", cfg.algebra.cutoff, "integer");
        }
    }

    if (r.errors.empty()) {
        auto more = cfg.violations();
        r.errors.insert(r.errors.end(), more.begin(), more.end());
    }
    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file '" + path.string() + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json config_json(const ScenarioConfig& cfg) {
    json j;
    j["scenario"] = to_string(cfg.scenario);
    j["preset"] = cfg.preset;
    j["tau_list"] = cfg.tau_list;
    j["u_max"] = cfg.u_max;
    j["u_steps"] = cfg.u_steps;
    j["output_dir"] = cfg.output_dir.string();
    j["phi_columns"] = cfg.phi_columns;
    if (cfg.scenario == ScenarioKind::spin_chain) {
        j["chain"] = {{"n_sites", cfg.chain.n_sites}, {"boundary", to_string(cfg.chain.boundary)},
                      {"J0", cfg.chain.J0},           {"h0", cfg.chain.h0},
                      {"g0", cfg.chain.g0},           {"J1", cfg.chain.J1},
                      {"h1", cfg.chain.h1},           {"g1", cfg.chain.g1}};
        j["w_site"] = cfg.resolved_w_site();
        j["theta"] = cfg.theta;
        j["eigenstate_index"] = cfg.resolved_eigenstate_index();
    } else {
        json a = {{"kind", lie::to_string(cfg.algebra.kind)},
                  {"alpha", cfg.algebra.alpha},
                  {"drive", lie::to_string(cfg.algebra.drive)}};
        if (cfg.algebra.kind == lie::AlgebraKind::su2) {
            a["j"] = cfg.algebra.j;
        } else {
            a["bargmann_h"] = cfg.algebra.bargmann_h;
            a["cutoff"] = cfg.algebra.cutoff;
        }
        if (cfg.scenario == ScenarioKind::ipr_study) a["alpha_list"] = cfg.resolved_alphas();
        j["algebra"] = a;
    }
    return j;
}

}  // namespace

std::string config_to_json(const ScenarioConfig& cfg) { return config_json(cfg).dump(2); }

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() { return {"case1", "case2", "case3", "lie-su11", "ipr-study"}; }

ScenarioConfig preset(std::string_view name) {
    ScenarioConfig cfg;
    cfg.preset = std::string(name);
    cfg.output_dir = std::filesystem::path("out") / std::string(name);
    if (name == "case1") {
        cfg.chain.J0 = 1.0, cfg.chain.h0 = 0.4, cfg.chain.g0 = 0.0;
        cfg.chain.J1 = 1.0, cfg.chain.h1 = 0.7, cfg.chain.g1 = 0.0;
    } else if (name == "case2") {
        cfg.chain.J0 = 1.0, cfg.chain.h0 = 0.4, cfg.chain.g0 = 0.0;
        cfg.chain.J1 = 1.0, cfg.chain.h1 = 1.4, cfg.chain.g1 = -0.6;
    } else if (name == "case3") {
        cfg.chain.J0 = 0.8, cfg.chain.h0 = 1.2, cfg.chain.g0 = -0.6;
        cfg.chain.J1 = 1.0, cfg.chain.h1 = 1.4, cfg.chain.g1 = -0.6;
    } else if (name == "lie-su11") {
        cfg.scenario = ScenarioKind::lie_su11;
        cfg.algebra = lie::AlgebraModel{};
        cfg.algebra.kind = lie::AlgebraKind::su11;
        cfg.algebra.bargmann_h = 0.25;
        cfg.algebra.alpha = 0.3;
        // |C+| stays below 0.84 for tau <= 2, so 256 levels hold the state
        cfg.tau_list = {0.1, 0.5, 1.0, 2.0};
        cfg.u_max = 10.0;
        cfg.u_steps = 1001;
    } else if (name == "ipr-study") {
        cfg.scenario = ScenarioKind::ipr_study;
        cfg.algebra = lie::AlgebraModel{};
        cfg.alpha_list = {0.3, 0.7};
        cfg.tau_list.clear();
        for (int k = 0; k <= 200; ++k) cfg.tau_list.push_back(0.1 * k);
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw std::invalid_argument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Statistics

SaturationStats saturation_stats(std::span<const double> values, double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction <= 0.5))
        throw std::invalid_argument("saturation_stats: window_fraction must lie in (0, 0.5]");
    if (values.empty()) throw std::invalid_argument("saturation_stats: empty trace");
    const std::size_t n = values.size();
    const std::size_t count =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n))));
    const auto window = values.subspan(n - count);
    SaturationStats s;
    s.mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(count);
    double var = 0.0;
    for (double x : window) var += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(count));
    double scale = 0.0;
    for (double x : window) scale = std::max(scale, std::abs(x));
    s.rel_fluct = std::abs(s.mean) <= 1e-14 * std::max(1.0, scale) ? std::numeric_limits<double>::infinity()
                                                                    : s.stddev / std::abs(s.mean);
    return s;
}

SaturationStats saturation_stats(const ComplexityTrace& trace, double window_fraction) {
    return saturation_stats(std::span<const double>(trace.complexity), window_fraction);
}

LinearFit early_growth_fit(const ComplexityTrace& trace, double fraction) {
    const std::size_t n = trace.complexity.size();
    const std::size_t count =
        std::min(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)))));
    return linear_fit(std::span<const double>(trace.u_grid).first(count),
                      std::span<const double>(trace.complexity).first(count));
}

RegimeAssessment classify_growth(std::span<const double> tau, std::span<const double> values) {
    RegimeAssessment r;
    r.spearman = spearman_rho(tau, values);
    for (double v : values) r.max_value = std::max(r.max_value, v);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (tau[i] >= 5.0 && tau[i] <= 20.0 && values[i] > 0.0) {
            xs.push_back(tau[i]);
            ys.push_back(std::log(values[i]));
        }
    }
    if (xs.size() >= 2) r.log_fit = linear_fit(xs, ys);
    if (std::abs(r.spearman) < 0.5) r.regime = GrowthRegime::bounded;
    else if (r.log_fit.slope > 0.0 && r.log_fit.r_squared > 0.9) r.regime = GrowthRegime::exponential;
    return r;
}

// ---------------------------------------------------------------------------
// Evolution

ChainSystem build_chain_system(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.scenario != ScenarioKind::spin_chain) throw std::invalid_argument("build_chain_system: not a spin_chain config");
    ChainSystem sys{cfg.chain.pre(), cfg.chain.post(), cfg.resolved_w_site(), cfg.resolved_eigenstate_index(),
                    TpmSetup{StateVector::basis_state(1, 0), Operator::general(Eigen::MatrixXcd::Identity(1, 1)), {}, {}}};
    SpectralDecomposition h0 = eigendecompose(ising_hamiltonian(sys.pre));
    SpectralDecomposition h1 = eigendecompose(ising_hamiltonian(sys.post));
    StateVector e0(h0.eigenvectors.col(sys.eigenstate_index));
    sys.setup = TpmSetup{std::move(e0), local_perturbation(sys.w_site, cfg.theta, cfg.chain.n_sites), std::move(h0),
                         std::move(h1)};
    return sys;
}

namespace {

void require_normalized(const ComplexityTrace& trace, double tau) {
    const double dev = trace.max_norm_deviation();
    if (!(dev <= kNormalizationTol)) {
        std::ostringstream os;
        os << "normalization drift " << dev << " exceeds " << kNormalizationTol << " at tau=" << tau;
        throw NumericalError(os.str());
    }
}

void fill_trace_stats(TauSummary& s, const ComplexityTrace& trace) {
    s.max_norm_deviation = trace.max_norm_deviation();
    s.saturation = saturation_stats(trace, kSaturationWindow);
    if (trace.complexity.size() >= 2) s.early_growth = early_growth_fit(trace, kEarlyGrowthWindow);
}

}  // namespace

TauResult evolve_chain(const ChainSystem& sys, double tau, std::span<const double> u_grid) {
    const SpectralDecomposition& h0 = sys.setup.observable;
    const StateVector psi = perturbed_state(sys.setup, tau);

    // Lanczos on the distinct levels of H0, where it acts diagonally.
    LevelKrylov lk = level_lanczos(h0, psi);
    TauResult out;
    out.trace = level_amplitudes(lk, u_grid);
    out.krylov = std::move(lk.krylov);
    require_normalized(out.trace, tau);

    TauSummary& s = out.summary;
    s.tau = tau;
    s.krylov_dim = out.krylov.dim_krylov();
    fill_trace_stats(s, out.trace);
    s.fotoc_long_u_average = fotoc_long_u_average(sys.setup, tau);
    s.ipr = ipr(psi, h0);
    s.thermo = thermo_identities(sys.setup, tau);
    return out;
}

TauResult evolve_algebra(const lie::AlgebraModel& model, double tau, std::span<const double> u_grid) {
    const lie::EffectiveObservable o = lie::effective_observable(model, tau);
    const StateVector psi = StateVector::basis_state(o.matrix.dim(), 0);
    const SpectralDecomposition spec = eigendecompose(o.matrix);

    TauResult out;
    // Dense matvec keeps the tridiagonal structure exact; applying the spectral
    // form injects rounding along high-energy directions that Lanczos amplifies.
    out.krylov = lanczos(o.matrix, psi);
    out.trace = amplitudes(out.krylov, spec, psi, u_grid);
    require_normalized(out.trace, tau);

    TauSummary& s = out.summary;
    s.tau = tau;
    s.krylov_dim = out.krylov.dim_krylov();
    fill_trace_stats(s, out.trace);

    const Eigen::VectorXcd hp = o.matrix.matrix() * psi.amplitudes();
    ThermoIdentities& t = s.thermo;
    t.a0_lanczos = out.krylov.a.front();
    t.b1_sq_lanczos = out.krylov.b.empty() ? 0.0 : out.krylov.b.front() * out.krylov.b.front();
    t.mean = psi.amplitudes().dot(hp).real();
    t.variance = std::max(0.0, hp.squaredNorm() - t.mean * t.mean);
    t.a0_check = std::abs(t.a0_lanczos - t.mean);
    t.b1_check = std::abs(t.b1_sq_lanczos - t.variance);
    t.scale = spec.max_abs_eigenvalue();

    if (model.kind == lie::AlgebraKind::su11 && std::abs(model.bargmann_h - 0.25) <= 1e-15) {
        try {
            const std::vector<double> closed = lie::su11_spread_complexity_closed(model, tau, u_grid);
            double worst = 0.0;
            for (std::size_t k = 0; k < closed.size(); ++k)
                worst = std::max(worst, std::abs(closed[k] - out.trace.complexity[k]));
            s.closed_form_deviation = worst;
        } catch (const NumericalError&) {
        }
    } else if (model.kind == lie::AlgebraKind::su2) {
        const int n_max = static_cast<int>(s.krylov_dim) - 1;
        const LanczosCoefficients ref = lie::closed_form_lanczos(model, tau, n_max);
        double worst = 0.0;
        for (std::size_t n = 0; n < ref.a.size(); ++n) worst = std::max(worst, std::abs(ref.a[n] - out.krylov.a[n]));
        for (std::size_t n = 0; n < ref.b.size(); ++n)
            worst = std::max(worst, std::abs(std::abs(ref.b[n]) - out.krylov.b[n]));
        s.closed_form_deviation = worst;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& comment) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
        out_ << "# " << comment << '\n';
    }
    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << format_double(vals[i]);
        out_ << '\n';
    }
    void row(long n, const std::vector<double>& vals) {
        out_ << n;
        for (double v : vals) out_ << ',' << format_double(v);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::string parameter_line(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "scenario=" << to_string(cfg.scenario);
    if (cfg.scenario == ScenarioKind::spin_chain) {
        const ChainParams& c = cfg.chain;
        os << " n_sites=" << c.n_sites << " boundary=" << to_string(c.boundary) << " J0=" << format_label(c.J0)
           << " h0=" << format_label(c.h0) << " g0=" << format_label(c.g0) << " J1=" << format_label(c.J1)
           << " h1=" << format_label(c.h1) << " g1=" << format_label(c.g1) << " w_site=" << cfg.resolved_w_site()
           << " theta=" << format_label(cfg.theta) << " eigenstate_index=" << cfg.resolved_eigenstate_index();
    } else {
        const lie::AlgebraModel& a = cfg.algebra;
        os << " kind=" << lie::to_string(a.kind);
        if (a.kind == lie::AlgebraKind::su2) os << " j=" << format_label(a.j);
        else os << " bargmann_h=" << format_label(a.bargmann_h) << " cutoff=" << a.cutoff;
        if (cfg.scenario != ScenarioKind::ipr_study)
            os << " alpha=" << format_label(a.alpha) << " drive=" << lie::to_string(a.drive);
    }
    return os.str();
}

void write_trace(const std::filesystem::path& path, const std::string& comment, const TauResult& r, int cap) {
    CsvWriter w(path, comment);
    const Eigen::Index cols = std::min<Eigen::Index>(cap, r.trace.phi.rows());
    std::vector<std::string> head{"u", "C", "survival"};
    for (Eigen::Index n = 0; n < cols; ++n) {
        head.push_back("re_phi" + std::to_string(n));
        head.push_back("im_phi" + std::to_string(n));
    }
    w.header(head);
    std::vector<double> vals;
    for (std::size_t g = 0; g < r.trace.u_grid.size(); ++g) {
        vals.assign({r.trace.u_grid[g], r.trace.complexity[g], r.trace.survival[g]});
        for (Eigen::Index n = 0; n < cols; ++n) {
            const cplx p = r.trace.phi(n, static_cast<Eigen::Index>(g));
            vals.push_back(p.real());
            vals.push_back(p.imag());
        }
        w.row(vals);
    }
}

void write_lanczos(const std::filesystem::path& path, const std::string& comment, const KrylovDecomposition& k) {
    CsvWriter w(path, comment);
    w.header({"n", "a_n", "b_n"});
    for (std::size_t n = 0; n < k.a.size(); ++n) w.row(static_cast<long>(n), {k.a[n], n == 0 ? 0.0 : k.b[n - 1]});
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_json(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

json tau_json(const TauSummary& s) {
    return {{"tau", s.tau},
            {"krylov_dim", s.krylov_dim},
            {"max_norm_deviation", s.max_norm_deviation},
            {"fotoc_long_u_average", optional_json(s.fotoc_long_u_average)},
            {"ipr", optional_json(s.ipr)},
            {"thermo",
             {{"a0_lanczos", s.thermo.a0_lanczos},
              {"mean_H0", s.thermo.mean},
              {"a0_residual", s.thermo.a0_check},
              {"b1_sq_lanczos", s.thermo.b1_sq_lanczos},
              {"variance_H0", s.thermo.variance},
              {"b1_sq_residual", s.thermo.b1_check},
              {"norm_H0", s.thermo.scale}}},
            {"saturation",
             {{"window_fraction", kSaturationWindow},
              {"mean", s.saturation.mean},
              {"std", s.saturation.stddev},
              {"rel_fluct", finite_json(s.saturation.rel_fluct)}}},
            {"early_growth",
             {{"window_fraction", kEarlyGrowthWindow},
              {"slope", s.early_growth.slope},
              {"intercept", s.early_growth.intercept},
              {"r_squared", s.early_growth.r_squared}}},
            {"closed_form_deviation", optional_json(s.closed_form_deviation)}};
}

json regime_json(const RegimeAssessment& r) {
    return {{"spearman_rho", r.spearman},
            {"max", r.max_value},
            {"log_fit_slope", r.log_fit.slope},
            {"log_fit_r_squared", r.log_fit.r_squared},
            {"regime", to_string(r.regime)}};
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

json manifest_json(const ScenarioConfig& cfg, const std::vector<double>& grid) {
    json m;
    m["code_version"] = kCodeVersion;
    m["config"] = config_json(cfg);
    m["u_grid"] = {{"first", grid.front()}, {"last", grid.back()}, {"points", grid.size()}, {"spacing", "uniform"}};
    m["float_format"] = "%.16e";
    json tol = {{"lanczos_termination", "1e-10 * spectral range of the generator"},
                {"reorthogonalization_trigger", kReorthogonalizationTrigger},
                {"normalization", kNormalizationTol},
                {"hermiticity", kHermitianTol},
                {"unitarity", kUnitaryTol},
                {"state_norm", kNormTol}};
    if (cfg.scenario == ScenarioKind::spin_chain) {
        const int n = cfg.chain.n_sites;
        tol["degeneracy"] = kDegeneracyTol;
        m["basis"] = "computational, site 1 most significant bit, bit 0 is sigma^z = +1";
        m["degenerate_ordering"] = "lexicographic by absolute component values; largest component real positive";
        m["boundary"] = to_string(cfg.chain.boundary);
        m["n_sites"] = n;
        m["n_sites_reference"] = 12;
        m["w_site"] = cfg.resolved_w_site();
        m["w_site_default"] = default_perturbation_site(n);
        m["perturbation"] = "exp(-i theta sigma^z_{w_site})";
        m["eigenstate_index"] = cfg.resolved_eigenstate_index();
        m["eigenstate_index_rule"] = cfg.eigenstate_index ? "explicit" : "mid = 2^n_sites / 2 (ascending energies)";
        m["krylov_generator"] = "H0 (pre-quench)";
        m["saturation_window"] = kSaturationWindow;
        m["early_growth_window"] = kEarlyGrowthWindow;
    } else if (cfg.scenario == ScenarioKind::ipr_study) {
        m["model"] = "H0 = K0, H1 = alpha (K+ + K-) + K0, W = exp[i (K+ + K-)], h = 1/4";
        m["representation"] = "two-dimensional faithful: K0 = sz/2, K+ = i s+, K- = i s-";
        m["classification"] = "bounded: |spearman| < 0.5; exponential: log-fit on tau in [5,20] slope > 0, R^2 > 0.9";
    } else {
        m["krylov_generator"] = "A0 K0 + i A1 (K+ - K-) on the lowest weight state";
        m["saturation_window"] = kSaturationWindow;
    }
    m["tolerances"] = tol;
    return m;
}

}  // namespace

RunReport run(const ScenarioConfig& cfg) {
    cfg.validate();
    const std::vector<double> grid = cfg.u_grid();
    std::filesystem::create_directories(cfg.output_dir);
    RunReport report;
    json summary;
    summary["scenario"] = to_string(cfg.scenario);
    const std::string params = parameter_line(cfg);

    if (cfg.scenario == ScenarioKind::ipr_study) {
        json series = json::array();
        for (double alpha : cfg.resolved_alphas()) {
            IprSeries s{alpha, cfg.tau_list, lie::ipr_model(alpha, cfg.tau_list), lie::b1_model(alpha, cfg.tau_list)};
            const auto path = cfg.output_dir / ("ipr_alpha=" + format_label(alpha) + ".csv");
            CsvWriter w(path, params + " alpha=" + format_label(alpha));
            w.header({"tau", "ipr", "inv_ipr", "b1"});
            std::vector<double> inv(s.ipr.size());
            for (std::size_t k = 0; k < s.tau.size(); ++k) {
                inv[k] = 1.0 / s.ipr[k];
                w.row({s.tau[k], s.ipr[k], inv[k], s.b1[k]});
            }
            report.files.push_back(path);
            series.push_back({{"alpha", alpha},
                              {"b1", regime_json(classify_growth(s.tau, s.b1))},
                              {"inv_ipr", regime_json(classify_growth(s.tau, inv))}});
            report.ipr_series.push_back(std::move(s));
        }
        summary["ipr_study"] = series;
    } else {
        std::optional<ChainSystem> sys;
        if (cfg.scenario == ScenarioKind::spin_chain) sys = build_chain_system(cfg);
        json taus = json::array();
        for (double tau : cfg.tau_list) {
            const TauResult r = sys ? evolve_chain(*sys, tau, grid) : evolve_algebra(cfg.algebra, tau, grid);
            const std::string label = format_label(tau);
            const std::string comment = params + " tau=" + label;
            const auto trace_path = cfg.output_dir / ("complexity_tau=" + label + ".csv");
            const auto lanczos_path = cfg.output_dir / ("lanczos_tau=" + label + ".csv");
            write_trace(trace_path, comment, r, cfg.phi_columns);
            write_lanczos(lanczos_path, comment, r.krylov);
            report.files.push_back(trace_path);
            report.files.push_back(lanczos_path);
            taus.push_back(tau_json(r.summary));
            report.taus.push_back(r.summary);
        }
        summary["taus"] = taus;
        if (sys) summary["eigenstate_energy"] = sys->setup.observable.eigenvalues(sys->eigenstate_index);
    }

    const auto summary_path = cfg.output_dir / "summary.json";
    const auto manifest_path = cfg.output_dir / "manifest.json";
    write_json(summary_path, summary);
    write_json(manifest_path, manifest_json(cfg, grid));
    report.files.push_back(summary_path);
    report.files.push_back(manifest_path);
    return report;
}

}  // namespace tpm
