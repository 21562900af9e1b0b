#include "riskshift/dgp.hpp"

#include <cmath>

#include "riskshift/errors.hpp"
#include "riskshift/rng.hpp"

namespace riskshift {

namespace {

constexpr std::uint64_t kCovariateStream = 0x11;
constexpr std::uint64_t kTreatmentStream = 0x22;
constexpr std::uint64_t kEventStream = 0x33;

double expit(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_hazard_spec(const HazardSpec& h, const char* label, int dim) {
    if (h.support_index < 1 || h.support_index > dim)
        throw ConfigError(std::string(label) + ": support_index out of range");
    for (int a = 0; a <= 1; ++a) {
        const double lo = h.p_low + a * h.p_low_tau;
        const double hi = h.p_high + a * h.p_high_tau;
        if (lo <= 0 || lo > 1 || hi <= 0 || hi > 1)
            throw ConfigError(std::string(label) +
                              ": hazard outside (0, 1] under some arm");
    }
}

double spec_hazard(const HazardSpec& h, std::span<const double> x, int a) {
    const bool high = x[h.support_index - 1] != 0.0;
    return high ? h.p_high + a * h.p_high_tau : h.p_low + a * h.p_low_tau;
}

}  // namespace

void validate_config(const DgpConfig& cfg) {
    if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (cfg.n_train < 1 || cfg.n_test < 1) throw ConfigError("sample sizes must be >= 1");
    if (cfg.rho <= -0.5 || cfg.rho >= 0.5)
        throw ConfigError("rho must lie in (-0.5, 0.5)");
    for (int x1 = 0; x1 <= 1; ++x1) {
        const double p2 = 0.5 - cfg.rho * (1 - 2 * x1);
        if (p2 < 0 || p2 > 1) throw ConfigError("infeasible covariate correlation");
    }
    if (cfg.propensity_index < 1 || cfg.propensity_index > 2)
        throw ConfigError("propensity_index out of range");
    check_hazard_spec(cfg.hazard_main, "hazard_main", 2);
    check_hazard_spec(cfg.hazard_competing, "hazard_competing", 2);
}

DgpConfig preset(int setting, double varying) {
    DgpConfig cfg;
    cfg.rho = 0.35;
    cfg.horizon = 30;
    cfg.n_train = 5000;
    cfg.n_test = 10000;
    cfg.propensity_index = 1;
    cfg.hazard_main = {0.01, 0.0, 0.1, 0.0, 1};
    cfg.hazard_competing = {0.01, 0.0, 0.01, 0.0, 1};
    cfg.xi = 0.0;
    switch (setting) {
        case 1:
            cfg.xi = varying;
            break;
        case 2:
            cfg.hazard_competing.p_high_tau = varying;
            break;
        case 3:
            cfg.hazard_main.p_high_tau = -0.09;
            cfg.hazard_competing.p_high = varying;
            break;
        case 4:
            cfg.hazard_competing.p_high_tau = 0.1;
            cfg.xi = varying;
            break;
        default:
            throw ConfigError("unknown setting " + std::to_string(setting));
    }
    validate_config(cfg);
    return cfg;
}

namespace {

HazardSpec hazard_spec_from_json(const nlohmann::json& j) {
    HazardSpec h;
    h.p_low = j.at("p_low").get<double>();
    h.p_low_tau = j.at("p_low_tau").get<double>();
    h.p_high = j.at("p_high").get<double>();
    h.p_high_tau = j.at("p_high_tau").get<double>();
    h.support_index = j.at("support_index").get<int>();
    return h;
}

nlohmann::json hazard_spec_to_json(const HazardSpec& h) {
    return {{"p_low", h.p_low},
            {"p_low_tau", h.p_low_tau},
            {"p_high", h.p_high},
            {"p_high_tau", h.p_high_tau},
            {"support_index", h.support_index}};
}

}  // namespace

DgpConfig dgp_config_from_json(const nlohmann::json& j) {
    try {
        if (j.contains("preset")) {
            const std::string name = j.at("preset").get<std::string>();
            if (name.size() != 8 || name.rfind("setting", 0) != 0)
                throw ConfigError("unknown preset '" + name + "'");
            DgpConfig cfg = preset(name.back() - '0', j.at("varying").get<double>());
            if (j.contains("n_train")) cfg.n_train = j.at("n_train").get<int>();
            if (j.contains("n_test")) cfg.n_test = j.at("n_test").get<int>();
            if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<int>();
            validate_config(cfg);
            return cfg;
        }
        DgpConfig cfg;
        cfg.rho = j.at("rho").get<double>();
        cfg.hazard_main = hazard_spec_from_json(j.at("hazard_main"));
        cfg.hazard_competing = hazard_spec_from_json(j.at("hazard_competing"));
        cfg.xi = j.at("xi").get<double>();
        cfg.propensity_index = j.at("propensity_index").get<int>();
        cfg.horizon = j.at("horizon").get<int>();
        cfg.n_train = j.at("n_train").get<int>();
        cfg.n_test = j.at("n_test").get<int>();
        validate_config(cfg);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad DGP config: ") + e.what());
    }
}

nlohmann::json dgp_config_to_json(const DgpConfig& cfg) {
    return {{"rho", cfg.rho},
            {"hazard_main", hazard_spec_to_json(cfg.hazard_main)},
            {"hazard_competing", hazard_spec_to_json(cfg.hazard_competing)},
            {"xi", cfg.xi},
            {"propensity_index", cfg.propensity_index},
            {"horizon", cfg.horizon},
            {"n_train", cfg.n_train},
            {"n_test", cfg.n_test}};
}

std::string InterventionSpec::name() const {
    switch (kind) {
        case Kind::Total: return "total(" + std::to_string(a_main) + ")";
        case Kind::Direct: return "direct(" + std::to_string(a_main) + ")";
        case Kind::Separable:
            return "separable(" + std::to_string(a_main) + "," +
                   std::to_string(a_comp) + ")";
    }
    return {};
}

InterventionSpec intervention_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "total") return InterventionSpec::total(j.at("a").get<int>());
        if (kind == "direct") return InterventionSpec::direct(j.at("a").get<int>());
        if (kind == "separable")
            return InterventionSpec::separable(j.at("a_y").get<int>(),
                                               j.at("a_d").get<int>());
        throw ConfigError("unknown intervention kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad intervention: ") + e.what());
    }
}

nlohmann::json intervention_to_json(const InterventionSpec& s) {
    switch (s.kind) {
        case InterventionSpec::Kind::Total:
            return {{"kind", "total"}, {"a", s.a_main}};
        case InterventionSpec::Kind::Direct:
            return {{"kind", "direct"}, {"a", s.a_main}};
        case InterventionSpec::Kind::Separable:
            return {{"kind", "separable"}, {"a_y", s.a_main}, {"a_d", s.a_comp}};
    }
    return {};
}

SynthDgp::SynthDgp(DgpConfig cfg) : cfg_(std::move(cfg)) { validate_config(cfg_); }

double SynthDgp::hazard(EventType event, int k, std::span<const double> x,
                        int a) const {
    return true_hazard(cfg_, event, k, x, a);
}

double SynthDgp::propensity(std::span<const double> x) const {
    return riskshift::propensity(cfg_, x);
}

double true_hazard(const DgpConfig& cfg, EventType event, int k,
                   std::span<const double> x, int a) {
    (void)k;  // constant over time
    if (event == EventType::None) throw ShapeError("true_hazard: event must be Y or D");
    const HazardSpec& h =
        event == EventType::MainEvent ? cfg.hazard_main : cfg.hazard_competing;
    return spec_hazard(h, x, a);
}

double propensity(const DgpConfig& cfg, std::span<const double> x) {
    return expit(cfg.xi * (x[cfg.propensity_index - 1] - 0.5));
}

Matrix sample_covariates(std::size_t n, double rho, std::uint64_t seed) {
    if (rho <= -0.5 || rho >= 0.5) throw ConfigError("rho must lie in (-0.5, 0.5)");
    Matrix m(n, 2);
    const std::uint64_t cov_seed = mix_seed(seed, kCovariateStream);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = substream(cov_seed, i);
        const double x1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
        const double x2 = rng.bernoulli(0.5 - rho * (1.0 - 2.0 * x1)) ? 1.0 : 0.0;
        m.at(i, 0) = x1;
        m.at(i, 1) = x2;
    }
    return m;
}

namespace {

// Core trajectory sampler. Every unit owns one substream per role, and both
// step uniforms are always consumed, so samples drawn under different
// interventions from the same seed share covariates and event uniforms.
//
// Within a step the main-event uniform is evaluated before the competing
// one: step exit masses are h_Y, (1-h_Y)*h_D and (1-h_Y)(1-h_D), which is
// the factorization under which exact_risk is the exact law of the sampled
// first event.
Dataset sample_impl(const DgpConfig& cfg, std::size_t n, std::uint64_t seed,
                    bool forced, const InterventionSpec& spec) {
    validate_config(cfg);
    const int K = cfg.horizon;
    Dataset ds(K, 2);
    ds.reserve(n);

    const std::uint64_t cov_seed = mix_seed(seed, kCovariateStream);
    const std::uint64_t trt_seed = mix_seed(seed, kTreatmentStream);
    const std::uint64_t evt_seed = mix_seed(seed, kEventStream);
    const bool drop_competing = forced && spec.kind == InterventionSpec::Kind::Direct;

    double x[2];
    for (std::size_t i = 0; i < n; ++i) {
        Rng cov_rng = substream(cov_seed, i);
        x[0] = cov_rng.bernoulli(0.5) ? 1.0 : 0.0;
        x[1] = cov_rng.bernoulli(0.5 - cfg.rho * (1.0 - 2.0 * x[0])) ? 1.0 : 0.0;

        int a_y, a_d;
        if (forced) {
            a_y = spec.a_main;
            a_d = spec.a_comp;
        } else {
            Rng trt_rng = substream(trt_seed, i);
            a_y = a_d = trt_rng.bernoulli(propensity(cfg, x)) ? 1 : 0;
        }

        const double h_y = spec_hazard(cfg.hazard_main, x, a_y);
        const double h_d = drop_competing ? 0.0 : spec_hazard(cfg.hazard_competing, x, a_d);

        Rng evt_rng = substream(evt_seed, i);
        int t = K + 1;
        EventType e = EventType::None;
        for (int k = 1; k <= K; ++k) {
            const double u_main = evt_rng.uniform();
            const double u_comp = evt_rng.uniform();
            if (u_main < h_y) {
                t = k;
                e = EventType::MainEvent;
                break;
            }
            if (u_comp < h_d) {
                t = k;
                e = EventType::CompetingEvent;
                break;
            }
        }
        ds.add({x, 2}, a_y, t, e);
    }
    return ds;
}

}  // namespace

Dataset sample_observational(const DgpConfig& cfg, std::size_t n, std::uint64_t seed) {
    return sample_impl(cfg, n, seed, false, InterventionSpec::total(0));
}

Dataset sample_interventional(const DgpConfig& cfg, const InterventionSpec& spec,
                              std::size_t n, std::uint64_t seed) {
    return sample_impl(cfg, n, seed, true, spec);
}

std::array<double, 2> cell_covariates(int cell) {
    return {static_cast<double>((cell >> 1) & 1), static_cast<double>(cell & 1)};
}

int cell_of(std::span<const double> x) {
    return (x[0] != 0.0 ? 2 : 0) + (x[1] != 0.0 ? 1 : 0);
}

std::array<double, 4> covariate_cell_probs(const DgpConfig& cfg) {
    std::array<double, 4> p{};
    for (int c = 0; c < 4; ++c) {
        const auto x = cell_covariates(c);
        const double p2 = 0.5 - cfg.rho * (1.0 - 2.0 * x[0]);
        p[c] = 0.5 * (x[1] != 0.0 ? p2 : 1.0 - p2);
    }
    return p;
}

namespace {

std::array<double, 4> normalize_cells(std::array<double, 4> mass) {
    double total = mass[0] + mass[1] + mass[2] + mass[3];
    if (total <= 0) throw DegenerateDistribution("at-risk distribution has zero mass");
    for (double& m : mass) m /= total;
    return mass;
}

}  // namespace

std::array<double, 4> exact_at_risk_distribution(const DgpConfig& cfg,
                                                 const InterventionSpec& spec, int k) {
    if (k < 1 || k > cfg.horizon) throw ShapeError("timestep out of range");
    const auto p_x = covariate_cell_probs(cfg);
    const bool direct = spec.kind == InterventionSpec::Kind::Direct;
    std::array<double, 4> mass{};
    for (int c = 0; c < 4; ++c) {
        const auto xc = cell_covariates(c);
        std::span<const double> x{xc.data(), 2};
        const double h_y = spec_hazard(cfg.hazard_main, x, spec.a_main);
        const double h_d = direct ? 0.0 : spec_hazard(cfg.hazard_competing, x, spec.a_comp);
        double m = p_x[c] * (1.0 - h_d);
        for (int l = 1; l < k; ++l) m *= (1.0 - h_d) * (1.0 - h_y);
        mass[c] = m;
    }
    return normalize_cells(mass);
}

std::array<double, 4> exact_observational_at_risk(const DgpConfig& cfg, int k, int a) {
    if (k < 1 || k > cfg.horizon) throw ShapeError("timestep out of range");
    const auto p_x = covariate_cell_probs(cfg);
    std::array<double, 4> mass{};
    for (int c = 0; c < 4; ++c) {
        const auto xc = cell_covariates(c);
        std::span<const double> x{xc.data(), 2};
        const double pi = propensity(cfg, x);
        const double pi_a = a == 1 ? pi : 1.0 - pi;
        const double h_y = spec_hazard(cfg.hazard_main, x, a);
        const double h_d = spec_hazard(cfg.hazard_competing, x, a);
        double m = p_x[c] * pi_a * (1.0 - h_d);
        for (int l = 1; l < k; ++l) m *= (1.0 - h_d) * (1.0 - h_y);
        mass[c] = m;
    }
    return normalize_cells(mass);
}

double exact_risk(const DgpConfig& cfg, const InterventionSpec& spec,
                  std::span<const double> x, int k) {
    if (k < 1 || k > cfg.horizon) throw ShapeError("horizon out of range");
    const bool direct = spec.kind == InterventionSpec::Kind::Direct;
    const double h_y = spec_hazard(cfg.hazard_main, x, spec.a_main);
    const double h_d = direct ? 0.0 : spec_hazard(cfg.hazard_competing, x, spec.a_comp);
    double risk = 0.0, surv = 1.0;
    for (int l = 1; l <= k; ++l) {
        risk += h_y * surv;
        surv *= (1.0 - h_y) * (1.0 - h_d);
    }
    return risk;
}

}  // namespace riskshift
