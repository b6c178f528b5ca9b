#ifndef TFGKP_SCENARIO_HPP
#define TFGKP_SCENARIO_HPP

// Declarative scenario runs: flat key-value configs in, schema-stable CSV/JSON out.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "biphoton.hpp"
#include "comb.hpp"
#include "error_correction.hpp"
#include "errors.hpp"
#include "fidelity.hpp"
#include "phase_space.hpp"
#include "propagation.hpp"

namespace tfgkp::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_name = "talbot_gkp";
inline constexpr const char* tool_version = "1.0.0";
inline constexpr int schema_version = 1;

enum ExitCode { exit_ok = 0, exit_config = 2, exit_non_convergence = 3, exit_io = 4 };

enum class ParamType { number, integer, string, boolean };

struct Param {
    std::string key;
    ParamType type = ParamType::number;
    bool required = true;
    json fallback = nullptr;
    std::string help;
};

struct Scenario {
    std::string name;
    std::string figure_class; // plotting class consuming the data file; empty if none
    std::vector<Param> params;
};

namespace detail {

inline Param req(std::string key, ParamType t, std::string help) { return {std::move(key), t, true, nullptr, std::move(help)}; }
inline Param opt(std::string key, ParamType t, json fallback, std::string help) {
    return {std::move(key), t, false, std::move(fallback), std::move(help)};
}

inline std::vector<Param> comb_params() {
    using T = ParamType;
    return {req("kappa", T::number, "envelope width (fsr)"), req("sigma", T::number, "peak width (fsr)"),
            opt("n_max", T::integer, 0, "peak truncation, 0 = ceil(5 kappa)"),
            opt("samples_per_fsr", T::integer, 0, "grid density, 0 = automatic")};
}

inline std::vector<Param> range_params() {
    using T = ParamType;
    return {req("kappa_min", T::number, "first kappa sample"),  req("kappa_max", T::number, "last kappa sample"),
            req("n_kappa", T::integer, "number of kappa samples"), opt("kappa_log", T::boolean, false, "log spacing"),
            req("sigma_min", T::number, "first sigma sample"),  req("sigma_max", T::number, "last sigma sample"),
            req("n_sigma", T::integer, "number of sigma samples"), opt("sigma_log", T::boolean, false, "log spacing")};
}

inline std::vector<Param> concat(std::vector<Param> a, const std::vector<Param>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace detail

inline const std::vector<Scenario>& scenarios() {
    using T = ParamType;
    using detail::concat, detail::opt, detail::req;
    const double pi = std::numbers::pi;
    static const std::vector<Scenario> all{
        {"state", "",
         concat(detail::comb_params(),
                {req("label", T::string, "codeword label, e.g. zero_t"), opt("beta", T::number, 0.0, "chirp in beta_T")})},
        {"carpet", "carpet",
         concat(detail::comb_params(),
                {opt("label", T::string, "zero_t", "codeword label"), req("beta_min", T::number, "first chirp (beta_T)"),
                 req("beta_max", T::number, "last chirp (beta_T)"), req("n_beta", T::integer, "chirp samples"),
                 opt("t_min", T::number, -4 * pi, "first time (1/fsr)"), opt("t_max", T::number, 4 * pi, "last time"),
                 opt("n_t", T::integer, 513, "time samples")})},
        {"overlap-map", "heatmap",
         concat(detail::range_params(),
                {opt("quantity", T::string, "frequency", "frequency: <0_w|1_w>, time: <0_t|1_t>"),
                 opt("method", T::string, "exact", "exact, leading_order or numerical")})},
        {"fidelity-sweep", "heatmap",
         concat(detail::range_params(),
                {req("beta", T::number, "chirp in beta_T"), opt("initial", T::string, "zero_t", "initial codeword"),
                 req("expected", T::string, "codeword compared with the chirped state")})},
        {"gate-fidelity", "heatmap",
         concat(detail::range_params(), {req("beta", T::number, "chirp in beta_T"),
                                         req("target", T::string, "identity, x_t or s_ry_sdag")})},
        {"ec-map", "heatmap",
         concat(detail::range_params(),
                {opt("threshold_fraction", T::number, 1.0 / 6.0, "correctable window in cell units"),
                 opt("normalization", T::string, "cell", "cell or zak"),
                 opt("method", T::string, "exact", "exact or asymptotic")})},
        {"hom-map", "hom-profile",
         concat(detail::comb_params(),
                {req("label", T::string, "codeword label"), opt("beta", T::number, 0.0, "chirp in beta_T"),
                 req("mu_min", T::number, "first frequency shift (fsr)"), req("mu_max", T::number, "last shift"),
                 req("n_mu", T::integer, "shift samples"), req("tau_min", T::number, "first delay (1/fsr)"),
                 req("tau_max", T::number, "last delay"), req("n_tau", T::integer, "delay samples")})},
        {"visibility-sweep", "heatmap",
         concat(detail::range_params(),
                {req("beta", T::number, "chirp in beta_T"), opt("label", T::string, "zero_t", "initial codeword"),
                 opt("s", T::integer, 1, "lattice delay index, tau = s pi/2"),
                 opt("k", T::integer, 1, "lattice shift index, mu = k/2")})},
        {"jsa", "jsi",
         {req("pm_width", T::number, "phase-matching width"), req("cavity_sigma", T::number, "cavity peak width"),
          req("n", T::integer, "grid points per axis"), opt("pump_width", T::number, 0.0, "0 = monochromatic"),
          opt("pump_center", T::number, 0.0, "pump frequency"), opt("cavity", T::boolean, true, "cavity filter")}},
    };
    return all;
}

inline const Scenario* find_scenario(const std::string& name) {
    for (auto& s : scenarios())
        if (s.name == name)
            return &s;
    return nullptr;
}

inline std::string scenario_names() {
    std::string out;
    for (auto& s : scenarios())
        out += (out.empty() ? "" : ", ") + s.name;
    return out;
}

struct RunConfig {
    std::string scenario;
    json params = json::object();
    std::filesystem::path output = "out";
};

struct Diagnostic {
    enum Severity { warning, error } severity = warning;
    std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& d) {
    return std::any_of(d.begin(), d.end(), [](auto& x) { return x.severity == Diagnostic::error; });
}

// The file is one JSON object of parameters; "scenario" and "output" are reserved.
inline RunConfig load_config(const std::filesystem::path& path, const std::string& scenario) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file " + path.string());
    RunConfig cfg;
    cfg.scenario = scenario;
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("config file must hold a JSON object");
    for (auto& [key, value] : doc.items()) {
        if (key == "scenario") {
            if (!value.is_string() || value.get<std::string>() != scenario)
                throw ConfigError("config file is for scenario " + value.dump() + ", not '" + scenario + "'");
        } else if (key == "output") {
            if (!value.is_string())
                throw ConfigError("output must be a string");
            cfg.output = value.get<std::string>();
        } else {
            cfg.params[key] = value;
        }
    }
    return cfg;
}

// key=value; the value is read as a JSON scalar when it parses as one, else as a string.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded() || value.is_structured())
        value = text;
    if (key == "output")
        cfg.output = text;
    else
        cfg.params[key] = value;
}

namespace detail {

inline bool type_ok(const json& v, ParamType t) {
    switch (t) {
    case ParamType::number: return v.is_number();
    case ParamType::integer:
        return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
                                         std::abs(v.get<double>()) < 1e9);
    case ParamType::string: return v.is_string();
    case ParamType::boolean: return v.is_boolean();
    }
    return false;
}

inline const char* type_name(ParamType t) {
    switch (t) {
    case ParamType::number: return "a number";
    case ParamType::integer: return "an integer";
    case ParamType::string: return "a string";
    case ParamType::boolean: return "a boolean";
    }
    return "";
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace detail

// Parameters in schema order with defaults filled in. Assumes validate() found no errors.
inline json resolve(const RunConfig& cfg) {
    const Scenario* sc = find_scenario(cfg.scenario);
    if (!sc)
        throw ConfigError("unknown scenario '" + cfg.scenario + "'");
    json out = json::object();
    for (auto& p : sc->params) {
        json v = cfg.params.contains(p.key) ? cfg.params[p.key] : p.fallback;
        if (p.type == ParamType::integer && v.is_number_float())
            v = static_cast<long long>(v.get<double>());
        if (p.type == ParamType::number && v.is_number_integer())
            v = v.get<double>();
        out[p.key] = v;
    }
    return out;
}

inline std::vector<Diagnostic> validate(const RunConfig& cfg) {
    std::vector<Diagnostic> d;
    auto error = [&](std::string m) { d.push_back({Diagnostic::error, std::move(m)}); };
    auto warn = [&](std::string m) { d.push_back({Diagnostic::warning, std::move(m)}); };

    const Scenario* sc = find_scenario(cfg.scenario);
    if (!sc) {
        error("unknown scenario '" + cfg.scenario + "' (expected one of: " + scenario_names() + ")");
        return d;
    }
    for (auto& [key, value] : cfg.params.items()) {
        const bool known = std::any_of(sc->params.begin(), sc->params.end(), [&](auto& p) { return p.key == key; });
        if (!known)
            error("unknown key '" + key + "' for scenario " + sc->name);
    }
    std::string missing;
    for (auto& p : sc->params) {
        if (!cfg.params.contains(p.key)) {
            if (p.required)
                missing += (missing.empty() ? "" : ", ") + p.key;
        } else if (!detail::type_ok(cfg.params[p.key], p.type)) {
            error("key '" + p.key + "' must be " + detail::type_name(p.type));
        }
    }
    if (!missing.empty())
        error("missing required keys: " + missing);
    if (has_errors(d))
        return d;

    const json p = resolve(cfg);
    auto num = [&](const char* k) { return p[k].get<double>(); };
    auto has = [&](const char* k) { return p.contains(k); };

    for (const char* k : {"kappa", "sigma", "kappa_min", "kappa_max", "sigma_min", "sigma_max", "pm_width", "cavity_sigma"})
        if (has(k) && !(num(k) > 0.0 && std::isfinite(num(k))))
            error(std::string(k) + " must be positive and finite");
    for (const char* k : {"pump_width"})
        if (has(k) && !(num(k) >= 0.0 && std::isfinite(num(k))))
            error(std::string(k) + " must be >= 0");
    for (const char* k : {"beta", "beta_min", "beta_max", "t_min", "t_max", "mu_min", "mu_max", "tau_min", "tau_max",
                          "pump_center"})
        if (has(k) && !std::isfinite(num(k)))
            error(std::string(k) + " must be finite");
    auto at_least = [&](const char* k, long long lo) {
        if (has(k) && p[k].get<long long>() < lo)
            error(std::string(k) + " must be >= " + std::to_string(lo));
    };
    at_least("n_kappa", 1);
    at_least("n_sigma", 1);
    at_least("n_beta", 2);
    at_least("n_t", 2);
    at_least("n_mu", 1);
    at_least("n_tau", 1);
    at_least("n", 64);
    at_least("n_max", 0);
    at_least("samples_per_fsr", 0);
    for (auto [lo, hi] : {std::pair{"kappa_min", "kappa_max"}, std::pair{"sigma_min", "sigma_max"},
                          std::pair{"beta_min", "beta_max"}, std::pair{"t_min", "t_max"},
                          std::pair{"mu_min", "mu_max"}, std::pair{"tau_min", "tau_max"}})
        if (has(lo) && num(lo) > num(hi))
            error(std::string(lo) + " exceeds " + hi);
    for (const char* k : {"label", "initial", "expected"})
        if (has(k)) {
            try {
                parse_label(p[k].get<std::string>());
            } catch (const Error& e) {
                error(std::string(k) + ": " + e.what());
            }
        }
    if (has("target")) {
        try {
            gates::parse(detail::lower(p["target"].get<std::string>()));
        } catch (const Error& e) {
            error(e.what());
        }
    }
    auto one_of = [&](const char* k, std::initializer_list<const char*> options) {
        if (!has(k))
            return;
        const auto v = p[k].get<std::string>();
        std::string list;
        for (auto o : options) {
            if (v == o)
                return;
            list += (list.empty() ? "" : ", ") + std::string(o);
        }
        error(std::string(k) + " must be one of: " + list);
    };
    if (sc->name == "ec-map") {
        one_of("method", {"exact", "asymptotic"});
        one_of("normalization", {"cell", "zak"});
        const double f = num("threshold_fraction");
        if (!(f > 0.0 && f <= 0.5))
            error("threshold_fraction must lie in (0, 1/2]");
    } else {
        one_of("method", {"exact", "leading_order", "numerical"});
    }
    one_of("quantity", {"frequency", "time"});
    if (has("kappa_log") && p["kappa_log"].get<bool>() && has("kappa_min") && !(num("kappa_min") > 0))
        error("kappa_log needs kappa_min > 0");
    if (has_errors(d))
        return d;

    // regime guards for the closed-form asymptotics
    for (const char* k : {"sigma", "sigma_max", "cavity_sigma"})
        if (has(k) && num(k) >= 0.5) {
            warn("peaks overlap; asymptotic formulas unreliable (" + std::string(k) + " >= 0.5 fsr)");
            break;
        }
    for (const char* k : {"kappa", "kappa_min"})
        if (has(k) && num(k) < 2.0) {
            warn("envelope spans only a few peaks; asymptotic formulas unreliable (" + std::string(k) + " < 2 fsr)");
            break;
        }
    return d;
}

// ---- deterministic text output ----

inline void append_number(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "nan";
        return;
    }
    if (std::isinf(v)) {
        out += v > 0 ? "inf" : "-inf";
        return;
    }
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<const char*> header) {
        for (auto h : header) {
            if (!text_.empty())
                text_ += ',';
            text_ += h;
        }
        text_ += '\n';
        columns_ = header.size();
    }

    void row(std::initializer_list<double> values) {
        if (values.size() != columns_)
            throw InvalidArgument("csv row width does not match the header");
        bool first = true;
        for (double v : values) {
            if (!first)
                text_ += ',';
            first = false;
            append_number(text_, v);
        }
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

private:
    std::string text_;
    std::size_t columns_ = 0;
};

// Pinned header rows, one per data file.
namespace schema {
inline constexpr const char* carpet = "beta_over_betaT,t_times_fsr,intensity";
inline constexpr const char* map = "kappa_over_fsr,sigma_over_fsr,value";
inline constexpr const char* hom = "mu_over_fsr,tau_times_fsr,coincidence";
inline constexpr const char* state = "omega_over_fsr,re_amplitude,im_amplitude";
inline constexpr const char* state_time = "t_times_fsr,re_amplitude,im_amplitude";
inline constexpr const char* jsa = "omega_s_over_fsr,omega_i_over_fsr,intensity";
inline constexpr const char* minus = "omega_minus_over_fsr,re_amplitude,im_amplitude";
} // namespace schema

struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files; // name, content
    json cell_warnings = json::array();
    std::vector<std::string> log;
    bool non_converged = false;
};

namespace detail {

inline CombSpec comb_spec(const json& p) {
    const auto n_max = p["n_max"].get<int>();
    const auto spf = p["samples_per_fsr"].get<int>();
    auto spec = CombSpec::make(p["kappa"].get<double>(), p["sigma"].get<double>(),
                               n_max > 0 ? std::optional<int>(n_max) : std::nullopt,
                               spf > 0 ? std::optional<int>(spf) : std::nullopt);
    spec.validate();
    return spec;
}

inline AxisRange axis(const json& p, const std::string& name) {
    return {p[name + "_min"].get<double>(), p[name + "_max"].get<double>(), p["n_" + name].get<int>(),
            p[name + "_log"].get<bool>()};
}

inline std::string map_csv(const FidelityMap& m) {
    CsvWriter w{"kappa_over_fsr", "sigma_over_fsr", "value"};
    for (std::size_t i = 0; i < m.kappa_axis.size(); ++i)
        for (std::size_t j = 0; j < m.sigma_axis.size(); ++j)
            w.row({m.kappa_axis[i], m.sigma_axis[j],
                   m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    return w.str();
}

inline void add_map(Artifacts& a, const FidelityMap& m) {
    a.files.emplace_back("map.csv", map_csv(m));
    for (auto& w : m.warnings) {
        a.cell_warnings.push_back(
            {{"kappa", m.kappa_axis[w.i]}, {"sigma", m.sigma_axis[w.j]}, {"message", w.message}});
        a.non_converged = a.non_converged || w.non_convergence;
    }
}

inline json factors_json(const NormalizationFactors& f) {
    return {{"n0_omega", f.n0_omega}, {"n1_omega", f.n1_omega}, {"n0_t", f.n0_t}, {"n1_t", f.n1_t}};
}

inline std::string state_csv(const SpectralState& s, const char* coordinate) {
    CsvWriter w{coordinate, "re_amplitude", "im_amplitude"};
    for (std::size_t j = 0; j < s.size(); ++j)
        w.row({s.coordinate(j), s[j].real(), s[j].imag()});
    return w.str();
}

inline Artifacts run_state(const json& p) {
    const auto spec = comb_spec(p);
    const auto label = parse_label(p["label"].get<std::string>());
    const auto psi = apply_chirp(build_physical_state(label, spec), Chirp::talbot(p["beta"].get<double>()));
    Artifacts a;
    a.files.emplace_back("state.csv", state_csv(psi, "omega_over_fsr"));
    a.files.emplace_back("state_time.csv", state_csv(to_time_domain(psi), "t_times_fsr"));

    json fid = json::object();
    for (auto l : codewords)
        fid[to_string(l)] = state_fidelity(psi, build_physical_state(l, spec));
    const auto nf = normalization_factors(spec);
    const double num_f =
        overlap(build_physical_state(LogicalLabel::Zero_omega, spec), build_physical_state(LogicalLabel::One_omega, spec))
            .real();
    const double num_t =
        overlap(build_physical_state(LogicalLabel::Zero_t, spec), build_physical_state(LogicalLabel::One_t, spec)).real();
    json r = {
        {"grid", {{"samples_per_fsr", spec.grid.samples_per_fsr}, {"span", spec.grid.span}, {"size", spec.grid.size()},
                  {"n_max", spec.n_max}}},
        {"norm", psi.norm()},
        {"fidelity_with", fid},
        {"normalization",
         {{"exact", factors_json(nf.exact)},
          {"leading_order", factors_json(nf.asymptotic)},
          {"leading_order_unreliable", nf.asymptotic_unreliable}}},
        {"overlap_frequency",
         {{"exact", analytic_overlap_freq(spec)}, {"leading_order", overlap_freq_leading_order(spec)}, {"numerical", num_f}}},
        {"overlap_time",
         {{"exact", analytic_overlap_time(spec)}, {"leading_order", overlap_time_leading_order(spec)}, {"numerical", num_t}}},
    };
    a.files.emplace_back("result.json", r.dump(2) + "\n");
    return a;
}

inline Artifacts run_carpet(const json& p, unsigned threads) {
    const auto spec = comb_spec(p);
    const auto c = talbot_carpet(spec, parse_label(p["label"].get<std::string>()),
                                 {p["beta_min"].get<double>(), p["beta_max"].get<double>()}, p["n_beta"].get<int>(),
                                 p["n_t"].get<int>(), {p["t_min"].get<double>(), p["t_max"].get<double>()}, threads);
    CsvWriter w{"beta_over_betaT", "t_times_fsr", "intensity"};
    for (std::size_t i = 0; i < c.beta_axis.size(); ++i)
        for (std::size_t k = 0; k < c.t_axis.size(); ++k)
            w.row({c.beta_axis[i], c.t_axis[k], c.intensity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))});
    Artifacts a;
    a.files.emplace_back("carpet.csv", w.str());
    double dev = 0;
    for (double n : c.raw_norms)
        dev = std::max(dev, std::abs(n - 1.0));
    std::string line = "rows renormalized; largest raw squared-norm deviation ";
    append_number(line, dev);
    a.log.push_back(line);
    return a;
}

inline Artifacts run_overlap_map(const json& p, unsigned threads) {
    const bool freq = p["quantity"].get<std::string>() == "frequency";
    const auto method = p["method"].get<std::string>();
    auto m = sweep_map(axis(p, "kappa"), axis(p, "sigma"), threads, [&](double k, double s) {
        const auto spec = CombSpec::make(k, s);
        if (method == "leading_order")
            return freq ? overlap_freq_leading_order(spec) : overlap_time_leading_order(spec);
        if (method == "numerical") {
            const auto a = build_physical_state(freq ? LogicalLabel::Zero_omega : LogicalLabel::Zero_t, spec);
            const auto b = build_physical_state(freq ? LogicalLabel::One_omega : LogicalLabel::One_t, spec);
            return overlap(a, b).real();
        }
        return freq ? analytic_overlap_freq(spec) : analytic_overlap_time(spec);
    });
    Artifacts a;
    add_map(a, m);
    return a;
}

inline Artifacts run_fidelity_sweep(const json& p, unsigned threads) {
    SweepTarget t;
    t.metric = SweepMetric::state;
    t.initial = parse_label(p["initial"].get<std::string>());
    t.expected = parse_label(p["expected"].get<std::string>());
    Artifacts a;
    add_map(a, fidelity_sweep(Chirp::talbot(p["beta"].get<double>()), t, axis(p, "kappa"), axis(p, "sigma"), threads));
    return a;
}

inline Artifacts run_gate_fidelity(const json& p, unsigned threads) {
    SweepTarget t;
    t.metric = SweepMetric::gate;
    t.gate = gates::parse(lower(p["target"].get<std::string>()));
    Artifacts a;
    add_map(a, fidelity_sweep(Chirp::talbot(p["beta"].get<double>()), t, axis(p, "kappa"), axis(p, "sigma"), threads));
    return a;
}

inline Artifacts run_ec_map(const json& p, unsigned threads) {
    const double f = p["threshold_fraction"].get<double>();
    const auto norm = p["normalization"].get<std::string>() == "zak" ? KgNormalization::zak : KgNormalization::cell;
    FidelityMap m;
    if (p["method"].get<std::string>() == "asymptotic") {
        m = sweep_map(axis(p, "kappa"), axis(p, "sigma"), threads, [&](double k, double s) {
            ModularSpec ms;
            ms.spec.envelope_width = k;
            ms.spec.peak_width = s;
            ms.threshold_fraction = f;
            return 1.0 - p_no_error_asymptotic(ms);
        });
    } else {
        m = error_map(axis(p, "kappa"), axis(p, "sigma"), f, norm, threads);
    }
    Artifacts a;
    add_map(a, m);
    return a;
}

inline json lattice_json(const std::vector<double>& mu, const std::vector<double>& tau) {
    const double tp = IdealLattice::tau_pitch, mp = IdealLattice::mu_pitch;
    const int s_min = static_cast<int>(std::floor(tau.front() / tp)), s_max = static_cast<int>(std::ceil(tau.back() / tp));
    const int k_min = static_cast<int>(std::floor(mu.front() / mp)), k_max = static_cast<int>(std::ceil(mu.back() / mp));
    json lattices = json::object();
    for (auto l : codewords) {
        const auto lat = ideal_lattice(l, s_min, s_max, k_min, k_max);
        json sign = json::array(), weight = json::array();
        for (Eigen::Index r = 0; r < lat.sign.rows(); ++r) {
            json srow = json::array(), wrow = json::array();
            for (Eigen::Index c = 0; c < lat.sign.cols(); ++c) {
                srow.push_back(lat.sign(r, c));
                wrow.push_back(lat.weight(r, c));
            }
            sign.push_back(srow);
            weight.push_back(wrow);
        }
        lattices[to_string(l)] = {{"sign", sign}, {"weight", weight}};
    }
    return {{"schema_version", schema_version},
            {"tau_pitch_times_fsr", tp},
            {"mu_pitch_over_fsr", mp},
            {"s_range", {s_min, s_max}},
            {"k_range", {k_min, k_max}},
            {"layout", "sign[k - k_min][s - s_min] at tau = s tau_pitch, mu = k mu_pitch"},
            {"lattices", lattices}};
}

inline Artifacts run_hom_map(const json& p, unsigned threads) {
    const auto spec = comb_spec(p);
    const auto state = apply_chirp(build_physical_state(parse_label(p["label"].get<std::string>()), spec),
                                   Chirp::talbot(p["beta"].get<double>()));
    const auto mu = linspace(p["mu_min"].get<double>(), p["mu_max"].get<double>(), p["n_mu"].get<int>());
    const auto tau = linspace(p["tau_min"].get<double>(), p["tau_max"].get<double>(), p["n_tau"].get<int>());
    const auto m = hom_coincidence(state, mu, tau, threads);
    CsvWriter w{"mu_over_fsr", "tau_times_fsr", "coincidence"};
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t k = 0; k < tau.size(); ++k)
            w.row({mu[i], tau[k], m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))});
    Artifacts a;
    a.files.emplace_back("hom.csv", w.str());
    a.files.emplace_back("lattice.json", lattice_json(mu, tau).dump(2) + "\n");
    a.log = m.log;
    return a;
}

inline Artifacts run_visibility_sweep(const json& p, unsigned threads) {
    const LatticePoint pt{p["s"].get<int>(), p["k"].get<int>()};
    Artifacts a;
    add_map(a, visibility_sweep(Chirp::talbot(p["beta"].get<double>()), parse_label(p["label"].get<std::string>()), pt,
                                axis(p, "kappa"), axis(p, "sigma"), threads));
    return a;
}

inline Artifacts run_jsa(const json& p, unsigned threads) {
    JsaSpec s;
    s.pm_width = p["pm_width"].get<double>();
    s.cav.peak_width = p["cavity_sigma"].get<double>();
    s.pump_width = p["pump_width"].get<double>();
    s.pump_center = p["pump_center"].get<double>();
    s.cavity = p["cavity"].get<bool>();
    const auto g = build_jsa(s, p["n"].get<int>(), threads);
    CsvWriter w{"omega_s_over_fsr", "omega_i_over_fsr", "intensity"};
    for (std::size_t a = 0; a < g.omega_s.size(); ++a)
        for (std::size_t b = 0; b < g.omega_i.size(); ++b)
            w.row({g.omega_s[a], g.omega_i[b], std::norm(g.amplitude(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))});
    Artifacts out;
    out.files.emplace_back("jsa.csv", w.str());
    json r = {{"step", g.step}, {"monochromatic", g.monochromatic},
              {"sigma_eff", s.sigma_eff()}, {"kappa_eff", s.kappa_eff()}};
    if (g.monochromatic) {
        const auto slice = g.minus_slice();
        out.files.emplace_back("minus.csv", state_csv(slice, "omega_minus_over_fsr"));
        r["slice_vs_reduction_fidelity"] = state_fidelity(slice, reduce_to_minus(s, slice.grid()));
        if (s.cavity) {
            const auto eff = s.effective_comb();
            r["reduction_vs_effective_comb_fidelity"] =
                state_fidelity(reduce_to_minus(s, eff.grid), build_physical_state(LogicalLabel::Plus_omega, eff));
        }
    }
    out.files.emplace_back("result.json", r.dump(2) + "\n");
    return out;
}

} // namespace detail

inline Artifacts compute(const RunConfig& cfg, unsigned threads) {
    const json p = resolve(cfg);
    const auto& s = cfg.scenario;
    if (s == "state")
        return detail::run_state(p);
    if (s == "carpet")
        return detail::run_carpet(p, threads);
    if (s == "overlap-map")
        return detail::run_overlap_map(p, threads);
    if (s == "fidelity-sweep")
        return detail::run_fidelity_sweep(p, threads);
    if (s == "gate-fidelity")
        return detail::run_gate_fidelity(p, threads);
    if (s == "ec-map")
        return detail::run_ec_map(p, threads);
    if (s == "hom-map")
        return detail::run_hom_map(p, threads);
    if (s == "visibility-sweep")
        return detail::run_visibility_sweep(p, threads);
    if (s == "jsa")
        return detail::run_jsa(p, threads);
    throw ConfigError("unknown scenario '" + s + "'");
}

// Physical-unit example: fsr / 2 pi = 40 GHz gives beta_T = pi / fsr^2 in ps^2.
inline json units_json() {
    const double fsr = 2 * std::numbers::pi * 40e9;
    return {{"frequency", "fsr"},
            {"time", "1/fsr"},
            {"chirp", "beta_T = pi/fsr^2"},
            {"example", {{"fsr_over_2pi_GHz", 40.0}, {"beta_T_ps2", std::numbers::pi / (fsr * fsr) * 1e24}}}};
}

inline json manifest(const RunConfig& cfg, const std::vector<Diagnostic>& diags, const Artifacts& a) {
    const Scenario* sc = find_scenario(cfg.scenario);
    json files = json::array();
    for (auto& f : a.files)
        files.push_back(f.first);
    json warnings = json::array();
    for (auto& d : diags)
        if (d.severity == Diagnostic::warning)
            warnings.push_back(d.message);
    return {{"tool", tool_name},
            {"version", tool_version},
            {"schema_version", schema_version},
            {"scenario", cfg.scenario},
            {"figure_class", sc && !sc->figure_class.empty() ? json(sc->figure_class) : json(nullptr)},
            {"config", resolve(cfg)},
            {"files", files},
            {"status", a.non_converged ? "non_convergence" : "ok"},
            {"warnings", warnings},
            {"cell_warnings", a.cell_warnings},
            {"log", a.log},
            {"units", units_json()}};
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out)
        throw IoError("failed writing " + path.string());
}

// Validates, computes and writes the artifacts plus manifest.json. Returns the exit code.
inline int run(const RunConfig& cfg, unsigned threads, std::ostream& err) {
    const auto diags = validate(cfg);
    for (auto& d : diags)
        err << (d.severity == Diagnostic::error ? "error: " : "warning: ") << d.message << '\n';
    if (has_errors(diags))
        return exit_config;

    Artifacts a;
    try {
        a = compute(cfg, std::max(1u, threads));
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << '\n';
        return exit_non_convergence;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        std::error_code ec;
        std::filesystem::create_directories(cfg.output, ec);
        if (ec)
            throw IoError("cannot create output directory " + cfg.output.string() + ": " + ec.message());
        for (auto& [name, content] : a.files)
            write_file(cfg.output / name, content);
        write_file(cfg.output / "manifest.json", manifest(cfg, diags, a).dump(2) + "\n");
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }
    for (auto& w : a.cell_warnings)
        err << "warning: cell kappa=" << w["kappa"].dump() << " sigma=" << w["sigma"].dump() << ": "
            << w["message"].get<std::string>() << '\n';
    return a.non_converged ? exit_non_convergence : exit_ok;
}

} // namespace tfgkp::cli

#endif
