#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <tfgkp/scenario.hpp>

using namespace tfgkp;
using namespace tfgkp::cli;
namespace fs = std::filesystem;

namespace {

RunConfig make(const std::string& scenario, json params) {
    RunConfig c;
    c.scenario = scenario;
    c.params = std::move(params);
    return c;
}

std::vector<std::string> errors(const std::vector<Diagnostic>& d) {
    std::vector<std::string> out;
    for (auto& x : d)
        if (x.severity == Diagnostic::error)
            out.push_back(x.message);
    return out;
}

std::vector<std::string> warnings(const std::vector<Diagnostic>& d) {
    std::vector<std::string> out;
    for (auto& x : d)
        if (x.severity == Diagnostic::warning)
            out.push_back(x.message);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::size_t line_count(const fs::path& p) {
    const auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("tfgkp_cli_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

int run_quiet(const RunConfig& cfg, unsigned threads = 1) {
    std::ostringstream err;
    return run(cfg, threads, err);
}

json small(const std::string& scenario) {
    const json ranges = {{"kappa_min", 2}, {"kappa_max", 6}, {"n_kappa", 3},
                         {"sigma_min", 0.05}, {"sigma_max", 0.2}, {"n_sigma", 2}};
    auto with = [&](json extra) {
        json p = ranges;
        for (auto& [k, v] : extra.items())
            p[k] = v;
        return p;
    };
    if (scenario == "state")
        return {{"kappa", 3}, {"sigma", 0.1}, {"label", "one_t"}, {"beta", 0.5}};
    if (scenario == "carpet")
        return {{"kappa", 3}, {"sigma", 0.1}, {"beta_min", 0}, {"beta_max", 2}, {"n_beta", 5}, {"n_t", 17}};
    if (scenario == "overlap-map")
        return ranges;
    if (scenario == "fidelity-sweep")
        return with({{"beta", 1}, {"expected", "one_t"}});
    if (scenario == "gate-fidelity")
        return with({{"beta", 1}, {"target", "x_t"}});
    if (scenario == "ec-map")
        return ranges;
    if (scenario == "hom-map")
        return {{"kappa", 3},    {"sigma", 0.1},   {"label", "zero_t"}, {"mu_min", -0.5}, {"mu_max", 0.5},
                {"n_mu", 3},     {"tau_min", -3.2}, {"tau_max", 3.2},    {"n_tau", 5}};
    if (scenario == "visibility-sweep")
        return with({{"beta", 0.5}});
    if (scenario == "jsa")
        return {{"pm_width", 2.5}, {"cavity_sigma", 0.25}, {"n", 512}};
    return json::object();
}

} // namespace

// ---- validation ----

TEST(Validate, EmptyConfigNamesEveryMissingKey) {
    for (auto& sc : scenarios()) {
        const auto e = errors(validate(make(sc.name, json::object())));
        ASSERT_EQ(e.size(), 1u) << sc.name;
        for (auto& p : sc.params)
            if (p.required) {
                EXPECT_NE(e[0].find(p.key), std::string::npos) << sc.name << " " << p.key;
            }
    }
}

TEST(Validate, SmallConfigsAreClean) {
    for (auto& sc : scenarios())
        EXPECT_TRUE(errors(validate(make(sc.name, small(sc.name)))).empty()) << sc.name;
}

TEST(Validate, UnknownScenarioAndKeysAreRejected) {
    EXPECT_EQ(errors(validate(make("bogus", json::object()))).size(), 1u);
    auto p = small("state");
    p["sigmaa"] = 0.1;
    const auto e = errors(validate(make("state", p)));
    ASSERT_EQ(e.size(), 1u);
    EXPECT_NE(e[0].find("sigmaa"), std::string::npos);
}

TEST(Validate, OperatingPointHasNoWarnings) {
    const auto d = validate(make("state", {{"kappa", 10}, {"sigma", 0.05}, {"label", "zero_t"}}));
    EXPECT_TRUE(d.empty());
}

TEST(Validate, OverlappingPeaksWarn) {
    const auto d = validate(make("state", {{"kappa", 10}, {"sigma", 0.6}, {"label", "zero_t"}}));
    EXPECT_TRUE(errors(d).empty());
    const auto w = warnings(d);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("peaks overlap; asymptotic formulas unreliable"), std::string::npos);
}

TEST(Validate, NarrowEnvelopeWarns) {
    const auto w = warnings(validate(make("state", {{"kappa", 1}, {"sigma", 0.05}, {"label", "zero_t"}})));
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("kappa"), std::string::npos);
}

TEST(Validate, NegativeSigmaIsAHardError) {
    const auto e = errors(validate(make("state", {{"kappa", 10}, {"sigma", -0.05}, {"label", "zero_t"}})));
    ASSERT_EQ(e.size(), 1u);
    EXPECT_NE(e[0].find("sigma"), std::string::npos);
}

TEST(Validate, TypesAreChecked) {
    auto p = small("carpet");
    p["n_beta"] = 2.5;
    p["kappa"] = "ten";
    EXPECT_EQ(errors(validate(make("carpet", p))).size(), 2u);
    p = small("carpet");
    p["n_beta"] = 5.0;
    EXPECT_TRUE(errors(validate(make("carpet", p))).empty());
    EXPECT_EQ(resolve(make("carpet", p))["n_beta"], 5);
}

TEST(Validate, SemanticChecks) {
    auto bad = [](const std::string& sc, const std::string& key, json value) {
        auto p = small(sc);
        p[key] = value;
        return errors(validate(make(sc, p))).size();
    };
    EXPECT_EQ(bad("state", "label", "three_t"), 1u);
    EXPECT_EQ(bad("gate-fidelity", "target", "hadamard"), 1u);
    EXPECT_EQ(bad("gate-fidelity", "target", "X_T"), 0u);
    EXPECT_EQ(bad("overlap-map", "kappa_min", 10), 1u);
    EXPECT_EQ(bad("overlap-map", "method", "guess"), 1u);
    EXPECT_EQ(bad("overlap-map", "quantity", "phase"), 1u);
    EXPECT_EQ(bad("ec-map", "threshold_fraction", 0.6), 1u);
    EXPECT_EQ(bad("ec-map", "threshold_fraction", 0.5), 0u);
    EXPECT_EQ(bad("ec-map", "normalization", "zak"), 0u);
    EXPECT_EQ(bad("ec-map", "method", "leading_order"), 1u);
    EXPECT_EQ(bad("carpet", "n_beta", 1), 1u);
    EXPECT_EQ(bad("jsa", "pump_width", -0.1), 1u);
    EXPECT_EQ(bad("hom-map", "tau_min", 5.0), 1u);
}

TEST(Resolve, FillsDefaultsInSchemaOrder) {
    const auto r = resolve(make("carpet", small("carpet")));
    EXPECT_EQ(r["label"], "zero_t");
    EXPECT_EQ(r["n_t"], 17);
    EXPECT_DOUBLE_EQ(r["t_max"].get<double>(), 4 * std::numbers::pi);
    EXPECT_EQ(r.begin().key(), "kappa");
    EXPECT_TRUE(r["kappa"].is_number_float());
}

// ---- config loading ----

TEST(LoadConfig, ReadsParametersAndReservedKeys) {
    TempDir d;
    std::ofstream(d / "c.json") << R"({"scenario": "state", "output": "elsewhere", "kappa": 4, "label": "one_t"})";
    const auto c = load_config(d / "c.json", "state");
    EXPECT_EQ(c.output, fs::path("elsewhere"));
    EXPECT_EQ(c.params.size(), 2u);
    EXPECT_THROW(load_config(d / "c.json", "carpet"), ConfigError);
}

TEST(LoadConfig, ErrorsAreClassified) {
    TempDir d;
    EXPECT_THROW(load_config(d / "missing.json", "state"), IoError);
    std::ofstream(d / "bad.json") << "{\"kappa\": ";
    EXPECT_THROW(load_config(d / "bad.json", "state"), ConfigError);
    std::ofstream(d / "arr.json") << "[1, 2]";
    EXPECT_THROW(load_config(d / "arr.json", "state"), ConfigError);
}

TEST(ApplyOverride, ParsesScalarsAndFallsBackToStrings) {
    RunConfig c;
    apply_override(c, "kappa=4.5");
    apply_override(c, "n_t=9");
    apply_override(c, "kappa_log=true");
    apply_override(c, "label=one_t");
    apply_override(c, "output=dir/x");
    EXPECT_DOUBLE_EQ(c.params["kappa"].get<double>(), 4.5);
    EXPECT_TRUE(c.params["n_t"].is_number_integer());
    EXPECT_TRUE(c.params["kappa_log"].get<bool>());
    EXPECT_EQ(c.params["label"], "one_t");
    EXPECT_EQ(c.output, fs::path("dir/x"));
    EXPECT_THROW(apply_override(c, "novalue"), ConfigError);
    EXPECT_THROW(apply_override(c, "=3"), ConfigError);
}

// ---- artifacts ----

TEST(Artifacts, NumbersUseTheShortestRoundTripForm) {
    std::string s;
    append_number(s, 0.1);
    s += ' ';
    append_number(s, 2.0);
    s += ' ';
    append_number(s, std::nan(""));
    s += ' ';
    append_number(s, -HUGE_VAL);
    EXPECT_EQ(s, "0.1 2 nan -inf");
}

TEST(Artifacts, GoldenHeaderRows) {
    const std::map<std::string, std::map<std::string, std::string>> golden{
        {"state", {{"state.csv", "omega_over_fsr,re_amplitude,im_amplitude"},
                   {"state_time.csv", "t_times_fsr,re_amplitude,im_amplitude"}}},
        {"carpet", {{"carpet.csv", "beta_over_betaT,t_times_fsr,intensity"}}},
        {"overlap-map", {{"map.csv", "kappa_over_fsr,sigma_over_fsr,value"}}},
        {"fidelity-sweep", {{"map.csv", "kappa_over_fsr,sigma_over_fsr,value"}}},
        {"gate-fidelity", {{"map.csv", "kappa_over_fsr,sigma_over_fsr,value"}}},
        {"ec-map", {{"map.csv", "kappa_over_fsr,sigma_over_fsr,value"}}},
        {"hom-map", {{"hom.csv", "mu_over_fsr,tau_times_fsr,coincidence"}}},
        {"visibility-sweep", {{"map.csv", "kappa_over_fsr,sigma_over_fsr,value"}}},
        {"jsa", {{"jsa.csv", "omega_s_over_fsr,omega_i_over_fsr,intensity"},
                 {"minus.csv", "omega_minus_over_fsr,re_amplitude,im_amplitude"}}},
    };
    ASSERT_EQ(golden.size(), scenarios().size());
    TempDir d;
    for (auto& [sc, files] : golden) {
        auto cfg = make(sc, small(sc));
        cfg.output = d / sc;
        ASSERT_EQ(run_quiet(cfg), exit_ok) << sc;
        for (auto& [file, header] : files)
            EXPECT_EQ(first_line(cfg.output / file), header) << sc << " " << file;
        EXPECT_TRUE(fs::exists(cfg.output / "manifest.json")) << sc;
    }
    EXPECT_EQ(schema::carpet, golden.at("carpet").at("carpet.csv"));
    EXPECT_EQ(schema::map, golden.at("ec-map").at("map.csv"));
    EXPECT_EQ(schema::hom, golden.at("hom-map").at("hom.csv"));
}

TEST(Artifacts, LongFormatRowCounts) {
    TempDir d;
    auto cfg = make("carpet", small("carpet"));
    cfg.output = d / "c";
    ASSERT_EQ(run_quiet(cfg), exit_ok);
    EXPECT_EQ(line_count(cfg.output / "carpet.csv"), 1u + 5u * 17u);
    cfg = make("gate-fidelity", small("gate-fidelity"));
    cfg.output = d / "g";
    ASSERT_EQ(run_quiet(cfg), exit_ok);
    EXPECT_EQ(line_count(cfg.output / "map.csv"), 1u + 3u * 2u);
}

TEST(Artifacts, RerunsAreByteIdenticalAcrossThreadCounts) {
    TempDir d;
    for (auto& sc : scenarios()) {
        auto a = make(sc.name, small(sc.name)), b = a;
        a.output = d / (sc.name + "_a");
        b.output = d / (sc.name + "_b");
        ASSERT_EQ(run_quiet(a, 1), exit_ok);
        ASSERT_EQ(run_quiet(b, 3), exit_ok);
        for (auto& f : fs::directory_iterator(a.output))
            EXPECT_EQ(slurp(f.path()), slurp(b.output / f.path().filename())) << sc.name << " " << f.path().filename();
    }
}

TEST(Artifacts, ManifestEchoesTheResolvedConfig) {
    TempDir d;
    auto cfg = make("ec-map", small("ec-map"));
    cfg.output = d / "ec";
    ASSERT_EQ(run_quiet(cfg), exit_ok);
    const auto m = json::parse(slurp(cfg.output / "manifest.json"));
    EXPECT_EQ(m["tool"], tool_name);
    EXPECT_EQ(m["version"], tool_version);
    EXPECT_EQ(m["schema_version"], schema_version);
    EXPECT_EQ(m["scenario"], "ec-map");
    EXPECT_EQ(m["figure_class"], "heatmap");
    EXPECT_EQ(m["config"], resolve(cfg));
    EXPECT_DOUBLE_EQ(m["config"]["threshold_fraction"].get<double>(), 1.0 / 6.0);
    EXPECT_EQ(m["files"], json::array({"map.csv"}));
    EXPECT_EQ(m["status"], "ok");
    EXPECT_NEAR(m["units"]["example"]["beta_T_ps2"].get<double>(), 49.74, 0.01);
}

TEST(Artifacts, FailedCellsAreNanWithManifestWarnings) {
    TempDir d;
    auto p = small("gate-fidelity");
    p["kappa_min"] = 0.1;
    p["kappa_max"] = 3;
    p["n_kappa"] = 2;
    auto cfg = make("gate-fidelity", p);
    cfg.output = d / "g";
    std::ostringstream err;
    ASSERT_EQ(run(cfg, 1, err), exit_ok);
    const auto m = json::parse(slurp(cfg.output / "manifest.json"));
    ASSERT_EQ(m["cell_warnings"].size(), 2u);
    EXPECT_DOUBLE_EQ(m["cell_warnings"][0]["kappa"].get<double>(), 0.1);
    EXPECT_NE(first_line(cfg.output / "map.csv").find("value"), std::string::npos);
    EXPECT_NE(slurp(cfg.output / "map.csv").find("0.1,0.05,nan"), std::string::npos);
    EXPECT_NE(err.str().find("warning: cell"), std::string::npos);
}

TEST(Artifacts, LatticeJsonHoldsAllCodewords) {
    TempDir d;
    auto cfg = make("hom-map", small("hom-map"));
    cfg.output = d / "h";
    ASSERT_EQ(run_quiet(cfg), exit_ok);
    const auto l = json::parse(slurp(cfg.output / "lattice.json"));
    EXPECT_EQ(l["lattices"].size(), 6u);
    const auto s = l["s_range"], k = l["k_range"];
    EXPECT_EQ(s, json::array({-3, 3}));
    EXPECT_EQ(k, json::array({-1, 1}));
    const auto& sign = l["lattices"]["zero_t"]["sign"];
    ASSERT_EQ(sign.size(), 3u);
    ASSERT_EQ(sign[0].size(), 7u);
    // tau = 0, mu = 0 is a positive lattice point for every codeword
    for (auto& [name, lat] : l["lattices"].items())
        EXPECT_EQ(lat["sign"][1][3], 1) << name;
}

TEST(Artifacts, StateResultCarriesOverlapsAndNorms) {
    TempDir d;
    auto cfg = make("state", {{"kappa", 10}, {"sigma", 0.05}, {"label", "zero_t"}, {"beta", 1}});
    cfg.output = d / "s";
    ASSERT_EQ(run_quiet(cfg), exit_ok);
    const auto r = json::parse(slurp(cfg.output / "result.json"));
    EXPECT_NEAR(r["norm"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(r["fidelity_with"]["one_t"].get<double>(), 0.288, 5e-3);
    EXPECT_GT(r["overlap_frequency"]["exact"].get<double>(), 0.0);
}

TEST(ExitCodes, ConfigErrorsWriteNothing) {
    TempDir d;
    auto cfg = make("state", json::object());
    cfg.output = d / "none";
    std::ostringstream err;
    EXPECT_EQ(run(cfg, 1, err), exit_config);
    EXPECT_FALSE(fs::exists(cfg.output));
    EXPECT_NE(err.str().find("kappa, sigma, label"), std::string::npos);
}

TEST(ExitCodes, RuntimeLibraryErrorsAreConfigErrors) {
    TempDir d;
    auto cfg = make("jsa", {{"pm_width", 3}, {"cavity_sigma", 0.01}, {"n", 256}});
    cfg.output = d / "j";
    EXPECT_EQ(run_quiet(cfg), exit_config);
}

TEST(ExitCodes, UnwritableOutputIsAnIoError) {
    TempDir d;
    std::ofstream(d / "file") << "x";
    auto cfg = make("state", small("state"));
    cfg.output = d / "file" / "sub";
    EXPECT_EQ(run_quiet(cfg), exit_io);
}

// ---- the executable ----

#ifdef TALBOT_GKP_EXE

namespace {

struct Result {
    int code = -1;
    std::string output;
};

Result shell(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" TALBOT_GKP_EXE "' " + args + " 2>&1";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p))
        r.output += buf;
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

} // namespace

TEST(Executable, EmptyConfigExitsTwoNamingEveryKey) {
    TempDir d;
    std::ofstream(d / "empty.json") << "{}";
    const auto r = shell("carpet --config '" + (d / "empty.json").string() + "' --out '" + (d / "o").string() + "'");
    EXPECT_EQ(r.code, 2);
    for (auto k : {"kappa", "sigma", "beta_min", "beta_max", "n_beta"})
        EXPECT_NE(r.output.find(k), std::string::npos) << k;
    EXPECT_FALSE(fs::exists(d / "o"));
}

TEST(Executable, SetOverridesTheConfigFile) {
    TempDir d;
    std::ofstream(d / "c.json") << small("overlap-map").dump();
    const auto r = shell("overlap-map -c '" + (d / "c.json").string() + "' --set n_kappa=2 --set method=leading_order -o '" +
                         (d / "o").string() + "' --threads 2");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto m = json::parse(slurp(d / "o" / "manifest.json"));
    EXPECT_EQ(m["config"]["n_kappa"], 2);
    EXPECT_EQ(m["config"]["method"], "leading_order");
    EXPECT_EQ(line_count(d / "o" / "map.csv"), 1u + 2u * 2u);
}

TEST(Executable, ExitCodes) {
    TempDir d;
    EXPECT_EQ(shell("--help").code, 0);
    EXPECT_EQ(shell("").code, 2);
    EXPECT_EQ(shell("bogus").code, 2);
    EXPECT_EQ(shell("state --threads -3").code, 2);
    EXPECT_EQ(shell("state --config '" + (d / "missing.json").string() + "'").code, 4);
    std::ofstream(d / "f") << "x";
    EXPECT_EQ(shell("state -s kappa=3 -s sigma=0.1 -s label=one_t -o '" + (d / "f" / "x").string() + "'").code, 4);
    const auto dry = shell("state --dry-run -s kappa=3 -s sigma=0.1 -s label=one_t");
    EXPECT_EQ(dry.code, 0);
    EXPECT_NE(dry.output.find("\"samples_per_fsr\": 0"), std::string::npos);
}

TEST(Executable, ThreadEnvironmentFallbackGivesIdenticalBytes) {
    TempDir d;
    std::ofstream(d / "c.json") << small("fidelity-sweep").dump();
    const std::string c = " -c '" + (d / "c.json").string() + "'";
    ASSERT_EQ(shell("fidelity-sweep" + c + " -o '" + (d / "a").string() + "'", "TALBOT_GKP_THREADS=1").code, 0);
    ASSERT_EQ(shell("fidelity-sweep" + c + " -o '" + (d / "b").string() + "'", "TALBOT_GKP_THREADS=4").code, 0);
    EXPECT_EQ(slurp(d / "a" / "map.csv"), slurp(d / "b" / "map.csv"));
    EXPECT_EQ(slurp(d / "a" / "manifest.json"), slurp(d / "b" / "manifest.json"));
}

#endif

#ifdef TFGKP_CONFIG_DIR

TEST(SampleConfigs, EveryScenarioHasAValidSample) {
    for (auto& sc : scenarios()) {
        std::string file = sc.name;
        std::replace(file.begin(), file.end(), '-', '_');
        const fs::path p = fs::path(TFGKP_CONFIG_DIR) / (file + ".json");
        ASSERT_TRUE(fs::exists(p)) << p;
        const auto cfg = load_config(p, sc.name);
        EXPECT_TRUE(errors(validate(cfg)).empty()) << p;
    }
}

TEST(SampleConfigs, CarpetMatchesTheFlagshipParameters) {
    const auto r = resolve(load_config(fs::path(TFGKP_CONFIG_DIR) / "carpet.json", "carpet"));
    EXPECT_DOUBLE_EQ(r["kappa"].get<double>(), 10.0);
    EXPECT_DOUBLE_EQ(r["sigma"].get<double>(), 0.05);
    EXPECT_EQ(r["n_beta"], 201);
    EXPECT_TRUE(validate(load_config(fs::path(TFGKP_CONFIG_DIR) / "state.json", "state")).empty());
}

#endif
