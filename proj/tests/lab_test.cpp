#include "bwn/errors.hpp"
#include "bwn/lab.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bwn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("bwn_lab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string error_text(const std::string& cfg) {
    try {
        parse_config(cfg);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string verdict(const RunManifest& m, const std::string& key) {
    for (const auto& [k, v] : m.verdicts)
        if (k == key) return v;
    return "";
}

// small enough to run in a unit test
ScenarioConfig small_p71() {
    ScenarioConfig c = scenario_preset("P71");
    c.pipelines = {"j-diagnose", "simulate"};
    c.levels = 3;
    c.n_paths = 200;
    c.write_paths = 20;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Fnv, KnownVectors) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Config, DefaultsRoundTrip) {
    ScenarioConfig c;
    EXPECT_EQ(parse_config(to_text(c)), c);
}

TEST(Config, PresetsRoundTrip) {
    for (const char* id : {"P71", "P72", "P74", "P78", "P713", "P717", "P718(i)", "P718(ii)"}) {
        ScenarioConfig c = scenario_preset(id);
        EXPECT_TRUE(validate_config(c).empty()) << id;
        ScenarioConfig back = parse_config(to_text(c));
        EXPECT_EQ(back, c) << id;
        EXPECT_EQ(to_text(back), to_text(c)) << id;
    }
}

TEST(Config, OddValuesRoundTrip) {
    ScenarioConfig c;
    c.theta = 0.1 + 0.2;
    c.T = std::numeric_limits<double>::infinity();
    c.pipelines = {"j-diagnose"};
    c.seed = 18446744073709551557ULL;
    c.points = {{1.0 / 3}, {0.7}};
    c.times = {1e-7, 2.5};
    c.output_dir = "/tmp/somewhere else";
    EXPECT_EQ(parse_config(to_text(c)), c);
}

TEST(Config, PresetFillsUnsetKeys) {
    ScenarioConfig c = parse_config("scenario = P717\ntheta = 1.75\n");
    EXPECT_EQ(c.domain, "halfspace:2");
    EXPECT_EQ(c.noise, "lebesgue");
    EXPECT_EQ(c.delta, 50);
    EXPECT_EQ(c.theta, 1.75);
}

TEST(Config, CommentsAndBlankLines) {
    ScenarioConfig c = parse_config("# probe\n\nscenario = P71   # interval\n  theta=2.5\n");
    EXPECT_EQ(c.theta, 2.5);
}

TEST(Config, ListsEveryError) {
    std::string msg = error_text("p = 0.5\nlevels = 40\nbogus = 1\nnoise = purple\npoints = 0.5;1.5\ntheta = x\n");
    for (const char* part : {"p: must be > 1", "levels: must lie", "unknown key bogus", "noise: unknown purple",
                             "points: 1.5 is not inside", "theta: not a number"})
        EXPECT_NE(msg.find(part), std::string::npos) << part << "\n" << msg;
}

TEST(Config, DuplicateKey) {
    EXPECT_NE(error_text("theta = 2\ntheta = 2.5\n").find("duplicate key theta"), std::string::npos);
}

TEST(Config, PresetConflicts) {
    std::string msg = error_text("scenario = P78\nnoise = endpoints\nkernel = exact\n");
    EXPECT_NE(msg.find("noise: scenario P78 requires circle-white"), std::string::npos) << msg;
    EXPECT_NE(msg.find("kernel: scenario P78 requires majorant"), std::string::npos) << msg;
    EXPECT_NE(error_text("scenario = P718(ii)\nkappa = 1\n").find("kappa"), std::string::npos);
}

TEST(Config, UnrunnableScenarios) {
    EXPECT_NE(error_text("scenario = R88\n").find("not treatable"), std::string::npos);
    EXPECT_NE(error_text("scenario = P711(ii)\n").find("cannot be run"), std::string::npos);
    EXPECT_NE(error_text("scenario = P99\n").find("unknown id"), std::string::npos);
    EXPECT_THROW(scenario_preset("R88"), ConfigError);
}

TEST(Config, PipelineRequirements) {
    EXPECT_NE(error_text("scenario = P74\npipeline = simulate\n").find("exact kernel"), std::string::npos);
    EXPECT_NE(error_text("domain = halfspace:2\nnoise = lebesgue\ndelta = 50\npipeline = schur\npoints = 0.5,0\n")
                  .find("interval01 or halfline"),
              std::string::npos);
    EXPECT_NE(error_text("domain = halfspace:2\nnoise = lebesgue\ndelta = 50\npoints = 0.5\n").find("has dimension 1"),
              std::string::npos);
}

TEST(Config, HashIgnoresOutputDir) {
    ScenarioConfig a = scenario_preset("P71"), b = a;
    b.output_dir = "/elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Catalog, ListContainsScenarios) {
    std::ostringstream os;
    list_scenarios(os);
    std::string s = os.str();
    EXPECT_NE(s.find("P78: white noise on S¹, θ∈(3p/2−1, 2p−1)"), std::string::npos);
    EXPECT_NE(s.find("R88: rejected — Dirac boundary noise not treatable"), std::string::npos);
    EXPECT_GE(scenario_catalog().size(), 10u);
}

TEST(Run, IntervalWritesReportsAndManifest) {
    auto root = scratch("p71");
    RunManifest m = run_scenario(small_p71(), root.string());
    EXPECT_EQ(verdict(m, "j.verdict"), "finite");
    EXPECT_EQ(verdict(m, "j.agreement"), "true");
    for (const char* f : {"config.txt", "j_report.txt", "j_levels.tsv", "ensemble.tsv", "moments.tsv", "manifest.txt"})
        EXPECT_TRUE(fs::exists(fs::path(m.output_dir) / f)) << f;
    for (const auto& e : fs::directory_iterator(m.output_dir))
        EXPECT_NE(e.path().extension(), ".tmp") << e.path();
    std::ifstream mf(fs::path(m.output_dir) / "manifest.txt");
    RunManifest back = read_manifest(mf);
    EXPECT_EQ(back.config_hash, m.config_hash);
    EXPECT_EQ(back.files, m.files);
    EXPECT_EQ(back.verdicts, m.verdicts);
    EXPECT_EQ(parse_config(back.config_text), small_p71());
}

TEST(Run, SameSeedSameBytes) {
    auto root = scratch("bytes");
    ScenarioConfig a = small_p71(), b = a;
    a.output_dir = (root / "a").string();
    b.output_dir = (root / "b").string();
    RunManifest ma = run_scenario(a, root.string()), mb = run_scenario(b, root.string());
    for (const char* f : {"j_report.txt", "j_levels.tsv", "ensemble.tsv", "moments.tsv"})
        EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
    ScenarioConfig c = a;
    c.seed = 6;
    c.output_dir = (root / "c").string();
    run_scenario(c, root.string());
    EXPECT_NE(slurp(root / "a" / "ensemble.tsv"), slurp(root / "c" / "ensemble.tsv"));
}

TEST(Run, OutsideRangeStillRunsAndIsFlagged) {
    auto root = scratch("diverge");
    ScenarioConfig c = scenario_preset("P71");
    c.theta = 3.2;
    RunManifest m = run_scenario(c, root.string());
    EXPECT_EQ(verdict(m, "j.verdict"), "divergent");
    EXPECT_EQ(verdict(m, "j.expected"), "divergent");
    EXPECT_EQ(verdict(m, "j.agreement"), "true");
}

TEST(Run, RefusalPropagates) {
    auto root = scratch("refuse");
    ScenarioConfig c = small_p71();
    c.pipelines = {"simulate"};
    c.max_step = 0.2;
    c.ratio = 3;
    c.tolerance = 1e-6;
    EXPECT_THROW(run_scenario(c, root.string()), NumericalRefusal);
}

TEST(Run, SchurAndExtensionChecks) {
    auto root = scratch("schur");
    ScenarioConfig c;
    c.pipelines = {"schur", "appendix-checks"};
    RunManifest m = run_scenario(c, root.string());
    EXPECT_EQ(verdict(m, "schur.all_bounded"), "true");
    EXPECT_EQ(verdict(m, "appendix.etr"), "bounded");
}

TEST(Replay, Identical) {
    auto root = scratch("replay");
    RunManifest m = run_scenario(small_p71(), root.string());
    ReplayResult r = replay(m, root.string());
    EXPECT_TRUE(r.identical());
    EXPECT_EQ(r.fresh.output_dir, m.output_dir + ".replay");
    EXPECT_EQ(r.fresh.config_hash, m.config_hash);
}

TEST(Replay, DetectsTampering) {
    auto root = scratch("tamper");
    RunManifest m = run_scenario(small_p71(), root.string());
    for (auto& [name, h] : m.files)
        if (name == "moments.tsv") h = "0000000000000000";
    ReplayResult r = replay(m, root.string());
    ASSERT_EQ(r.mismatched.size(), 1u);
    EXPECT_EQ(r.mismatched[0], "moments.tsv");
    RunManifest bad = m;
    bad.config_text.replace(bad.config_text.find("seed = 5"), 8, "seed = 6");
    EXPECT_THROW(replay(bad, root.string()), ConfigError);
}

TEST(Suites, NamesAndCriteria) {
    ASSERT_EQ(suite_names().size(), 7u);
    for (std::size_t i = 0; i < suite_names().size(); ++i) EXPECT_EQ(suite_criterion(suite_names()[i]), int(i) + 1);
    EXPECT_THROW(suite_criterion("nope"), ConfigError);
}
