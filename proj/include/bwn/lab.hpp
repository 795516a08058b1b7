#pragma once

#include "bwn/convolution.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bwn {

// one scenario per file, flat "key = value" lines; '#' starts a comment
struct ScenarioConfig {
    std::string scenario = "custom";
    std::vector<std::string> pipelines{"j-diagnose"};
    std::string domain = "interval01";
    std::string noise = "endpoints";  // endpoints | zero | circle-white | circle-harmonics | lebesgue | bessel
    std::string kernel = "exact";     // exact | majorant
    int noise_modes = 64;
    double noise_extent = 8;
    double kappa = 0.5;
    double decay = 2;
    double C = 1, c = 4;
    double p = 2, theta = 2, delta = 0;
    double T = 1;
    double alpha = 0;
    double lambda = 1;
    int levels = 5;
    int gauss = 8;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    std::vector<double> times{0.1, 0.5, 1.0};
    std::vector<Point> points{{0.1}, {0.25}, {0.5}};
    double ratio = 1.03;
    double max_step = 0.01;
    double tolerance = 2e-3;
    double horizon = 2;
    std::size_t write_paths = 100;
    std::string output_dir;  // empty: <output root>/<scenario>-<hash>

    bool operator==(const ScenarioConfig&) const = default;
};

struct ConfigKey {
    std::string key, type, unit, help;
};
const std::vector<ConfigKey>& config_schema();

// defaults of a catalogued scenario; throws ConfigError for ids that cannot be run
ScenarioConfig scenario_preset(const std::string& id);

// every failure, empty when the config is usable
std::vector<std::string> validate_config(const ScenarioConfig& c);
// parse and validate; ConfigError lists all failures
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig read_config_file(const std::string& path);
std::string to_text(const ScenarioConfig& c);
std::string config_hash(const ScenarioConfig& c);
ConvolutionSetup to_setup(const ScenarioConfig& c);

std::string fnv1a_hex(const std::string& bytes);

struct RunManifest {
    std::string scenario;
    std::string config_hash;
    std::string code_version;
    std::string config_text;
    std::string output_dir;
    std::vector<std::pair<std::string, std::string>> truncations;
    std::vector<std::pair<std::string, std::string>> verdicts;
    std::vector<std::pair<std::string, std::string>> files;  // name, content hash
    double wall_seconds = 0;
};

std::string code_version();
std::string default_output_root();  // $BWN_OUTPUT_ROOT or ./bwn-output

RunManifest run_scenario(const ScenarioConfig& c, const std::string& output_root = default_output_root());
void write_manifest(std::ostream& os, const RunManifest& m);
RunManifest read_manifest(std::istream& is);

struct ReplayResult {
    RunManifest fresh;
    std::vector<std::string> mismatched;
    bool identical() const { return mismatched.empty(); }
};
// reruns the manifest's config into a sibling directory and compares file hashes
ReplayResult replay(const RunManifest& m, const std::string& output_root = default_output_root());

void list_scenarios(std::ostream& os);

struct SuiteLine {
    int criterion = 0;
    std::string check;
    bool pass = false;
    std::string detail;
};

// isometry, thresholds, kernels, estimates, operators, dirichlet, simulation
const std::vector<std::string>& suite_names();
int suite_criterion(const std::string& name);
std::vector<SuiteLine> run_suite(const std::string& name, std::ostream* progress = nullptr);

}  // namespace bwn
