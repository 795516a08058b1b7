#include "CLI11.hpp"

#include "bwn/errors.hpp"
#include "bwn/lab.hpp"

#include <fstream>
#include <iostream>

namespace {

enum Exit { Ok = 0, Validation = 1, Refusal = 2, Internal = 3 };

void print_manifest_summary(const bwn::RunManifest& m) {
    std::cout << "output: " << m.output_dir << "\n";
    std::cout << "config hash: " << m.config_hash << "\n";
    for (const auto& [k, v] : m.verdicts) std::cout << "  " << k << " = " << v << "\n";
}

int cmd_run(const std::string& path, const std::string& root) {
    bwn::ScenarioConfig c = bwn::read_config_file(path);
    auto m = bwn::run_scenario(c, root);
    print_manifest_summary(m);
    return Ok;
}

int cmd_verify(const std::string& which) {
    std::vector<std::string> names;
    if (which == "all") names = bwn::suite_names();
    else names = {which};
    for (const auto& n : names) bwn::suite_criterion(n);  // unknown names fail before any work
    bool all = true;
    for (const auto& n : names) {
        std::cout << "suite " << n << "\n";
        auto lines = bwn::run_suite(n, &std::cout);
        bool pass = !lines.empty();
        for (const auto& l : lines) pass = pass && l.pass;
        std::cout << "suite " << n << ": " << (pass ? "PASS" : "FAIL") << "\n";
        all = all && pass;
    }
    return all ? Ok : Internal;
}

int cmd_replay(const std::string& path, const std::string& root) {
    std::ifstream f(path);
    if (!f) throw bwn::ConfigError("cannot open manifest " + path);
    auto m = bwn::read_manifest(f);
    auto r = bwn::replay(m, root);
    std::cout << "replayed into " << r.fresh.output_dir << "\n";
    if (r.identical()) {
        std::cout << "all data files identical (" << m.files.size() - 1 << " compared)\n";
        return Ok;
    }
    for (const auto& n : r.mismatched) std::cout << "  differs: " << n << "\n";
    return Internal;
}

void cmd_schema() {
    for (const auto& k : bwn::config_schema())
        std::cout << k.key << "  [" << k.type << (k.unit.empty() ? "" : ", " + k.unit) << "]  " << k.help << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary white noise lab: run scenarios, verify suites, replay manifests"};
    app.require_subcommand(1);
    std::string root = bwn::default_output_root();
    app.add_option("--output-root", root, "directory for run outputs (default $BWN_OUTPUT_ROOT or ./bwn-output)");

    std::string config, suite, manifest;
    auto* run = app.add_subcommand("run", "run the pipelines of one scenario config");
    run->add_option("config", config, "config file")->required();
    auto* list = app.add_subcommand("list", "print the scenario catalog");
    auto* verify = app.add_subcommand("verify", "run a verification suite (or 'all')");
    verify->add_option("suite", suite, "isometry | thresholds | kernels | estimates | operators | dirichlet | simulation | all")
        ->required();
    auto* rep = app.add_subcommand("replay", "rerun a manifest and compare output hashes");
    rep->add_option("manifest", manifest, "manifest.txt of an earlier run")->required();
    auto* schema = app.add_subcommand("schema", "print the config keys");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? Ok : Validation;
    }

    try {
        if (*run) return cmd_run(config, root);
        if (*list) {
            bwn::list_scenarios(std::cout);
            return Ok;
        }
        if (*verify) return cmd_verify(suite);
        if (*rep) return cmd_replay(manifest, root);
        if (*schema) {
            cmd_schema();
            return Ok;
        }
    } catch (const bwn::NumericalRefusal& e) {
        std::cerr << "numerical refusal: " << e.what() << "\n";
        return Refusal;
    } catch (const bwn::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return Validation;
    } catch (const bwn::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return Validation;
    } catch (const bwn::UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return Validation;
    } catch (const bwn::DomainMembershipError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return Validation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return Internal;
    }
    return Internal;
}
