#include "bwn/lab.hpp"

#include "bwn/errors.hpp"
#include "bwn/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#ifndef BWN_VERSION
#define BWN_VERSION "dev"
#endif

namespace bwn {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool parse_num(const std::string& s, double& out) {
    if (s == "inf" || s == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

template <class Int>
bool parse_int(const std::string& s, Int& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::string list_text(const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double x : v) s.push_back(num(x));
    return join(s, ";");
}

std::string points_text(const std::vector<Point>& pts) {
    std::vector<std::string> s;
    for (const auto& p : pts) {
        std::vector<std::string> c;
        for (double x : p) c.push_back(num(x));
        s.push_back(join(c, ","));
    }
    return join(s, ";");
}

const std::vector<std::string> kPipelines{"verify-kernels", "schur", "j-diagnose", "simulate", "invariant",
                                          "appendix-checks"};
const std::vector<std::string> kNoises{"endpoints", "zero", "circle-white", "circle-harmonics", "lebesgue", "bessel"};

struct Preset {
    std::string id;
    bool runnable = true;
    std::string reason;
    ScenarioConfig c;
};

std::vector<Point> pts1(std::initializer_list<double> xs) {
    std::vector<Point> out;
    for (double x : xs) out.push_back({x});
    return out;
}

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = [] {
        std::vector<Preset> v;
        auto add = [&](const std::string& id, auto fill) {
            Preset p;
            p.id = id;
            p.c.scenario = id;
            fill(p.c);
            v.push_back(p);
        };
        auto half_plane = [](ScenarioConfig& c) {
            c.domain = "halfspace:2";
            c.delta = 50;
            c.times = {0.1, 0.5};
            c.points.clear();
            for (double x0 : {0.1, 0.25, 0.5, 1.0, 1.5})
                for (double x1 : {0.0, 0.3}) c.points.push_back({x0, x1});
        };
        add("P71", [](ScenarioConfig& c) {
            c.times = {0.05, 0.1, 0.5, 1};
            c.points = pts1({0.05, 0.1, 0.25, 0.5, 0.8});
        });
        add("P72", [](ScenarioConfig& c) {
            c.domain = "halfline";
            c.delta = 1;
            c.times = {0.05, 0.1, 0.5, 1};
            c.points = pts1({0.05, 0.2, 0.5, 1, 2});
        });
        add("P74", [](ScenarioConfig& c) {
            c.domain = "unitball:2";
            c.noise = "circle-harmonics";
            c.kernel = "majorant";
            c.noise_modes = 8;
            c.decay = 2;
            c.points = {{0.5, 0}, {0.9, 0}, {0, 0.3}};
        });
        add("P78", [](ScenarioConfig& c) {
            c.domain = "unitball:2";
            c.noise = "circle-white";
            c.kernel = "majorant";
            c.theta = 2.5;
            c.points = {{0.5, 0}, {0.9, 0}, {0, 0.3}};
        });
        add("P713", [&](ScenarioConfig& c) {
            half_plane(c);
            c.noise = "bessel";
            c.kappa = 2;
        });
        add("P717", [&](ScenarioConfig& c) {
            half_plane(c);
            c.noise = "lebesgue";
            c.theta = 2.5;
        });
        add("P718(i)", [&](ScenarioConfig& c) {
            half_plane(c);
            c.noise = "bessel";
            c.kappa = 1;
        });
        add("P718(ii)", [&](ScenarioConfig& c) {
            half_plane(c);
            c.noise = "bessel";
            c.kappa = 0.5;
        });
        for (const char* id : {"P711(i)", "P711(ii)"}) {
            Preset p;
            p.id = id;
            p.runnable = false;
            p.reason = "generic C^{1,a} regions have no exact kernel; only the majorant estimate checks apply";
            v.push_back(p);
        }
        Preset r;
        r.id = "R88";
        r.runnable = false;
        r.reason = "rejected: Dirac boundary noise is not treatable";
        v.push_back(r);
        return v;
    }();
    return all;
}

const Preset* find_preset(const std::string& id) {
    for (const auto& p : presets())
        if (p.id == id) return &p;
    return nullptr;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> s{
        {"scenario", "id", "-", "catalogued scenario id or custom"},
        {"pipeline", "list", "-", "verify-kernels;schur;j-diagnose;simulate;invariant;appendix-checks"},
        {"domain", "text", "-", "interval01, halfline, halfspace:d, unitball:d"},
        {"noise", "text", "-", join(kNoises, ", ")},
        {"kernel", "text", "-", "exact or majorant"},
        {"noise_modes", "int", "modes", "truncation K (circle harmonics, homogeneous cells)"},
        {"noise_extent", "real", "length", "cell window half-width (lebesgue) or frequency cutoff (bessel)"},
        {"kappa", "real", "-", "Bessel potential order"},
        {"decay", "real", "-", "circle harmonic decay k^-decay"},
        {"C", "real", "-", "majorant amplitude"},
        {"c", "real", "-", "majorant Gaussian spread"},
        {"p", "real", "-", "integrability exponent, > 1"},
        {"theta", "real", "-", "boundary weight exponent"},
        {"delta", "real", "-", "decay weight exponent, >= 0"},
        {"T", "real", "time", "horizon, inf allowed"},
        {"alpha", "real", "-", "time weight exponent in [0,1)"},
        {"lambda", "real", "1/time", "resolvent parameter, > 0"},
        {"levels", "int", "-", "boundary refinement levels, distance 10^(-2-4L)"},
        {"gauss", "int", "points", "Gauss points per panel"},
        {"n_paths", "int", "paths", "Monte Carlo sample size"},
        {"seed", "int", "-", "root seed"},
        {"times", "list", "time", "probe times, ';' separated"},
        {"points", "list", "length", "probe points, ';' between points, ',' between coordinates"},
        {"ratio", "real", "-", "noise step growth away from probe times"},
        {"max_step", "real", "time", "largest noise step"},
        {"tolerance", "real", "-", "relative variance defect before refusing"},
        {"horizon", "real", "time", "invariant pipeline horizon"},
        {"write_paths", "int", "paths", "paths written to the ensemble file"},
        {"output_dir", "path", "-", "empty: derived from the output root"},
    };
    return s;
}

ScenarioConfig scenario_preset(const std::string& id) {
    const Preset* p = find_preset(id);
    if (!p) throw ConfigError("unknown scenario " + id);
    if (!p->runnable) throw ConfigError("scenario " + id + " cannot be run: " + p->reason);
    return p->c;
}

ConvolutionSetup to_setup(const ScenarioConfig& c) {
    ConvolutionSetup s;
    s.domain = parse_domain(c.domain);
    s.mode = c.kernel == "majorant" ? KernelMode::Majorant : KernelMode::Exact;
    s.C = c.C;
    s.c = c.c;
    s.params = {c.p, c.theta, c.delta};
    s.T = c.T;
    s.alpha = c.alpha;
    s.lambda = c.lambda;
    const int m = s.domain.dim - 1;
    if (c.noise == "endpoints") {
        if (s.domain.kind == DomainKind::Interval01) s.noise = BoundaryNoiseSpec::endpoint_atoms({{0.0}, {1.0}});
        else if (s.domain.kind == DomainKind::HalfLine) s.noise = BoundaryNoiseSpec::endpoint_atoms({{0.0}});
        else {
            Point b(static_cast<std::size_t>(s.domain.dim), 0.0);
            if (s.domain.kind == DomainKind::UnitBall) b[0] = 1;
            s.noise = BoundaryNoiseSpec::endpoint_atoms({b});
        }
    } else if (c.noise == "zero") {
        s.noise = BoundaryNoiseSpec::zero();
    } else if (c.noise == "circle-white") {
        s.noise = BoundaryNoiseSpec::circle_white(0);
    } else if (c.noise == "circle-harmonics") {
        s.noise = BoundaryNoiseSpec::circle_harmonics(c.noise_modes, c.decay);
    } else if (c.noise == "lebesgue") {
        s.noise = BoundaryNoiseSpec::homogeneous(SpectralMeasure::lebesgue(m), c.noise_modes, c.noise_extent);
    } else if (c.noise == "bessel") {
        s.noise = BoundaryNoiseSpec::homogeneous(SpectralMeasure::bessel(m, c.kappa), c.noise_modes, c.noise_extent);
    } else {
        throw ConfigError("unknown noise " + c.noise);
    }
    return s;
}

std::vector<std::string> validate_config(const ScenarioConfig& c) {
    std::vector<std::string> err;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) err.push_back(msg);
    };
    if (c.scenario != "custom") {
        const Preset* p = find_preset(c.scenario);
        if (!p) err.push_back("scenario: unknown id " + c.scenario);
        else if (!p->runnable) err.push_back("scenario: " + c.scenario + " cannot be run: " + p->reason);
        else {
            need(c.domain == p->c.domain, "domain: scenario " + c.scenario + " requires " + p->c.domain);
            need(c.noise == p->c.noise, "noise: scenario " + c.scenario + " requires " + p->c.noise);
            need(c.kernel == p->c.kernel, "kernel: scenario " + c.scenario + " requires " + p->c.kernel);
            if (c.noise == "bessel") need(c.kappa == p->c.kappa, "kappa: scenario " + c.scenario + " requires " + num(p->c.kappa));
        }
    }
    need(!c.pipelines.empty(), "pipeline: at least one pipeline is required");
    for (const auto& p : c.pipelines)
        need(std::find(kPipelines.begin(), kPipelines.end(), p) != kPipelines.end(), "pipeline: unknown " + p);
    bool domain_ok = true;
    Domain d;
    try {
        d = parse_domain(c.domain);
        need(d.kind != DomainKind::GenericSigned, "domain: generic regions need user-supplied geometry");
    } catch (const Error& e) {
        err.push_back("domain: " + std::string(e.what()));
        domain_ok = false;
    }
    need(std::find(kNoises.begin(), kNoises.end(), c.noise) != kNoises.end(), "noise: unknown " + c.noise);
    need(c.kernel == "exact" || c.kernel == "majorant", "kernel: must be exact or majorant");
    need(c.noise_modes >= 1, "noise_modes: must be >= 1");
    need(c.noise_extent > 0, "noise_extent: must be > 0");
    need(c.kappa > 0, "kappa: must be > 0");
    need(c.decay > 0, "decay: must be > 0");
    need(c.C > 0, "C: must be > 0");
    need(c.c > 0, "c: must be > 0");
    need(c.p > 1, "p: must be > 1");
    need(c.delta >= 0, "delta: must be >= 0");
    need(c.T > 0, "T: must be > 0");
    need(c.alpha >= 0 && c.alpha < 1, "alpha: must lie in [0,1)");
    need(c.lambda > 0, "lambda: must be > 0");
    need(c.levels >= 2 && c.levels <= 8, "levels: must lie in [2,8]");
    need(c.gauss >= 2 && c.gauss <= 64, "gauss: must lie in [2,64]");
    need(c.n_paths >= 1, "n_paths: must be >= 1");
    need(c.ratio > 1, "ratio: must be > 1");
    need(c.max_step > 0, "max_step: must be > 0");
    need(c.tolerance > 0, "tolerance: must be > 0");
    need(c.horizon > 0, "horizon: must be > 0");
    for (double t : c.times) need(t > 0 && std::isfinite(t), "times: " + num(t) + " must be positive and finite");
    auto uses = [&](const std::string& p) { return std::find(c.pipelines.begin(), c.pipelines.end(), p) != c.pipelines.end(); };
    if (uses("simulate") || uses("invariant")) {
        need(c.kernel == "exact", "kernel: simulation needs the exact kernel");
        need(!c.points.empty(), "points: simulation needs probe points");
        if (uses("simulate")) need(!c.times.empty(), "times: simulation needs probe times");
    }
    if (domain_ok) {
        for (const auto& x : c.points) {
            if (static_cast<int>(x.size()) != d.dim) {
                err.push_back("points: " + points_text({x}) + " has dimension " + std::to_string(x.size()) + ", domain has " +
                              std::to_string(d.dim));
                continue;
            }
            bool inside = false;
            try {
                inside = in_closure(d, x) && distance_to_boundary(d, x) > 0;
            } catch (const Error&) {
            }
            need(inside, "points: " + points_text({x}) + " is not inside " + c.domain);
        }
        if (uses("invariant"))
            need(d.kind == DomainKind::Interval01 || d.kind == DomainKind::HalfLine, "pipeline: invariant needs interval01 or halfline");
        if (uses("schur") || uses("appendix-checks"))
            need(d.kind == DomainKind::Interval01 || d.kind == DomainKind::HalfLine,
                 "pipeline: Schur and appendix checks run on interval01 or halfline");
    }
    if (err.empty()) {
        try {
            validate(to_setup(c));
        } catch (const Error& e) {
            err.push_back("setup: " + std::string(e.what()));
        }
    }
    return err;
}

ScenarioConfig parse_config(const std::string& text) {
    std::vector<std::string> err;
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            err.push_back("line " + std::to_string(no) + ": expected key = value");
            continue;
        }
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        const auto& sch = config_schema();
        if (std::none_of(sch.begin(), sch.end(), [&](const ConfigKey& s) { return s.key == k; })) {
            err.push_back("line " + std::to_string(no) + ": unknown key " + k);
            continue;
        }
        if (kv.count(k)) err.push_back("line " + std::to_string(no) + ": duplicate key " + k);
        kv[k] = v;
    }

    ScenarioConfig c;
    if (kv.count("scenario") && kv["scenario"] != "custom") {
        const Preset* p = find_preset(kv["scenario"]);
        if (p && p->runnable) c = p->c;
        else c.scenario = kv["scenario"];
    }
    auto real = [&](const char* k, double& out) {
        if (!kv.count(k)) return;
        if (!parse_num(kv[k], out)) err.push_back(std::string(k) + ": not a number: " + kv[k]);
    };
    auto integer = [&](const char* k, auto& out) {
        if (!kv.count(k)) return;
        if (!parse_int(kv[k], out)) err.push_back(std::string(k) + ": not an integer: " + kv[k]);
    };
    auto text_key = [&](const char* k, std::string& out) {
        if (kv.count(k)) out = kv[k];
    };
    text_key("scenario", c.scenario);
    text_key("domain", c.domain);
    text_key("noise", c.noise);
    text_key("kernel", c.kernel);
    text_key("output_dir", c.output_dir);
    if (kv.count("pipeline")) c.pipelines = split(kv["pipeline"], ';');
    integer("noise_modes", c.noise_modes);
    real("noise_extent", c.noise_extent);
    real("kappa", c.kappa);
    real("decay", c.decay);
    real("C", c.C);
    real("c", c.c);
    real("p", c.p);
    real("theta", c.theta);
    real("delta", c.delta);
    real("T", c.T);
    real("alpha", c.alpha);
    real("lambda", c.lambda);
    integer("levels", c.levels);
    integer("gauss", c.gauss);
    integer("n_paths", c.n_paths);
    integer("seed", c.seed);
    real("ratio", c.ratio);
    real("max_step", c.max_step);
    real("tolerance", c.tolerance);
    real("horizon", c.horizon);
    integer("write_paths", c.write_paths);
    if (kv.count("times")) {
        c.times.clear();
        for (const auto& s : split(kv["times"], ';')) {
            double v;
            if (parse_num(s, v)) c.times.push_back(v);
            else err.push_back("times: not a number: " + s);
        }
    }
    if (kv.count("points")) {
        c.points.clear();
        for (const auto& s : split(kv["points"], ';')) {
            Point x;
            for (const auto& comp : split(s, ',')) {
                double v;
                if (parse_num(comp, v)) x.push_back(v);
                else err.push_back("points: not a number: " + comp);
            }
            c.points.push_back(x);
        }
    }
    for (const auto& e : validate_config(c)) err.push_back(e);
    if (!err.empty()) throw ConfigError("invalid config:\n  " + join(err, "\n  "));
    return c;
}

ScenarioConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_text(const ScenarioConfig& c) {
    std::ostringstream os;
    auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
    kv("scenario", c.scenario);
    kv("pipeline", join(c.pipelines, ";"));
    kv("domain", c.domain);
    kv("noise", c.noise);
    kv("kernel", c.kernel);
    kv("noise_modes", std::to_string(c.noise_modes));
    kv("noise_extent", num(c.noise_extent));
    kv("kappa", num(c.kappa));
    kv("decay", num(c.decay));
    kv("C", num(c.C));
    kv("c", num(c.c));
    kv("p", num(c.p));
    kv("theta", num(c.theta));
    kv("delta", num(c.delta));
    kv("T", num(c.T));
    kv("alpha", num(c.alpha));
    kv("lambda", num(c.lambda));
    kv("levels", std::to_string(c.levels));
    kv("gauss", std::to_string(c.gauss));
    kv("n_paths", std::to_string(c.n_paths));
    kv("seed", std::to_string(c.seed));
    kv("times", list_text(c.times));
    kv("points", points_text(c.points));
    kv("ratio", num(c.ratio));
    kv("max_step", num(c.max_step));
    kv("tolerance", num(c.tolerance));
    kv("horizon", num(c.horizon));
    kv("write_paths", std::to_string(c.write_paths));
    if (!c.output_dir.empty()) kv("output_dir", c.output_dir);
    return os.str();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string config_hash(const ScenarioConfig& c) {
    ScenarioConfig k = c;
    k.output_dir.clear();  // where results go does not change them
    return fnv1a_hex(to_text(k));
}

std::string code_version() { return std::string("bwn ") + BWN_VERSION; }

std::string default_output_root() {
    const char* env = std::getenv("BWN_OUTPUT_ROOT");
    return env && *env ? std::string(env) : std::string("bwn-output");
}

namespace {

struct Writer {
    fs::path dir;
    std::vector<std::pair<std::string, std::string>>* files;

    void put(const std::string& name, const std::string& content) const {
        fs::path tmp = dir / (name + ".tmp"), out = dir / name;
        {
            std::ofstream f(tmp, std::ios::binary);
            if (!f) throw Error("cannot write " + tmp.string());
            f << content;
        }
        fs::rename(tmp, out);
        files->push_back({name, fnv1a_hex(content)});
    }
};

std::string safe_name(const std::string& s) {
    std::string out;
    for (char ch : s)
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') out += ch;
    return out;
}

void run_j(const ScenarioConfig& c, const ConvolutionSetup& s, const Writer& w, RunManifest& m) {
    JOptions o;
    o.levels = c.levels;
    o.gauss = c.gauss;
    JReport r = j_integral(s, o);
    std::ostringstream os;
    write_report(os, r);
    w.put("j_report.txt", os.str());
    std::ostringstream lv;
    lv << "# level distance J\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.value.size(); ++i) lv << i << " " << r.distance[i] << " " << r.value[i] << "\n";
    w.put("j_levels.tsv", lv.str());
    m.truncations.push_back({"j.levels", std::to_string(c.levels)});
    m.truncations.push_back({"j.gauss", std::to_string(c.gauss)});
    m.truncations.push_back({"j.innermost_distance", num(r.distance.back())});
    std::string modes = r.modes.empty() ? "exact sum" : std::to_string(r.modes.front()) + " vs " + std::to_string(r.modes.back());
    m.truncations.push_back({"j.modes", modes});
    m.verdicts.push_back({"j.value", num(r.J())});
    m.verdicts.push_back({"j.verdict", to_string(r.verdict)});
    m.verdicts.push_back({"j.prediction", r.prediction.id});
    m.verdicts.push_back({"j.expected", to_string(r.prediction.expected)});
    m.verdicts.push_back({"j.agreement", r.agreement ? "true" : "false"});
}

void run_simulate(const ScenarioConfig& c, const ConvolutionSetup& s, const Writer& w, RunManifest& m) {
    SimulationOptions o;
    o.times = c.times;
    o.points = c.points;
    o.n_paths = c.n_paths;
    o.seed = c.seed;
    o.ratio = c.ratio;
    o.max_step = c.max_step;
    o.tolerance = c.tolerance;
    PathEnsemble e = simulate_convolution(s, o);
    std::ostringstream es;
    write_ensemble(es, e, c.write_paths);
    w.put("ensemble.tsv", es.str());
    std::ostringstream ms;
    ms << "# t x... quadrature_variance variance variance_se z mean mean_se kurtosis kurtosis_se\n" << std::setprecision(12);
    double zmax = 0;
    for (std::size_t i = 0; i < e.times.size(); ++i)
        for (std::size_t j = 0; j < e.points.size(); ++j) {
            MomentStats st = moments(e.values.row(static_cast<Eigen::Index>(e.row(i, j))));
            double q = variance_at(s, e.times[i], e.points[j]);
            double z = st.var_se > 0 ? (st.var - q) / st.var_se : 0.0;
            zmax = std::max(zmax, std::abs(z));
            ms << e.times[i];
            for (double x : e.points[j]) ms << " " << x;
            ms << " " << q << " " << st.var << " " << st.var_se << " " << z << " " << st.mean << " " << st.mean_se << " "
               << st.kurtosis << " " << st.kurtosis_se << "\n";
        }
    w.put("moments.tsv", ms.str());
    m.truncations.push_back({"simulate.steps", std::to_string(e.time_grid.size() - 1)});
    m.truncations.push_back({"simulate.modes", std::to_string(e.modes)});
    m.truncations.push_back({"simulate.n_paths", std::to_string(c.n_paths)});
    m.verdicts.push_back({"simulate.max_variance_z", num(zmax)});
    m.verdicts.push_back({"simulate.isometry", zmax <= 3 ? "within 3 se" : "outside 3 se"});
}

void run_invariant(const ScenarioConfig& c, const ConvolutionSetup& s, const Writer& w, RunManifest& m) {
    InvariantReport r = invariant_diagnostics(s, c.horizon, c.points, c.n_paths, c.seed);
    std::ostringstream os;
    os << "# x sigma2_inf sigma2_at_probe_time simulated simulated_se\n" << std::setprecision(12);
    os << "# probe_time " << r.probe_time << " J_inf " << r.j_inf.J() << "\n";
    for (std::size_t j = 0; j < r.points.size(); ++j) {
        for (double x : r.points[j]) os << x << " ";
        os << r.sigma_inf[j] << " " << r.sigma_probe[j] << " " << (r.simulated.empty() ? 0.0 : r.simulated[j]) << " "
           << (r.simulated_se.empty() ? 0.0 : r.simulated_se[j]) << "\n";
    }
    w.put("invariant.tsv", os.str());
    m.truncations.push_back({"invariant.horizon", num(c.horizon)});
    m.verdicts.push_back({"invariant.j_inf", to_string(r.j_inf.verdict)});
    m.verdicts.push_back({"invariant.max_probe_gap", num(r.max_probe_gap)});
    m.verdicts.push_back({"invariant.monotone", r.monotone ? "true" : "false"});
    m.verdicts.push_back({"invariant.max_z", num(r.max_z)});
}

void run_schur(const ScenarioConfig& c, const ConvolutionSetup& s, const Writer& w, RunManifest& m) {
    SchurReport r = schur_constants(s.domain, c.p, c.theta, c.c);
    std::ostringstream os;
    os << "# k value verdict trace...\n" << std::setprecision(12);
    for (int i = 0; i < 8; ++i) {
        os << "k" << i + 1 << " " << r.k[i] << " " << to_string(r.verdict[i]);
        for (double v : r.trace[i]) os << " " << v;
        os << "\n";
    }
    w.put("schur.tsv", os.str());
    m.verdicts.push_back({"schur.all_bounded", r.all_bounded() ? "true" : "false"});
}

void run_appendix(const ScenarioConfig& c, const ConvolutionSetup& s, const Writer& w, RunManifest& m) {
    std::ostringstream os;
    EstimateReport b = appendix_b_constants(s.domain, c.theta, c.c);
    write_report(os, b);
    EstimateReport etr = certify_etr();
    write_report(os, etr);
    w.put("appendix.txt", os.str());
    m.verdicts.push_back({"appendix.b", to_string(b.verdict)});
    m.verdicts.push_back({"appendix.etr", to_string(etr.verdict)});
}

void run_kernel_checks(const Writer& w, RunManifest& m) {
    auto lines = run_suite("kernels");
    std::ostringstream os;
    bool all = true;
    for (const auto& l : lines) {
        os << l.check << " " << (l.pass ? "pass" : "fail") << " " << l.detail << "\n";
        all = all && l.pass;
    }
    w.put("verify_kernels.txt", os.str());
    m.verdicts.push_back({"verify_kernels", all ? "pass" : "fail"});
}

}  // namespace

RunManifest run_scenario(const ScenarioConfig& c, const std::string& output_root) {
    auto errs = validate_config(c);
    if (!errs.empty()) throw ConfigError("invalid config:\n  " + join(errs, "\n  "));
    auto t0 = std::chrono::steady_clock::now();
    RunManifest m;
    m.scenario = c.scenario;
    m.config_hash = config_hash(c);
    m.code_version = code_version();
    m.config_text = to_text(c);
    fs::path dir = c.output_dir.empty() ? fs::path(output_root) / (safe_name(c.scenario) + "-" + m.config_hash.substr(0, 12))
                                        : fs::path(c.output_dir);
    fs::create_directories(dir);
    m.output_dir = dir.string();
    Writer w{dir, &m.files};
    w.put("config.txt", m.config_text);
    ConvolutionSetup s = to_setup(c);
    for (const auto& p : c.pipelines) {
        if (p == "j-diagnose") run_j(c, s, w, m);
        else if (p == "simulate") run_simulate(c, s, w, m);
        else if (p == "invariant") run_invariant(c, s, w, m);
        else if (p == "schur") run_schur(c, s, w, m);
        else if (p == "appendix-checks") run_appendix(c, s, w, m);
        else if (p == "verify-kernels") run_kernel_checks(w, m);
    }
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream ms;
    write_manifest(ms, m);
    fs::path tmp = dir / "manifest.txt.tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        f << ms.str();
    }
    fs::rename(tmp, dir / "manifest.txt");
    return m;
}

void write_manifest(std::ostream& os, const RunManifest& m) {
    os << "[run]\n";
    os << "scenario = " << m.scenario << "\n";
    os << "config_hash = " << m.config_hash << "\n";
    os << "code_version = " << m.code_version << "\n";
    os << "output_dir = " << m.output_dir << "\n";
    os << "wall_seconds = " << num(m.wall_seconds) << "\n";
    os << "[truncations]\n";
    for (const auto& [k, v] : m.truncations) os << k << " = " << v << "\n";
    os << "[verdicts]\n";
    for (const auto& [k, v] : m.verdicts) os << k << " = " << v << "\n";
    os << "[files]\n";
    for (const auto& [k, v] : m.files) os << k << " = " << v << "\n";
    os << "[config]\n" << m.config_text;
}

RunManifest read_manifest(std::istream& is) {
    RunManifest m;
    std::string line, section;
    bool any = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            any = true;
            continue;
        }
        if (section == "config") {
            m.config_text += line + "\n";
            continue;
        }
        auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        std::string k = line.substr(0, eq), v = line.substr(eq + 3);
        if (section == "run") {
            if (k == "scenario") m.scenario = v;
            else if (k == "config_hash") m.config_hash = v;
            else if (k == "code_version") m.code_version = v;
            else if (k == "output_dir") m.output_dir = v;
            else if (k == "wall_seconds") parse_num(v, m.wall_seconds);
        } else if (section == "truncations") {
            m.truncations.push_back({k, v});
        } else if (section == "verdicts") {
            m.verdicts.push_back({k, v});
        } else if (section == "files") {
            m.files.push_back({k, v});
        }
    }
    if (!any || m.config_text.empty()) throw ConfigError("not a run manifest");
    return m;
}

ReplayResult replay(const RunManifest& m, const std::string& output_root) {
    ScenarioConfig c = parse_config(m.config_text);
    if (config_hash(c) != m.config_hash) throw ConfigError("manifest config does not match its hash");
    fs::path base = m.output_dir.empty() ? fs::path(output_root) / (safe_name(c.scenario) + "-" + m.config_hash.substr(0, 12))
                                         : fs::path(m.output_dir);
    c.output_dir = base.string() + ".replay";
    ReplayResult r;
    r.fresh = run_scenario(c, output_root);
    std::map<std::string, std::string> got(r.fresh.files.begin(), r.fresh.files.end());
    for (const auto& [name, h] : m.files) {
        if (name == "config.txt") continue;  // output_dir line differs by construction
        auto it = got.find(name);
        if (it == got.end() || it->second != h) r.mismatched.push_back(name);
    }
    return r;
}

void list_scenarios(std::ostream& os) {
    for (const auto& e : scenario_catalog()) {
        os << e.text << "\n";
        const Preset* p = find_preset(e.id);
        if (!p) continue;
        if (!p->runnable) {
            os << "    not runnable: " << p->reason << "\n";
            continue;
        }
        os << "    scenario = " << p->id << "  domain = " << p->c.domain << "  noise = " << p->c.noise;
        if (p->c.noise == "bessel") os << " (kappa = " << num(p->c.kappa) << ")";
        os << "  kernel = " << p->c.kernel << "  default p = " << num(p->c.p) << " theta = " << num(p->c.theta)
           << " delta = " << num(p->c.delta) << "\n";
    }
}

}  // namespace bwn
