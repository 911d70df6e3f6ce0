#include "updown/chain.hpp"
#include "updown/error.hpp"
#include "updown/graph.hpp"
#include "updown/instances.hpp"
#include "updown/io.hpp"
#include "updown/montecarlo.hpp"
#include "updown/perm.hpp"
#include "updown/semidiscrete.hpp"
#include "updown/separation.hpp"
#include "updown/stats.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace updown;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Options that do not influence results and are left out of the manifest.
const std::vector<std::string> kUnrecorded{"workers", "manifest", "config", "out", "out-dir", "help"};

struct Context {
    CLI::App* sub = nullptr;
    std::string out;
    std::string manifest;
    std::string config_path;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

Rational strict_p(const std::string& text) {
    return parse_rational_strict(text);
}

std::string rational_json(const Rational& q) {
    return to_string(q);
}

void emit(const Context& ctx, const std::string& content) {
    if (ctx.out.empty() || ctx.out == "-") {
        std::cout << content;
    } else {
        io::write_file_atomic(ctx.out, content);
    }
}

Json config_echo(const CLI::App& sub) {
    Json config = Json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_name(false, true);
        std::string key = name;
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        if (key.empty() || std::find(kUnrecorded.begin(), kUnrecorded.end(), key) != kUnrecorded.end()) continue;
        if (opt->count() > 0) {
            const auto& results = opt->results();
            if (opt->get_type_size() == 0) {
                config[key] = true;
            } else if (results.size() == 1) {
                config[key] = results.front();
            } else {
                config[key] = results;
            }
        } else if (!opt->get_default_str().empty()) {
            config[key] = opt->get_default_str();
        }
    }
    return config;
}

// Manifest goes next to the output (or where --manifest says); timings into a sibling file.
void finish(const Context& ctx, const std::string& name, std::uint64_t seed, std::vector<std::filesystem::path> outputs,
            std::filesystem::path default_manifest, int workers = 1) {
    std::filesystem::path path = ctx.manifest;
    if (path.empty()) path = default_manifest;
    if (path.empty()) return;
    io::RunManifest m;
    m.subcommand = name;
    m.config = config_echo(*ctx.sub);
    m.master_seed = seed;
    m.tool_version = io::tool_version();
    m.outputs = std::move(outputs);
    m.write(path);
    Json timings;
    timings["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    timings["workers"] = workers;
    std::string base = path.string();
    std::string tail = ".timings.json";
    for (const auto& [suffix, replacement] : {std::pair<std::string, std::string>{"manifest.json", "timings.json"}, {".json", ".timings.json"}}) {
        if (base.size() >= suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
            base.erase(base.size() - suffix.size());
            tail = replacement;
            break;
        }
    }
    const std::filesystem::path tpath = base + tail;
    io::write_file_atomic(tpath, timings.dump(2) + "\n");
}

std::filesystem::path manifest_for(const std::string& out) {
    if (out.empty() || out == "-") return {};
    return std::filesystem::path(out + ".manifest.json");
}

// Verify -------------------------------------------------------------------

struct Property {
    std::string name;
    bool pass = true;
    Json counterexample;
    std::size_t checks = 0;

    explicit Property(std::string n) : name(std::move(n)) {}

    void record(bool ok, Json detail) {
        ++checks;
        if (!ok && pass) {
            pass = false;
            counterexample = std::move(detail);
        }
    }
};

int run_verify(Context& ctx, const std::string& instance, int nmax, const std::string& p_text, int cap) {
    const Rational p = strict_p(p_text);
    if (p < 0 || p > 1) throw InvalidArgument("p must lie in [0, 1]");
    if (nmax < 2) throw InvalidArgument("nmax must be >= 2");
    if (nmax + 1 > cap) {
        throw LevelCapExceeded(nmax + 1, cap);
    }
    const ChainSpec spec = make_chain(instance, p, cap);

    Property stochastic{"stochastic"}, commutation{"commutation"}, alternative{"alternative_form"}, extended{"extended_commutation"};
    Property density{"density"}, eta{"eta_theta_inverse"}, eigen{"eigen"}, stat{"stationary"}, triangular{"triangular_action"};

    for (int n = 1; n <= nmax; ++n) {
        stochastic.record(build_up_kernel(spec, n).is_stochastic(), Json{{"kernel", "U"}, {"n", n}});
        stochastic.record(build_down_kernel(spec, n + 1).is_stochastic(), Json{{"kernel", "D"}, {"n", n + 1}});
        stochastic.record(updown_operator(spec, n).is_stochastic(), Json{{"kernel", "T"}, {"n", n}});
        if (n >= 2) {
            const CommutationReport r = verify_commutation(spec, n);
            Json detail{{"n", n}};
            if (!r.violations.empty()) {
                const Violation& v = r.violations.front();
                detail["row"] = v.row_state;
                detail["col"] = v.col_state;
                detail["lhs"] = rational_json(v.lhs);
                detail["rhs"] = rational_json(v.rhs);
            }
            commutation.record(r.holds, detail);
            alternative.record(verify_alternative_form(spec, n), Json{{"n", n}});
            for (int k = 2; k <= n; ++k) extended.record(verify_extended_commutation(spec, n, k), Json{{"n", n}, {"k", k}});
        }
        density.record(partition_of_unity_check(spec, n), Json{{"n", n}, {"check", "partition_of_unity"}});
        density.record(down_consistency_check(spec, n), Json{{"n", n}, {"check", "down_consistency"}});
        const SpectrumReport sr = spectrum_report(spec, n);
        for (const SpectrumLevel& level : sr.levels) {
            eigen.record(level.eigen_relations_hold && level.rank == level.expected_multiplicity,
                         Json{{"n", n}, {"k", level.k}, {"rank", level.rank}, {"expected_multiplicity", level.expected_multiplicity}});
        }
        const StationaryReport st = stationary_report(spec, n);
        stat.record(st.ok(), Json{{"n", n}, {"fixed_point", st.fixed_point}, {"up_consistent", st.up_consistent}, {"down_consistent", st.down_consistent}});
        for (int k = 1; k <= n; ++k) {
            for (const std::string& s : enumerate_level(spec, k).states) {
                triangular.record(triangular_action_check(spec, s, n), Json{{"n", n}, {"pattern", s}});
            }
        }
    }
    eta.record(eta_theta_inverse_check(spec, nmax), Json{{"jmax", nmax}});

    Json report;
    report["instance"] = instance;
    report["p"] = rational_json(p);
    report["nmax"] = nmax;
    report["cap"] = cap;
    report["properties"] = Json::array();
    bool all = true;
    for (const Property* prop : {&stochastic, &commutation, &alternative, &extended, &density, &eta, &eigen, &stat, &triangular}) {
        Json entry{{"name", prop->name}, {"pass", prop->pass}, {"checks", prop->checks}};
        if (!prop->pass) entry["counterexample"] = prop->counterexample;
        report["properties"].push_back(entry);
        all = all && prop->pass;
    }
    report["all_pass"] = all;
    emit(ctx, report.dump(2) + "\n");
    std::vector<std::filesystem::path> outs;
    if (!ctx.out.empty() && ctx.out != "-") outs.emplace_back(ctx.out);
    finish(ctx, "verify", 0, outs, manifest_for(ctx.out));
    return all ? kExitOk : kExitFailure;
}

// Spectrum / stationary / kernel --------------------------------------------

int run_spectrum(Context& ctx, const std::string& instance, int n, const std::string& p_text, int cap) {
    const ChainSpec spec = make_chain(instance, strict_p(p_text), cap);
    const SpectrumReport r = spectrum_report(spec, n);
    Json report;
    report["instance"] = instance;
    report["n"] = n;
    report["p"] = rational_json(spec.p());
    report["state_count"] = r.state_count;
    report["levels"] = Json::array();
    for (const SpectrumLevel& level : r.levels) {
        report["levels"].push_back(Json{{"k", level.k},
                                        {"eigenvalue", rational_json(level.eigenvalue)},
                                        {"multiplicity", level.expected_multiplicity},
                                        {"rank", level.rank},
                                        {"eigen_relations_hold", level.eigen_relations_hold}});
    }
    report["consistent"] = r.consistent();
    emit(ctx, report.dump(2) + "\n");
    std::vector<std::filesystem::path> outs;
    if (!ctx.out.empty() && ctx.out != "-") outs.emplace_back(ctx.out);
    finish(ctx, "spectrum", 0, outs, manifest_for(ctx.out));
    return r.consistent() ? kExitOk : kExitFailure;
}

int run_stationary(Context& ctx, const std::string& instance, int n, const std::string& p_text, int cap, std::uint64_t samples,
                   std::uint64_t seed) {
    const ChainSpec spec = make_chain(instance, strict_p(p_text), cap);
    const LevelSpace& level = enumerate_level(spec, n);
    const std::vector<Rational> m = stationary(spec, n);
    Json report;
    report["instance"] = instance;
    report["n"] = n;
    report["p"] = rational_json(spec.p());
    report["distribution"] = Json::object();
    std::map<std::string, Rational> exact;
    for (std::size_t i = 0; i < level.size(); ++i) {
        report["distribution"][level.states[i]] = rational_json(m[i]);
        exact[level.states[i]] = m[i];
    }
    bool ok = true;
    if (n + 1 <= cap) {
        const StationaryReport st = stationary_report(spec, n);
        report["checks"] = Json{{"fixed_point", st.fixed_point}, {"up_consistent", st.up_consistent},
                                {"down_consistent", st.down_consistent}, {"full_support", st.full_support}};
        ok = st.ok();
    }
    if (samples > 0) {
        Rng rng = Rng::substream(seed, 0, 3);
        std::map<std::string, std::uint64_t> seen;
        std::uint64_t p4_free = 0;
        const graph::UGraph p4 = graph::named_graph("P4");
        for (std::uint64_t i = 0; i < samples; ++i) {
            if (instance == "perm") {
                ++seen[perm::recursive_separable_sample(n, spec.p(), rng).encode()];
            } else {
                const graph::LabeledGraph g = graph::cograph_sample_labeled(n, spec.p(), rng);
                if (n < 4 || graph::induced_occ(p4, g) == 0) ++p4_free;
                ++seen[graph::canonical_form(g).encode()];
            }
        }
        const stats::ChiSquare chi = stats::chi_square(seen, exact, samples);
        Json sampler{{"samples", samples}, {"seed", seed}, {"chi_square", chi.statistic}, {"critical_99", chi.critical}, {"pass", chi.pass()}};
        if (instance == "graph") sampler["p4_free"] = p4_free;
        report["sampler"] = sampler;
        ok = ok && chi.pass() && (instance == "perm" || p4_free == samples);
    }
    report["ok"] = ok;
    emit(ctx, report.dump(2) + "\n");
    std::vector<std::filesystem::path> outs;
    if (!ctx.out.empty() && ctx.out != "-") outs.emplace_back(ctx.out);
    finish(ctx, "stationary", seed, outs, manifest_for(ctx.out));
    return ok ? kExitOk : kExitFailure;
}

int run_kernel(Context& ctx, const std::string& instance, const std::string& kind, int n, const std::string& p_text, int cap) {
    const ChainSpec spec = make_chain(instance, strict_p(p_text), cap);
    const StochKernel* k = nullptr;
    if (kind == "up") {
        k = &build_up_kernel(spec, n);
    } else if (kind == "down") {
        k = &build_down_kernel(spec, n);
    } else if (kind == "updown") {
        k = &updown_operator(spec, n);
    } else {
        throw InvalidArgument("kernel kind must be up, down or updown");
    }
    emit(ctx, kernel_to_json(spec, *k) + "\n");
    std::vector<std::filesystem::path> outs;
    if (!ctx.out.empty() && ctx.out != "-") outs.emplace_back(ctx.out);
    finish(ctx, "kernel", 0, outs, manifest_for(ctx.out));
    return kExitOk;
}

// Separation distance -------------------------------------------------------

sep::Float to_float(const std::string& value) {
    const std::size_t slash = value.find('/');
    if (slash == std::string::npos) return sep::Float(value);
    return sep::Float(value.substr(0, slash)) / sep::Float(value.substr(slash + 1));
}

int run_sepdist(Context& ctx, const std::string& mode, int n, const std::string& m_text, const std::string& t_text,
                const std::string& instance, const std::string& p_text, bool check_eta, bool brute_force) {
    sep::SepCurve curve;
    curve.mode = mode;
    curve.n = n;
    curve.p = p_text;
    bool ok = true;
    constexpr double kResidualLimit = 1e-12;
    if (mode == "discrete") {
        if (n < 1) throw InvalidArgument("--n is required for discrete mode");
        if (m_text.empty()) throw InvalidArgument("--m is required for discrete mode");
        const std::vector<long> steps = io::parse_integer_grid(m_text);
        std::optional<ChainSpec> spec;
        if (brute_force) {
            spec.emplace(make_chain(instance, strict_p(p_text), std::max(n + 1, 2)));
            curve.extra_names = {"brute_force_gap"};
            curve.extra.emplace_back();
        }
        for (long m : steps) {
            if (m < 0) throw InvalidArgument("step counts must be >= 0");
            curve.abscissae.push_back(std::to_string(m));
            curve.values.push_back(sep::sepdist_perm(n, m));
            if (brute_force) {
                const Rational bf = sep::sepdist_bruteforce(*spec, n, static_cast<int>(m));
                const sep::Evaluation& e = curve.values.back();
                const bool same = e.exact ? *e.exact == bf : boost::multiprecision::abs(e.value - to_float(to_string(bf))) <= e.err_bound;
                ok = ok && same;
                curve.extra.back().push_back(e.exact ? to_float(to_string(*e.exact - bf)) : e.value - to_float(to_string(bf)));
            }
        }
    } else if (mode == "continuous") {
        if (n < 1) throw InvalidArgument("--n is required for continuous mode");
        if (t_text.empty()) throw InvalidArgument("--t is required for continuous mode");
        const std::vector<Rational> rates = sep::perm_rates(n);
        for (const io::GridPoint& g : io::parse_real_grid(t_text)) {
            curve.abscissae.push_back(g.label);
            curve.values.push_back(sep::sepdist_formula_continuous(rates, to_float(g.value)));
        }
        curve.extra_names = {"limit_value"};
        curve.extra.emplace_back();
        for (const std::string& a : curve.abscissae) {
            const sep::Float t = to_float(a);
            curve.extra.back().push_back(t > 0 ? sep::sepdist_limit(t) : sep::Float(1));
        }
    } else if (mode == "limit") {
        if (t_text.empty()) throw InvalidArgument("--t is required for limit mode");
        curve.extra_names = {"complement"};
        curve.extra.emplace_back();
        if (check_eta) {
            curve.extra_names.insert(curve.extra_names.end(), {"product_residual", "symmetry_residual"});
            curve.extra.emplace_back();
            curve.extra.emplace_back();
        }
        for (const io::GridPoint& g : io::parse_real_grid(t_text)) {
            const sep::Float t = to_float(g.value);
            if (t <= 0) throw InvalidArgument("limit mode needs t > 0");
            curve.abscissae.push_back(g.label);
            sep::Evaluation e;
            e.value = sep::sepdist_limit(t);
            e.err_bound = boost::multiprecision::abs(e.value) * sep::Float("1e-18");
            e.method = "float50-series";
            curve.values.push_back(e);
            // 1 - Delta_F from the product, accurate where the series cancels to nearly 1.
            const sep::Float complement = sep::one_minus_limit_product(t);
            curve.extra[0].push_back(complement);
            if (check_eta) {
                const sep::Float product_residual = boost::multiprecision::abs(e.value - (1 - complement));
                const sep::Float symmetry = sep::symmetry_residual(t);
                curve.extra[1].push_back(product_residual);
                curve.extra[2].push_back(symmetry);
                ok = ok && product_residual < kResidualLimit && symmetry < kResidualLimit;
            }
        }
    } else {
        throw InvalidArgument("--mode must be discrete, continuous or limit");
    }
    std::ostringstream csv;
    sep::write_csv(csv, curve);
    emit(ctx, csv.str());
    std::vector<std::filesystem::path> outs;
    if (!ctx.out.empty() && ctx.out != "-") outs.emplace_back(ctx.out);
    finish(ctx, "sepdist", 0, outs, manifest_for(ctx.out));
    return ok ? kExitOk : kExitFailure;
}

// Simulation -----------------------------------------------------------------

mc::SimConfig sim_config(const std::string& instance, int n, const std::string& p_text, int traj, const std::string& t_text,
                         std::uint64_t seed, const std::string& initial, int workers) {
    mc::SimConfig c;
    c.instance = mc::parse_instance(instance);
    c.n = n;
    c.p = parse_rational(p_text);
    c.trajectories = traj;
    if (!t_text.empty()) c.t_grid = io::parse_rational_grid(t_text);
    c.master_seed = seed;
    c.initial = mc::parse_initial(initial.empty() ? (c.instance == mc::Instance::perm ? "identity" : "empty") : initial);
    c.workers = workers;
    return c;
}

int run_simulate(Context& ctx, const mc::SimConfig& config, const std::vector<std::string>& patterns) {
    if (patterns.empty()) throw InvalidArgument("at least one --pattern is required");
    std::ostringstream csv;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        std::ostringstream one;
        mc::write_curve_csv(one, mc::estimate_density_curve(config, patterns[i]));
        std::string text = one.str();
        if (i > 0) text = text.substr(text.find('\n') + 1);
        csv << text;
    }
    emit(ctx, csv.str());
    std::vector<std::filesystem::path> outs;
    if (!ctx.out.empty() && ctx.out != "-") outs.emplace_back(ctx.out);
    finish(ctx, "simulate", config.master_seed, outs, manifest_for(ctx.out), config.workers);
    return kExitOk;
}

int run_frames(Context& ctx, mc::SimConfig config, const std::string& steps_text, const std::string& out_dir) {
    if (out_dir.empty()) throw InvalidArgument("--out-dir is required");
    std::vector<std::uint64_t> steps;
    if (!steps_text.empty()) {
        if (!config.t_grid.empty()) throw InvalidArgument("give either --steps or --t, not both");
        for (long s : io::parse_integer_grid(steps_text)) {
            if (s < 0) throw InvalidArgument("step counts must be >= 0");
            steps.push_back(static_cast<std::uint64_t>(s));
        }
    } else if (!config.t_grid.empty()) {
        for (const Rational& t : config.t_grid) steps.push_back(mc::steps_at(config.n, t));
    } else {
        throw InvalidArgument("one of --steps or --t is required");
    }
    config.t_grid = {0};
    config.trajectories = 1;
    config.validate();
    const std::vector<std::filesystem::path> files = mc::emit_frames(config, steps, out_dir);
    std::cerr << "wrote " << files.size() << " frames to " << out_dir << "\n";
    finish(ctx, "frames", config.master_seed, files, std::filesystem::path(out_dir) / "manifest.json");
    return kExitOk;
}

// Semi-discrete ----------------------------------------------------------------

int run_semidiscrete(Context& ctx, const std::string& sigma_text, const std::string& pi_text, const std::string& p_text,
                     const std::string& eps_text, std::uint64_t samples, std::uint64_t seed) {
    const perm::Permutation sigma = perm::Permutation::parse(sigma_text);
    const perm::Permutation pi = perm::Permutation::parse(pi_text);
    const Rational p = parse_rational(p_text);
    const Rational eps = parse_rational(eps_text);
    if (p < 0 || p > 1) throw InvalidArgument("p must lie in [0, 1]");
    if (eps <= 0 || eps >= 1) throw InvalidArgument("eps must lie in (0, 1)");
    const semi::GeneratorReport r = semi::generator_limit_check(sigma, pi, p);
    auto exact = [&](const perm::Permutation& tau) { return semi::permuton_density_exact(sigma, tau); };
    const semi::EpsPolynomial expected = semi::inf_eps_expected_density(pi, p, exact);

    Json report;
    report["sigma"] = r.sigma;
    report["pi"] = r.pi;
    report["p"] = rational_json(p);
    report["eps"] = to_decimal_string(eps);
    report["density"] = rational_json(r.density);
    Json coeffs = Json::array();
    for (std::size_t i = 0; i <= expected.degree(); ++i) coeffs.push_back(rational_json(expected.coefficient(i)));
    report["expected_density_coefficients"] = coeffs;
    report["expected_density_at_eps"] = rational_json(expected(eps));
    report["generator_at_eps"] = rational_json(semi::generator_eps(sigma, pi, p, eps));
    report["difference_coefficients"] = Json{{"eps0", rational_json(r.c0)}, {"eps1", rational_json(r.c1)}, {"eps2", rational_json(r.c2)}};
    report["generator_limit"] = rational_json(r.limit);
    report["generator_expected"] = rational_json(r.expected);
    report["limit_check_holds"] = r.holds();
    bool ok = r.holds();
    if (samples > 0) {
        Rng rng = Rng::substream(seed, 0, 4);
        const semi::PermutonMeasure mu = semi::PermutonMeasure::from_permutation(sigma);
        const semi::Estimate lhs = semi::mc_inflated_density(mu, pi, p, to_double(eps), samples, rng);
        const double rhs = to_double(expected(eps));
        const double z = lhs.stderr_ > 0 ? std::abs(lhs.mean - rhs) / lhs.stderr_ : (lhs.mean == rhs ? 0.0 : 1e300);
        report["monte_carlo"] = Json{{"samples", samples}, {"seed", seed}, {"estimate", lhs.mean}, {"stderr", lhs.stderr_},
                                     {"symbolic", rhs}, {"z", z}, {"within_3_stderr", z < 3}};
        ok = ok && z < 3;
    }
    report["ok"] = ok;
    emit(ctx, report.dump(2) + "\n");
    std::vector<std::filesystem::path> outs;
    if (!ctx.out.empty() && ctx.out != "-") outs.emplace_back(ctx.out);
    finish(ctx, "semidiscrete", seed, outs, manifest_for(ctx.out));
    return ok ? kExitOk : kExitFailure;
}

// key=value config file: entries become "--key value" unless the flag was given.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") path = args[i + 1];
    }
    for (const std::string& a : args) {
        if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config file " + path);
    std::string line;
    std::vector<std::string> extra;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw InvalidArgument("config line without '=': " + line);
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        const std::string flag = "--" + key;
        bool given = false;
        for (const std::string& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
        if (given) continue;
        extra.push_back(flag);
        if (value != "true") extra.push_back(value);
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Up-down chains on permutations and graphs: exact verification, separation distance, simulation"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", io::tool_version());

    Context ctx;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", ctx.out, "Output file (default: stdout)");
        sub->add_option("--manifest", ctx.manifest, "Run manifest path (default: <out>.manifest.json)");
        sub->add_option("--config", ctx.config_path, "key=value file; command-line flags take precedence");
    };

    std::string instance = "perm";
    std::string p_text = "1/2";
    int cap = kDefaultPermCap;
    int n = 0;
    int nmax = 5;

    CLI::App* verify = app.add_subcommand("verify", "Exact verification suite up to nmax");
    verify->add_option("--instance", instance)->check(CLI::IsMember({"perm", "graph"}));
    verify->add_option("--nmax", nmax);
    verify->add_option("--p", p_text, "Rational a/b");
    verify->add_option("--cap", cap, "Largest level enumerated exactly");
    common(verify);

    CLI::App* spectrum = app.add_subcommand("spectrum", "Eigenvalues, multiplicities and ranks at level n");
    spectrum->add_option("--instance", instance)->check(CLI::IsMember({"perm", "graph"}));
    spectrum->add_option("--n", n)->required();
    spectrum->add_option("--p", p_text, "Rational a/b");
    spectrum->add_option("--cap", cap);
    common(spectrum);

    std::uint64_t samples = 0;
    std::uint64_t seed = 1;
    CLI::App* stationary_cmd = app.add_subcommand("stationary", "Exact stationary law and optional sampler test");
    stationary_cmd->add_option("--instance", instance)->check(CLI::IsMember({"perm", "graph"}));
    stationary_cmd->add_option("--n", n)->required();
    stationary_cmd->add_option("--p", p_text, "Rational a/b");
    stationary_cmd->add_option("--cap", cap);
    stationary_cmd->add_option("--samples", samples, "Sampler draws for the chi-square test (0 = skip)");
    stationary_cmd->add_option("--seed", seed);
    common(stationary_cmd);

    std::string kind = "updown";
    CLI::App* kernel = app.add_subcommand("kernel", "Export an exact kernel as JSON");
    kernel->add_option("--instance", instance)->check(CLI::IsMember({"perm", "graph"}));
    kernel->add_option("--kind", kind)->check(CLI::IsMember({"up", "down", "updown"}));
    kernel->add_option("--n", n)->required();
    kernel->add_option("--p", p_text, "Rational a/b");
    kernel->add_option("--cap", cap);
    common(kernel);

    std::string mode = "discrete";
    std::string m_text;
    std::string t_text;
    bool check_eta = false;
    bool brute_force = false;
    CLI::App* sepdist = app.add_subcommand("sepdist", "Separation distance curves (CSV)");
    sepdist->add_option("--mode", mode)->check(CLI::IsMember({"discrete", "continuous", "limit"}));
    sepdist->add_option("--n", n);
    sepdist->add_option("--m", m_text, "Step grid, e.g. 0..20:1");
    sepdist->add_option("--t", t_text, "Time grid: v, v1,v2, a..b:step, a..b (50 log-spaced) or a..b*N");
    sepdist->add_option("--instance", instance)->check(CLI::IsMember({"perm", "graph"}));
    sepdist->add_option("--p", p_text);
    sepdist->add_flag("--check-eta", check_eta, "Add product and symmetry residual columns (limit mode)");
    sepdist->add_flag("--brute-force", brute_force, "Compare with the exact matrix computation (discrete mode)");
    common(sepdist);

    int traj = 64;
    int workers = 1;
    std::string initial;
    std::vector<std::string> patterns;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo density curves (CSV)");
    simulate->add_option("--instance", instance)->check(CLI::IsMember({"perm", "graph"}));
    simulate->add_option("--n", n)->required();
    simulate->add_option("--p", p_text);
    simulate->add_option("--traj", traj);
    simulate->add_option("--t", t_text, "Scaled time grid, e.g. 0..2:0.1")->required();
    simulate->add_option("--pattern", patterns, "Pattern (repeatable): permutation, graph name or n:bits")->required();
    simulate->add_option("--initial", initial, "identity | reverse | empty | complete | uniform | stationary | <state> (default: identity or empty)");
    simulate->add_option("--seed", seed);
    simulate->add_option("--workers", workers);
    common(simulate);

    std::string steps_text;
    std::string out_dir;
    CLI::App* frames = app.add_subcommand("frames", "Write PGM snapshots of one trajectory");
    frames->add_option("--instance", instance)->check(CLI::IsMember({"perm", "graph"}));
    frames->add_option("--n", n)->required();
    frames->add_option("--p", p_text);
    frames->add_option("--steps", steps_text, "Step grid, e.g. 0..1500:50");
    frames->add_option("--t", t_text, "Scaled time grid (alternative to --steps)");
    frames->add_option("--initial", initial);
    frames->add_option("--seed", seed);
    frames->add_option("--workers", workers, "Accepted for symmetry with simulate; frames follow one trajectory");
    frames->add_option("--out-dir", out_dir)->required();
    frames->add_option("--manifest", ctx.manifest);
    frames->add_option("--config", ctx.config_path, "key=value file; command-line flags take precedence");

    std::string sigma_text;
    std::string pi_text;
    std::string eps_text = "1/10";
    CLI::App* semidiscrete = app.add_subcommand("semidiscrete", "Eps-inflation expansion and generator limit at mu_sigma");
    semidiscrete->add_option("--sigma", sigma_text)->required();
    semidiscrete->add_option("--pi", pi_text)->required();
    semidiscrete->add_option("--p", p_text);
    semidiscrete->add_option("--eps", eps_text);
    semidiscrete->add_option("--samples", samples, "Direct simulation draws (0 = skip)");
    semidiscrete->add_option("--seed", seed);
    common(semidiscrete);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_file(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (verify->parsed()) {
            ctx.sub = verify;
            return run_verify(ctx, instance, nmax, p_text, cap);
        }
        if (spectrum->parsed()) {
            ctx.sub = spectrum;
            return run_spectrum(ctx, instance, n, p_text, cap);
        }
        if (stationary_cmd->parsed()) {
            ctx.sub = stationary_cmd;
            return run_stationary(ctx, instance, n, p_text, cap, samples, seed);
        }
        if (kernel->parsed()) {
            ctx.sub = kernel;
            return run_kernel(ctx, instance, kind, n, p_text, cap);
        }
        if (sepdist->parsed()) {
            ctx.sub = sepdist;
            return run_sepdist(ctx, mode, n, m_text, t_text, instance, p_text, check_eta, brute_force);
        }
        if (simulate->parsed()) {
            ctx.sub = simulate;
            const mc::SimConfig config = sim_config(instance, n, p_text, traj, t_text, seed, initial, workers);
            config.validate();
            return run_simulate(ctx, config, patterns);
        }
        if (frames->parsed()) {
            ctx.sub = frames;
            return run_frames(ctx, sim_config(instance, n, p_text, 1, t_text, seed, initial, 1), steps_text, out_dir);
        }
        if (semidiscrete->parsed()) {
            ctx.sub = semidiscrete;
            return run_semidiscrete(ctx, sigma_text, pi_text, p_text, eps_text, samples, seed);
        }
    } catch (const LevelCapExceeded& e) {
        std::cerr << "error: " << e.what() << " (raise --cap or lower the size)\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
