#include "cli.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "wg/config.hpp"
#include "wg/dilute.hpp"
#include "wg/disorder.hpp"
#include "wg/error.hpp"
#include "wg/io.hpp"
#include "wg/potentials.hpp"
#include "wg/regroup.hpp"
#include "wg/simd/kernels.hpp"
#include "wg/stats.hpp"

namespace wg::cli {

namespace {

using nlohmann::json;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string box;
    std::string out;
    std::optional<std::size_t> samples;
    std::optional<std::size_t> trials;
    std::optional<double> tol;
    bool inject_fault = false;
};

struct Outcome {
    int code = kPass;
    json report;
    std::vector<std::string> files;
};

RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (f.config.empty()) {
        cfg = parse_config(R"({"model": {"model": "rfim", "dim": 2, "J": 1.0, "h": 1.0}, "box": "3x3"})",
                           "<default>");
    } else {
        std::ifstream in(f.config);
        if (!in) throw ConfigError(f.config + ": cannot open config");
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        // a manifest from an earlier run carries the resolved config
        json j = json::parse(text, nullptr, false);
        if (j.is_object() && j.contains("manifest_version") && j.contains("config"))
            text = j["config"].dump(2);
        cfg = parse_config(text, f.config);
    }
    if (f.seed) cfg.seed = f.seed;
    if (!f.box.empty()) {
        cfg.boxes = {parse_extents(f.box)};
        if (static_cast<int>(cfg.boxes[0].size()) != cfg.model->dim())
            throw ConfigError("--box " + f.box + ": dimension differs from the model's");
        if (!cfg.window.empty()) {
            for (std::size_t a = 0; a < cfg.window.size(); ++a)
                if (cfg.window[a] > cfg.boxes[0][a]) throw ConfigError("window does not fit in --box");
        }
    }
    if (!f.out.empty()) cfg.out = f.out;
    if (f.samples) cfg.samples = std::max<std::size_t>(1, *f.samples);
    if (f.trials) cfg.trials = std::max<std::size_t>(1, *f.trials);
    if (f.tol) {
        if (!(*f.tol > 0.0)) throw ConfigError("--tol must be positive");
        cfg.tol = *f.tol;
    }
    return cfg;
}

Box box_of(const std::vector<int>& extents) { return Box::from_extents(extents); }

SiteSet window_of(const RunConfig& cfg, const Box& box, std::size_t default_cap) {
    std::vector<int> w = cfg.window;
    if (w.empty()) {
        w.assign(box.dim(), 0);
        for (int a = 0; a < box.dim(); ++a) w[a] = box.extent(a);
        // shrink the largest extent until the window is small enough
        auto size = [&] {
            std::size_t s = 1;
            for (int e : w) s *= static_cast<std::size_t>(e);
            return s;
        };
        while (size() > default_cap) *std::max_element(w.begin(), w.end()) -= 1;
    }
    for (int a = 0; a < box.dim(); ++a)
        if (w[a] > box.extent(a)) throw ConfigError("window does not fit in the box");
    Site hi = box.lower();
    for (int a = 0; a < box.dim(); ++a) hi[a] += w[a] - 1;
    return Box(box.lower(), hi).sites();
}

Site center_of(const Box& box) {
    Site x = box.lower();
    for (int a = 0; a < box.dim(); ++a) x[a] += (box.extent(a) - 1) / 2;
    return x;
}

json sites_json(const SiteSet& s) {
    json a = json::array();
    for (const Site& x : s) a.push_back(x.coords());
    return a;
}

std::vector<int> random_config(std::mt19937_64& rng, std::size_t n, int radix) {
    std::uniform_int_distribution<int> d(0, radix - 1);
    std::vector<int> v(n);
    for (int& x : v) x = d(rng);
    return v;
}

std::uint64_t random_submask(std::mt19937_64& rng, std::uint64_t of) {
    std::uint64_t m = 0;
    for (std::uint64_t b = of; b; b &= b - 1)
        if (rng() & 1) m |= b & (~b + 1);
    return m;
}

std::uint64_t random_nonempty_submask(std::mt19937_64& rng, std::uint64_t of) {
    for (;;) {
        const std::uint64_t m = random_submask(rng, of);
        if (m) return m;
    }
}

// Adds a small offset to one entry, preferring a multi-site one.
json inject_fault(PotentialTable& t) {
    std::uint64_t target = 0;
    for (const auto& [m, e] : t.entries())
        if (std::popcount(m) >= 2) {
            target = m;
            break;
        }
    if (!target && !t.entries().empty()) target = t.entries().begin()->first;
    if (!target) {
        // empty table: plant a spurious singleton
        std::vector<double> v(t.local() ? static_cast<std::size_t>(t.radix()) : 1, 0.0);
        t.add(1, v);
        target = 1;
    }
    t.find(target)->values[0] += 1e-3;
    return {{"sites", sites_json(t.window().set_of(target))}, {"offset", 1e-3}};
}

PropertyResult property(const std::string& name, double tol) {
    PropertyResult r;
    r.property = name;
    r.tolerance = tol;
    return r;
}

void record(PropertyResult& r, double violation, const json& witness) {
    ++r.trials;
    if (violation > r.max_abs_violation || std::isnan(violation)) {
        r.max_abs_violation = std::isnan(violation) ? INFINITY : violation;
        if (r.max_abs_violation > r.tolerance) r.witness = witness;
    }
}

Outcome cmd_check(const RunConfig& cfg, bool fault) {
    const Box box = box_of(cfg.boxes.front());
    QKernelContext ctx(cfg.model, box, make_boundary(*cfg.model, cfg.bc));
    const NormalizingMeasure alpha = make_alpha(cfg, ctx.size());
    const std::uint64_t seed = cfg.seed.value_or(20240601);
    std::vector<PropertyResult> results;

    QCheckOptions qo;
    qo.trials = cfg.trials;
    qo.seed = seed;
    qo.tolerance = cfg.tol;
    for (auto& r : check_q_properties(ctx, qo)) results.push_back(r);

    const SiteSet wsites = window_of(cfg, box, 10);
    const Window win(wsites);
    PotentialTable table = free_energy_potential(ctx, alpha, wsites);
    json fault_info;
    if (fault) fault_info = inject_fault(table);

    results.push_back(check_mobius_roundtrip(table, ctx, alpha, cfg.tol));
    results.push_back(check_alpha_normalization(table, ctx, alpha, cfg.tol));

    std::mt19937_64 rng(seed ^ 0x5eed);
    const int R = ctx.radix();
    const std::uint64_t full = win.full_mask();
    const auto widx = ctx.indices(wsites);

    PropertyResult mart = property("martingale", cfg.tol);
    const std::size_t triples = std::min<std::size_t>(cfg.trials, 50);
    for (std::size_t t = 0; t < triples; ++t) {
        const std::uint64_t dm = random_nonempty_submask(rng, full);
        const std::uint64_t lm = random_submask(rng, dm);
        const SiteSet lam = win.set_of(lm), del = win.set_of(dm);
        const auto el = random_config(rng, lam.size(), R);
        record(mart, check_martingale(ctx, lam, del, el, alpha),
               {{"lambda", sites_json(lam)}, {"delta", sites_json(del)}, {"eta_lambda", el}});
    }
    results.push_back(mart);

    PropertyResult ps = property("partial_sum", cfg.tol);
    std::vector<std::uint64_t> lambdas;
    for (std::size_t i = 0; i < wsites.size(); ++i) lambdas.push_back(std::uint64_t{1} << i);
    lambdas.push_back(random_nonempty_submask(rng, full));
    for (std::uint64_t lm : lambdas) {
        const auto eta_box = random_config(rng, ctx.size(), R);
        std::vector<int> eta_w(wsites.size());
        for (std::size_t i = 0; i < widx.size(); ++i) eta_w[i] = eta_box[widx[i]];
        const std::uint64_t others = full & ~lm;
        for (std::uint64_t s = others;; s = (s - 1) & others) {
            const std::uint64_t dm = lm | s;
            const double a = partial_sum(table, lm, dm, eta_w);
            const double b = partial_sum_direct(ctx, win.set_of(lm), win.set_of(dm), eta_box, alpha);
            record(ps, std::abs(a - b),
                   {{"lambda", sites_json(win.set_of(lm))}, {"delta", sites_json(win.set_of(dm))},
                    {"eta", eta_box}, {"table", a}, {"direct", b}});
            if (s == 0) break;
        }
    }
    results.push_back(ps);

    if (wsites.size() == ctx.size()) {
        PropertyResult rc = property("reconstruction", cfg.tol);
        const int S = ctx.spec().spin_radix();
        for (std::size_t t = 0; t < std::min<std::size_t>(cfg.trials, 20); ++t) {
            const std::uint64_t lm = random_nonempty_submask(rng, full);
            if (std::popcount(lm) > 2) continue;
            const SiteSet lam = win.set_of(lm);
            JointState xi{random_config(rng, ctx.size(), S), random_config(rng, ctx.size(), R)};
            const auto direct = joint_conditional(ctx, lam, xi);
            const auto rec = reconstruct_conditional(ctx, table, lam, wsites, xi);
            record(rc, direct.max_abs_diff(rec), {{"lambda", sites_json(lam)}, {"eta", xi.eta}, {"sigma", xi.sigma}});
        }
        results.push_back(rc);
    }

    if (cfg.regroup != "none") {
        const RegroupingScheme scheme = cfg.regroup == "shell"
                                            ? RegroupingScheme::shell(win)
                                            : RegroupingScheme::kozlov(win, SiteOrder::spiral(center_of(box)));
        const PotentialTable g = regroup(table, scheme);
        PropertyResult ne = property("net_equality_" + cfg.regroup, cfg.tol);
        for (std::uint64_t lm : lambdas) {
            auto e1 = random_config(rng, wsites.size(), R);
            auto e2 = e1;
            for (std::size_t i = 0; i < wsites.size(); ++i)
                if (lm >> i & 1) e2[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(R));
            const NetCheck nc = check_net_equality(table, g, scheme, lm, e1, e2);
            record(ne, nc.max_abs_violation, {{"lambda", sites_json(win.set_of(lm))}, {"eta1", e1}, {"eta2", e2}});
        }
        results.push_back(ne);
    }

    Outcome o;
    bool ok = true;
    json rs = json::array();
    for (const auto& r : results) {
        ok = ok && r.passed();
        rs.push_back(r.to_json());
    }
    o.code = ok ? kPass : kViolation;
    o.report = {{"box", box.str()}, {"window", sites_json(wsites)}, {"alpha", alpha.tag()},
                {"bc", ctx.layout().bc().label(ctx.spec())}, {"results", rs}, {"passed", ok}};
    if (fault) o.report["injected_fault"] = fault_info;
    write_json(cfg.out + "/check.json", o.report);
    o.files.push_back("check.json");
    return o;
}

Outcome cmd_potential(const RunConfig& cfg, bool fault) {
    const Box box = box_of(cfg.boxes.front());
    QKernelContext ctx(cfg.model, box, make_boundary(*cfg.model, cfg.bc));
    const NormalizingMeasure alpha = make_alpha(cfg, ctx.size());
    const SiteSet wsites = window_of(cfg, box, 12);
    const Window win(wsites);
    PotentialTable table = free_energy_potential(ctx, alpha, wsites);
    table.prune(1e-14);
    annotate_forms(table);
    if (fault) inject_fault(table);
    const PropertyResult norm = check_alpha_normalization(table, ctx, alpha, cfg.tol);

    PotentialTable out_table = table;
    if (cfg.regroup == "kozlov")
        out_table = regroup(table, RegroupingScheme::kozlov(win, SiteOrder::spiral(center_of(box))));
    else if (cfg.regroup == "shell")
        out_table = shell_regroup(table);

    // support sizes by |A|, max |U_A| by diameter
    std::map<std::size_t, std::size_t> by_size;
    std::map<int, double> by_diam;
    for (const auto& [m, e] : out_table.entries()) {
        double mx = 0.0;
        for (double v : e.values) mx = std::max(mx, std::abs(v));
        if (mx == 0.0) continue;
        ++by_size[static_cast<std::size_t>(std::popcount(m))];
        const int d = win.set_of(m).diameter();
        by_diam[d] = std::max(by_diam[d], mx);
    }
    std::ostringstream s;
    s << "window " << win.size() << " sites, alpha " << alpha.tag() << ", regroup " << cfg.regroup << "\n";
    s << "entries " << out_table.support_size(0.0) << "\n";
    s << "support by |A|:\n";
    for (auto [k, n] : by_size) s << "  " << k << ": " << n << "\n";
    s << "max |U_A| by diameter:\n";
    for (auto [d, v] : by_diam) s << "  " << d << ": " << format_number(v) << "\n";
    s << "alpha normalization residual " << format_number(norm.max_abs_violation) << "\n";

    Outcome o;
    write_json(cfg.out + "/potential.json", to_json(out_table));
    write_text(cfg.out + "/summary.txt", s.str());
    o.files = {"potential.json", "summary.txt"};
    o.code = norm.passed() ? kPass : kViolation;
    o.report = {{"entries", out_table.support_size(0.0)}, {"normalization", norm.to_json()}};
    return o;
}

std::optional<std::uint64_t> need_seed(const RunConfig& cfg, std::ostream& err, const char* cmd) {
    if (!cfg.seed) err << cmd << ": --seed (or a seed in the config) is required for Monte Carlo runs\n";
    return cfg.seed;
}

Outcome cmd_converge(const RunConfig& cfg, std::uint64_t seed) {
    Csv csv({"box", "x", "r", "epsilon", "stderr", "diff_prev", "diff_prev_stderr", "samples", "flagged",
             "increase_flag", "partial_sum"});
    json rows = json::array();
    std::size_t prev_size = 0;
    for (const auto& ext : cfg.boxes) {
        const Box box = box_of(ext);
        if (box.size() <= prev_size) throw ConfigError("converge: box sequence must be increasing");
        prev_size = box.size();
        QKernelContext ctx(cfg.model, box, make_boundary(*cfg.model, cfg.bc));
        const NormalizingMeasure alpha = make_alpha(cfg, ctx.size());
        const Site x = center_of(box);
        EpsilonOptions eo;
        eo.samples = cfg.samples;
        eo.seed = seed;
        const ConvergenceDiagnostic d = epsilon_diagnostic(ctx, x, cfg.radii, eo);
        const DisorderConfig eta = DisorderSampler(ctx.spec(), ctx.size(), seed).sample(0);
        for (std::size_t k = 0; k < d.rows.size(); ++k) {
            const EpsilonRow& r = d.rows[k];
            std::vector<Site> ball;
            for (const Site& z : box.sites())
                if (linf_distance(z, x) <= r.r) ball.push_back(z);
            double psum = NAN;
            try {
                psum = partial_sum_direct(ctx, SiteSet{x}, SiteSet(ball), eta, alpha);
            } catch (const CapExceeded&) {
            }
            const bool inc = k > 0 && r.diff_prev > 2.0 * r.diff_prev_stderr && r.diff_prev > 0.0;
            csv.row({box.str(), x.str(), r.r, r.epsilon, r.stderr_, r.diff_prev, r.diff_prev_stderr,
                     r.samples, r.flagged ? 1 : 0, inc ? 1 : 0, psum});
            rows.push_back({{"box", box.str()}, {"r", r.r}, {"epsilon", r.epsilon}, {"stderr", r.stderr_},
                            {"increase_flag", inc}, {"partial_sum", psum}});
        }
    }
    Outcome o;
    write_text(cfg.out + "/converge.csv", csv.str());
    o.files = {"converge.csv"};
    o.report = {{"rows", rows}};
    return o;
}

Outcome cmd_correlations(const RunConfig& cfg, std::uint64_t seed) {
    const Box box = box_of(cfg.boxes.front());
    QKernelContext ctx(cfg.model, box, make_boundary(*cfg.model, cfg.bc));
    Csv csv({"m", "cbar", "stderr", "samples", "flagged", "x", "y"});
    std::vector<std::pair<int, double>> table;
    std::vector<double> ms, logs;
    CbarOptions co;
    co.samples = cfg.samples;
    co.seed = seed;
    for (int m : cfg.separations) {
        const CorrelationEstimate c = cbar(ctx, m, co);
        csv.row({m, c.cbar, c.stderr_, c.samples, c.flagged ? 1 : 0, c.x.str(), c.y.str()});
        table.emplace_back(m, c.cbar);
        if (c.cbar > 0.0) {
            ms.push_back(m);
            logs.push_back(std::log(c.cbar));
        }
    }
    const AprioriConstants k = apriori_constants(ctx.spec());
    const DecayBudget b = decay_budget(table, {}, ctx.spec().dim(), k.c1, k.c2);
    const LinearFit fit = linear_fit(ms, logs);
    json report{{"delta_h_bound", k.delta_h_bound},
                {"budget", {{"c1", b.c1}, {"c2", b.c2}, {"total", b.total}, {"terms", b.terms},
                            {"last_term", b.last_term}, {"weight", "w=1"}}},
                {"fit", {{"valid", fit.valid}, {"slope", fit.slope}, {"intercept", fit.intercept},
                         {"slope_stderr", fit.slope_stderr}, {"ci95", {fit.ci95_low, fit.ci95_high}},
                         {"points", fit.points}}}};
    Outcome o;
    write_text(cfg.out + "/correlations.csv", csv.str());
    write_json(cfg.out + "/budget.json", report);
    o.files = {"correlations.csv", "budget.json"};
    o.report = report;
    return o;
}

Outcome cmd_dilute_coeffs(const RunConfig& cfg) {
    double J = cfg.dilute_J;
    if (cfg.model_json.value("model", "") == "dilute") J = cfg.model_json.value("J", 1.0);
    const std::vector<int> ext = cfg.window.empty() ? cfg.boxes.front() : cfg.window;
    const SiteSet w = box_of(ext).sites();
    if (w.size() > 16) throw CapExceeded("dilute coefficient window", w.size(), 16);
    const Window win(w);
    const PotentialTable m = mobius_potential(win, [&](std::uint64_t l) {
        return dilute_log_z0(J, win.set_of(l)) - std::popcount(l) * std::log(2.0);
    });
    Csv csv({"sites", "size", "connected", "coeff", "coeff_direct"});
    double worst = 0.0;
    for (const auto& [mask, e] : m.entries()) {
        const SiteSet a = win.set_of(mask);
        const bool conn = is_connected(a);
        double direct = NAN;
        if (a.size() <= 10) {
            direct = dilute_vacuum_coeff(J, a);
            worst = std::max(worst, std::abs(direct - e.values[0]));
        }
        if (!conn && std::abs(e.values[0]) > cfg.tol) worst = std::max(worst, std::abs(e.values[0]));
        std::string s;
        for (const Site& x : a) s += (s.empty() ? "" : " ") + x.str();
        csv.row({"\"" + s + "\"", a.size(), conn ? 1 : 0, e.values[0], direct});
    }
    // telescoping over the whole window
    const std::vector<double> sums = subset_sums(m);
    const double tele = std::abs(sums[win.full_mask()] - (dilute_log_z0(J, w) - w.size() * std::log(2.0)));
    Outcome o;
    write_text(cfg.out + "/dilute_coeffs.csv", csv.str());
    o.files = {"dilute_coeffs.csv"};
    o.report = {{"J", J}, {"max_path_difference", worst}, {"telescoping_residual", tele}};
    o.code = (worst <= cfg.tol && tele <= cfg.tol) ? kPass : kViolation;
    return o;
}

void write_manifest(const RunConfig& cfg, const std::string& command, const Flags& f, const Outcome& o) {
    json m{{"manifest_version", 1},
           {"command", command},
           {"config", cfg.to_json()},
           {"inject_fault", f.inject_fault},
           {"kernels", simd::kernels().name},
           {"outputs", o.files},
           {"exit_code", o.code},
           {"report", o.report}};
    write_json(cfg.out + "/manifest.json", m);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weakly Gibbsian potentials for quenched disordered spin models"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON run config (or a manifest.json)");
        sub->add_option("--seed", f.seed, "master seed for disorder sampling");
        sub->add_option("--box", f.box, "box extents, e.g. 3x3");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--samples", f.samples, "disorder samples");
        sub->add_option("--trials", f.trials, "randomised trials for identity checks");
        sub->add_option("--tol", f.tol, "absolute tolerance");
        sub->add_flag("--inject-fault", f.inject_fault, "corrupt one potential entry (test fixture)");
    };
    const std::vector<std::pair<std::string, std::string>> cmds{
        {"check", "run the exact identity suites"},
        {"potential", "build and write a potential table"},
        {"converge", "epsilon diagnostic and partial sums over a box sequence"},
        {"correlations", "cbar(m), decay budget and log-linear fit"},
        {"dilute-coeffs", "dilute Ising vacuum coefficients"}};
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : cmds) {
        subs[name] = app.add_subcommand(name, help);
        common(subs[name]);
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kPass : kConfigError;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;

    try {
        const RunConfig cfg = resolve(f);
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        if (command == "check") {
            o = cmd_check(cfg, f.inject_fault);
        } else if (command == "potential") {
            o = cmd_potential(cfg, f.inject_fault);
        } else if (command == "converge" || command == "correlations") {
            const auto seed = need_seed(cfg, err, command.c_str());
            if (!seed) return kConfigError;
            o = command == "converge" ? cmd_converge(cfg, *seed) : cmd_correlations(cfg, *seed);
        } else {
            o = cmd_dilute_coeffs(cfg);
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.report["seconds"] = secs;
        write_manifest(cfg, command, f, o);
        out << command << ": " << (o.code == kPass ? "pass" : "VIOLATION") << " (" << cfg.out << ")\n";
        if (o.code != kPass) out << o.report.dump(2) << "\n";
        return o.code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const CapExceeded& e) {
        err << "refused: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace wg::cli
