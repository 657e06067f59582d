// Acceptance runner: `acceptance --criterion N` prints one PASS/FAIL line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "oracle.hpp"
#include "wg/dilute.hpp"
#include "wg/disorder.hpp"
#include "wg/potentials.hpp"
#include "wg/quenched.hpp"
#include "wg/stats.hpp"

using namespace wg;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

std::vector<int> random_vec(std::mt19937_64& rng, std::size_t n, int radix) {
    std::vector<int> v(n);
    for (int& x : v) x = static_cast<int>(rng() % static_cast<std::uint64_t>(radix));
    return v;
}

ModelPtr rfim(int dim, double J = 0.8, double h = 0.6) { return share(make_rfim(J, h, {-1.0, 1.0}, {0.5, 0.5}, dim)); }
ModelPtr dilute(double J = 0.9, double p = 0.55) { return share(make_dilute(J, p, 2)); }
ModelPtr rbond2() { return share(make_random_bond({{{0.7, -0.5}, {0.5, 0.5}}, {{1.0, 0.2}, {0.4, 0.6}}})); }
ModelPtr rbond1() { return share(make_random_bond({{{0.9, -0.4}, {0.5, 0.5}}})); }

// 1 and 2: q-kernel identities and the expectation path on the same trials
Verdict qkernel_identities(bool dual_only) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::ostringstream d;
    for (const auto& [name, model] : std::vector<std::pair<std::string, ModelPtr>>{
             {"rfim", rfim(2)}, {"random_bond", rbond2()}, {"dilute", dilute()}}) {
        QKernelContext ctx(model, Box::from_extents({5, 5}));
        QCheckOptions o;
        o.trials = 200;
        o.seed = kSeed;
        o.max_extent = 3;
        for (const auto& r : check_q_properties(ctx, o)) {
            if (dual_only != (r.property == "dual_path")) continue;
            worst = std::max(worst, r.max_abs_violation);
            d << name << "/" << r.property << "=" << fmt(r.max_abs_violation) << " ";
            if (r.trials < 200) worst = INFINITY;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d << "runtime=" << fmt(secs) << "s";
    return {worst <= 1e-10 && (dual_only || secs <= 120.0), d.str()};
}

// 3: exhaustive conditioning against the enumerated joint measure
Verdict conditional_oracle() {
    double worst = 0.0;
    std::size_t cases = 0;
    std::ostringstream d;
    for (const auto& [name, model, ext] : std::vector<std::tuple<std::string, ModelPtr, std::vector<int>>>{
             {"rfim", rfim(2), {3, 3}}, {"dilute", dilute(), {3, 3}}, {"random_bond_1d", rbond1(), {9}}}) {
        QKernelContext ctx(model, Box::from_extents(ext));
        const auto joint = oracle::enumerate_joint(ctx);
        const std::size_t n = ctx.size();
        const SiteSet all = ctx.box().sites();
        double w = 0.0;
        std::vector<SiteSet> lambdas;
        for (std::size_t a = 0; a < n; ++a) {
            lambdas.push_back(SiteSet{all[a]});
            for (std::size_t b = a + 1; b < n; ++b) lambdas.push_back(SiteSet{all[a], all[b]});
        }
        for (const SiteSet& lam : lambdas) {
            const auto li = ctx.indices(lam);
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i)
                if (std::find(li.begin(), li.end(), i) == li.end()) rest.push_back(i);
            JointState xi{std::vector<int>(n, 0), std::vector<int>(n, 0)};
            for (std::size_t code = 0; code < (std::size_t{1} << (2 * rest.size())); ++code) {
                for (std::size_t k = 0; k < rest.size(); ++k) {
                    xi.sigma[rest[k]] = static_cast<int>(code >> (2 * k) & 1);
                    xi.eta[rest[k]] = static_cast<int>(code >> (2 * k + 1) & 1);
                }
                const auto direct = oracle::condition(joint, li, lam, xi);
                w = std::max(w, direct.max_abs_diff(joint_conditional(ctx, lam, xi)));
                ++cases;
            }
        }
        d << name << "=" << fmt(w) << " ";
        worst = std::max(worst, w);
    }
    d << "conditionings=" << cases;
    return {worst <= 1e-9, d.str()};
}

// 4: Moebius roundtrip and alpha-normalisation on windows up to 10 sites
Verdict roundtrip_normalization() {
    struct Case {
        std::string name;
        ModelPtr model;
        std::vector<int> box;
        Box window;
    };
    const std::vector<Case> cases{
        {"rfim_1x10", rfim(1), {12}, Box(Site{1}, Site{10})},
        {"rfim_2x5", rfim(2), {2, 6}, Box(Site{0, 1}, Site{1, 5})},
        {"rfim_3x3", rfim(2), {3, 4}, Box(Site{0, 0}, Site{2, 2})},
        {"dilute_2x5", dilute(), {2, 5}, Box(Site{0, 0}, Site{1, 4})},
        {"dilute_3x3", dilute(), {3, 3}, Box(Site{0, 0}, Site{2, 2})},
        {"random_bond_1x10", rbond1(), {10}, Box(Site{0}, Site{9})},
        {"random_bond_2x2", rbond2(), {3, 3}, Box(Site{1, 1}, Site{2, 2})},
    };
    double wr = 0.0, wn = 0.0;
    std::ostringstream d;
    for (const auto& c : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        QKernelContext ctx(c.model, Box::from_extents(c.box));
        const int R = ctx.radix();
        for (const auto& alpha :
             {NormalizingMeasure::product(), NormalizingMeasure::point_mass(std::vector<int>(ctx.size(), R - 1))}) {
            const auto t = free_energy_potential(ctx, alpha, c.window.sites());
            const auto rt = check_mobius_roundtrip(t, ctx, alpha, 1e-11);
            const auto nz = check_alpha_normalization(t, ctx, alpha, 1e-10);
            wr = std::max(wr, rt.max_abs_violation);
            wn = std::max(wn, nz.max_abs_violation);
            d << c.name << "/" << alpha.tag() << "=" << fmt(rt.max_abs_violation) << "," << fmt(nz.max_abs_violation)
              << " ";
        }
        d << "[" << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) << "s] ";
    }
    return {wr <= 1e-11 && wn <= 1e-10, d.str()};
}

// 5: martingale identity with exact disorder integration
Verdict martingale() {
    double worst = 0.0;
    std::size_t triples = 0;
    std::ostringstream d;
    std::mt19937_64 rng(kSeed);
    for (const auto& [name, model] :
         std::vector<std::pair<std::string, ModelPtr>>{{"rfim", rfim(2)}, {"dilute", dilute()}}) {
        QKernelContext ctx(model, Box::from_extents({3, 4}));
        const Window w(Box(Site{0, 0}, Site{1, 3}).sites());  // 8 sites
        double m = 0.0;
        for (int t = 0; t < 60; ++t) {
            const std::uint64_t dm = 1 + rng() % w.full_mask();
            std::uint64_t lm = dm & rng();
            if (!lm) lm = dm & (~dm + 1);
            const SiteSet l = w.set_of(lm), del = w.set_of(dm);
            const auto eta = random_vec(rng, l.size(), ctx.radix());
            m = std::max(m, check_martingale(ctx, l, del, eta, NormalizingMeasure::product()));
            ++triples;
        }
        d << name << "=" << fmt(m) << " ";
        worst = std::max(worst, m);
    }
    d << "triples=" << triples;
    return {worst <= 1e-9 && triples >= 100, d.str()};
}

// 6: reconstruction at full window and partial sums over every Delta
Verdict partial_sums() {
    double wrec = 0.0, wps = 0.0;
    std::size_t deltas = 0;
    std::mt19937_64 rng(kSeed + 6);
    for (const auto& model : {rfim(2), dilute()}) {
        QKernelContext ctx(model, Box::from_extents({3, 3}));
        const auto alpha = NormalizingMeasure::product();
        const auto t = free_energy_potential(ctx, alpha, ctx.box().sites());
        const Window& w = t.window();
        const auto joint = oracle::enumerate_joint(ctx);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<Site> pick{w.site(rng() % 9)};
            if (trial % 2) pick.push_back(w.site(rng() % 9));
            const SiteSet lam{pick};
            JointState xi{random_vec(rng, 9, 2), random_vec(rng, 9, 2)};
            const auto direct = oracle::condition(joint, ctx.indices(lam), lam, xi);
            wrec = std::max(wrec, direct.max_abs_diff(reconstruct_conditional(ctx, t, lam, w.sites(), xi)));
        }
        for (int trial = 0; trial < 12; ++trial) {
            const auto eta = random_vec(rng, 9, 2);
            const std::uint64_t lm = 1 + rng() % w.full_mask();
            for (std::uint64_t dm = 0; dm <= w.full_mask(); ++dm) {
                if ((lm & ~dm) != 0) continue;
                const double a = partial_sum(t, lm, dm, eta);
                const double b = partial_sum_direct(ctx, w.set_of(lm), w.set_of(dm), eta, alpha);
                wps = std::max(wps, std::abs(a - b));
                ++deltas;
            }
        }
    }
    return {wrec <= 1e-9 && wps <= 1e-9,
            "reconstruction=" + fmt(wrec) + " partial_sum=" + fmt(wps) + " deltas=" + std::to_string(deltas)};
}

double brute_log_z0(double J, const SiteSet& c) {
    double z = 0.0;
    for (std::size_t s = 0; s < (std::size_t{1} << c.size()); ++s) {
        double e = 0.0;
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = a + 1; b < c.size(); ++b)
                if (l1_distance(c[a], c[b]) == 1) e -= J * (2.0 * (s >> a & 1) - 1) * (2.0 * (s >> b & 1) - 1);
        z += std::exp(-e);
    }
    return std::log(z);
}

// vacuum potential coefficients c_A (all-occupied entry) on the box sites
PotentialTable vacuum_table(double J, const std::vector<int>& ext) {
    QKernelContext ctx(share(make_dilute(J, 0.5, 2)), Box::from_extents(ext), BoundaryCondition::free_bc());
    return free_energy_potential(ctx, NormalizingMeasure::point_mass(std::vector<int>(ctx.size(), 0)),
                                 ctx.box().sites());
}

// 7: dilute closed forms
Verdict dilute_closed_forms() {
    double wc = 0.0, wt = 0.0, ws = 0.0;
    for (double J : {0.3, 0.8, 1.5}) {
        const auto t = vacuum_table(J, {1, 2});
        const double want_pair = brute_log_z0(J, Box::from_extents({1, 2}).sites()) - 2 * std::log(2.0);
        wc = std::max(wc, std::abs(t.find(0b01)->values.back()));
        wc = std::max(wc, std::abs(t.find(0b11)->values.back() - want_pair));
        wc = std::max(wc, std::abs(t.find(0b11)->values.back() - std::log(std::cosh(J))));
        wc = std::max(wc, std::abs(dilute_vacuum_coeff(J, Box::from_extents({1, 2}).sites()) - want_pair));
        for (const auto& ext : {std::vector<int>{1, 2}, {1, 3}, {2, 2}, {2, 3}}) {
            const auto tb = vacuum_table(J, ext);
            double s = 0.0;
            for (const auto& [m, e] : tb.entries()) s += e.values.back();
            const SiteSet all = Box::from_extents(ext).sites();
            wt = std::max(wt, std::abs(s - (brute_log_z0(J, all) - all.size() * std::log(2.0))));
        }
    }
    // support: exhaustive on 1x6
    const auto t = vacuum_table(0.8, {1, 6});
    for (const auto& [m, e] : t.entries()) {
        const SiteSet a = t.window().set_of(m);
        for (std::size_t code = 0; code < e.values.size(); ++code) {
            const bool allowed = code + 1 == e.values.size() && is_connected(a);
            if (!allowed) ws = std::max(ws, std::abs(e.values[code]));
        }
    }
    return {wc <= 1e-12 && wt <= 1e-10 && ws <= 1e-12,
            "coefficients=" + fmt(wc) + " telescoping=" + fmt(wt) + " off_support=" + fmt(ws)};
}

// 8: cluster potential reproduces the conditional
Verdict cluster_potential_check() {
    const double J = 0.9;
    QKernelContext ctx(share(make_dilute(J, 0.55, 2)), Box::from_extents({3, 3}), BoundaryCondition::free_bc());
    const auto table = cluster_potential(J, ctx.box());
    const auto joint = oracle::enumerate_joint(ctx);
    std::mt19937_64 rng(kSeed + 8);
    double worst = 0.0;
    const SiteSet all = ctx.box().sites();
    int n = 0;
    for (std::size_t a = 0; a < 9; ++a)
        for (std::size_t b = a; b < 9; ++b)
            for (int k = 0; k < 40; ++k, ++n) {
                const SiteSet lam = a == b ? SiteSet{all[a]} : SiteSet{all[a], all[b]};
                JointState xi{random_vec(rng, 9, 2), random_vec(rng, 9, 2)};
                const auto direct = oracle::condition(joint, ctx.indices(lam), lam, xi);
                worst = std::max(worst, direct.max_abs_diff(reconstruct_conditional(ctx, table, lam, all, xi)));
            }
    return {worst <= 1e-9, "max_dev=" + fmt(worst) + " conditionings=" + std::to_string(n) +
                               " entries=" + std::to_string(table.entries().size())};
}

// 9: RFIM magnetisation monotone in fields and boundary spins
Verdict rfim_monotonicity() {
    double worst = 0.0;
    std::size_t pairs = 0;
    const std::vector<BoundaryCondition> bcs{BoundaryCondition::uniform(0), BoundaryCondition::free_bc(),
                                             BoundaryCondition::uniform(1)};
    for (const auto& ext : {std::vector<int>{1, 4}, std::vector<int>{2, 3}}) {
        for (const auto& [J, h] : {std::pair{0.7, 0.9}, std::pair{0.3, 1.5}}) {
            auto model = rfim(2, J, h);
            const Box box = Box::from_extents(ext);
            const std::size_t n = box.size();
            const std::size_t P = std::size_t{1} << n;
            // m[bc][pattern][site]
            std::vector<std::vector<std::vector<double>>> m(3, std::vector<std::vector<double>>(P));
            for (std::size_t b = 0; b < 3; ++b)
                for (std::size_t p = 0; p < P; ++p) {
                    std::vector<int> eta(n);
                    for (std::size_t i = 0; i < n; ++i) eta[i] = static_cast<int>(p >> i & 1);
                    const auto ens = QuenchedEnsemble::make(model, box, bcs[b], eta);
                    for (std::size_t i = 0; i < n; ++i) m[b][p].push_back(magnetization(ens, box.site_at(i)));
                }
            for (std::size_t b1 = 0; b1 < 3; ++b1)
                for (std::size_t b2 = b1; b2 < 3; ++b2)
                    for (std::size_t p1 = 0; p1 < P; ++p1)
                        for (std::size_t p2 = 0; p2 < P; ++p2) {
                            if ((p1 & ~p2) != 0) continue;
                            ++pairs;
                            for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, m[b1][p1][i] - m[b2][p2][i]);
                        }
        }
    }
    return {worst <= 1e-12, "max_decrease=" + fmt(worst) + " ordered_pairs=" + std::to_string(pairs)};
}

// 10: decay of the disorder correlation in a random-bond chain
Verdict decay_study() {
    const auto t0 = std::chrono::steady_clock::now();
    auto model = share(make_random_bond({{{-0.2, 0.2}, {0.5, 0.5}}}));
    std::ostringstream d;
    bool any = false;
    for (const auto& [bcname, bc] : std::vector<std::pair<std::string, BoundaryCondition>>{
             {"free", BoundaryCondition::free_bc()}, {"plus", BoundaryCondition::uniform(1)}}) {
        QKernelContext ctx(model, Box::from_extents({12}), bc);
        CbarOptions o;
        o.samples = 10000;
        o.seed = kSeed;
        o.keep_series = true;
        std::vector<CorrelationEstimate> est;
        for (int m = 1; m <= 4; ++m) est.push_back(cbar(ctx, m, o));
        bool decreasing = true;
        d << bcname << ": cbar=";
        for (std::size_t k = 0; k < est.size(); ++k) {
            d << fmt(est[k].cbar) << "+-" << fmt(est[k].stderr_) << (k + 1 < est.size() ? "," : " ");
            if (k == 0) continue;
            // paired difference over the shared disorder samples
            std::vector<double> diff(est[k].series.size());
            for (std::size_t s = 0; s < diff.size(); ++s) diff[s] = est[k - 1].series[s] - est[k].series[s];
            const auto de = batch_means(diff, 20);
            if (!(de.mean > 2 * de.stderr_)) decreasing = false;
        }
        std::vector<double> xs, ys;
        bool positive = true;
        for (const auto& e : est) {
            xs.push_back(e.m);
            if (!(e.cbar > 0)) positive = false;
            ys.push_back(std::log(std::max(e.cbar, 1e-300)));
        }
        const auto fit = linear_fit(xs, ys);
        const bool slope_ok = positive && fit.valid && fit.ci95_high < 0.0;
        d << "slope=" << fmt(fit.slope) << " ci95=[" << fmt(fit.ci95_low) << "," << fmt(fit.ci95_high) << "] "
          << (decreasing ? "decreasing" : "not_decreasing") << " ";
        any = any || (decreasing && slope_ok);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d << "runtime=" << fmt(secs) << "s";
    return {any && secs <= 600.0, d.str()};
}

// 11: epsilon diagnostic non-increasing in r
Verdict epsilon_check() {
    QKernelContext ctx(rfim(1, 0.3, 0.5), Box::from_extents({10}));
    EpsilonOptions o;
    o.samples = 10000;
    o.seed = kSeed;
    const auto diag = epsilon_diagnostic(ctx, Site{5}, {1, 2, 3, 4}, o);
    bool ok = true;
    std::ostringstream d;
    d << "eps=";
    for (std::size_t k = 0; k < diag.rows.size(); ++k) {
        const auto& r = diag.rows[k];
        d << fmt(r.epsilon) << "+-" << fmt(r.stderr_) << " ";
        if (r.flagged) ok = false;
        if (k > 0 && r.diff_prev > 2 * r.diff_prev_stderr) ok = false;
    }
    return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int which = 0;
    app.add_option("--criterion", which, "criterion number (0 = all)")->check(CLI::Range(0, 11));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> all{
        {"q-kernel identities", [] { return qkernel_identities(false); }},
        {"dual-path q-kernel", [] { return qkernel_identities(true); }},
        {"conditional oracle", conditional_oracle},
        {"moebius roundtrip and alpha-normalisation", roundtrip_normalization},
        {"martingale identity", martingale},
        {"partial sums and reconstruction", partial_sums},
        {"dilute closed forms", dilute_closed_forms},
        {"cluster potential", cluster_potential_check},
        {"rfim monotonicity", rfim_monotonicity},
        {"decay study", decay_study},
        {"epsilon diagnostic", epsilon_check},
    };
    bool ok = true;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (which != 0 && static_cast<std::size_t>(which) != i + 1) continue;
        Verdict v;
        try {
            v = all[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << all[i].first << "): " << v.detail
                  << std::endl;
        ok = ok && v.pass;
    }
    return ok ? 0 : 1;
}
