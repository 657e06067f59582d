#include "wg/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wg/error.hpp"

namespace wg {

DisorderSampler::DisorderSampler(std::vector<std::vector<double>> site_weights, std::uint64_t seed)
    : seed_(seed) {
    for (auto& w : site_weights) {
        if (w.empty()) throw DomainError("sampler: empty weight vector");
        std::vector<double> c(w.size());
        double s = 0.0;
        for (std::size_t v = 0; v < w.size(); ++v) {
            if (w[v] < 0.0) throw DomainError("sampler: negative weight");
            s += w[v];
            c[v] = s;
        }
        if (!(s > 0.0)) throw DomainError("sampler: weights sum to zero");
        for (double& x : c) x /= s;
        c.back() = 1.0;
        cdf_.push_back(std::move(c));
    }
}

DisorderSampler::DisorderSampler(const ModelSpec& spec, std::size_t sites, std::uint64_t seed)
    : DisorderSampler(std::vector<std::vector<double>>(sites, spec.nu()), seed) {}

void DisorderSampler::sample_into(std::uint64_t index, std::span<int> out) const {
    if (out.size() != cdf_.size()) throw DomainError("sampler: output has wrong length");
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 rng(seq);
    for (std::size_t i = 0; i < cdf_.size(); ++i) {
        // 53-bit uniform in [0,1), portable across standard libraries
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto& c = cdf_[i];
        out[i] = static_cast<int>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
        if (out[i] >= static_cast<int>(c.size())) out[i] = static_cast<int>(c.size()) - 1;
    }
}

DisorderConfig DisorderSampler::sample(std::uint64_t index) const {
    DisorderConfig out(cdf_.size());
    sample_into(index, out);
    return out;
}

namespace {

struct PairSpec {
    SiteSet pair;
    std::vector<int> e1, e2;
};

PairSpec pair_spec(const QKernelContext& ctx, const Site& x, const Site& y, int ex, int ey,
                   std::span<const int> eta) {
    if (x == y) throw DomainError("c_xy needs two distinct sites");
    const std::size_t ix = ctx.layout().box_index(x), iy = ctx.layout().box_index(y);
    PairSpec p{SiteSet{x, y}, {}, {}};
    if (x < y) {
        p.e1 = {ex, ey};
        p.e2 = {eta[ix], eta[iy]};
    } else {
        p.e1 = {ey, ex};
        p.e2 = {eta[iy], eta[ix]};
    }
    return p;
}

void check_values(const QKernelContext& ctx, int ex, int ey, std::span<const int> eta) {
    if (eta.size() != ctx.size()) throw DomainError("disorder configuration must cover the box");
    if (ex < 0 || ey < 0 || ex >= ctx.radix() || ey >= ctx.radix())
        throw DomainError("disorder value out of range");
}

}  // namespace

double c_xy(const QKernelContext& ctx, const Site& x, const Site& y, int eta_x, int eta_y,
            std::span<const int> eta_tilde) {
    check_values(ctx, eta_x, eta_y, eta_tilde);
    const std::size_t ix = ctx.layout().box_index(x), iy = ctx.layout().box_index(y);
    const PairSpec p = pair_spec(ctx, x, y, eta_x, eta_y, eta_tilde);
    const int ax[1] = {eta_x}, ay[1] = {eta_y};
    const int tx[1] = {eta_tilde[ix]}, ty[1] = {eta_tilde[iy]};
    DeltaH dx(ctx.layout(), SiteSet{x}, ax, tx, eta_tilde);
    DeltaH dy(ctx.layout(), SiteSet{y}, ay, ty, eta_tilde);
    DeltaH dxy(ctx.layout(), p.pair, p.e1, p.e2, eta_tilde);
    QuenchedEnsemble ens = ctx.ensemble(DisorderConfig(eta_tilde.begin(), eta_tilde.end()));
    const auto e = expectations(ens, {[&](std::span<const int> s) { return std::exp(-dxy(s)); },
                                      [&](std::span<const int> s) { return std::exp(-dx(s)); },
                                      [&](std::span<const int> s) { return std::exp(-dy(s)); }});
    return e[0] - e[1] * e[2];
}

double c_xy_ratio(const QKernelContext& ctx, const Site& x, const Site& y, int eta_x, int eta_y,
                  std::span<const int> eta_tilde) {
    check_values(ctx, eta_x, eta_y, eta_tilde);
    const std::size_t ix = ctx.layout().box_index(x), iy = ctx.layout().box_index(y);
    if (ix == iy) throw DomainError("c_xy needs two distinct sites");
    std::vector<int> e(eta_tilde.begin(), eta_tilde.end());
    const double l0 = ctx.log_partition(e);
    e[ix] = eta_x;
    const double lx = ctx.log_partition(e);
    e[iy] = eta_y;
    const double lxy = ctx.log_partition(e);
    e[ix] = eta_tilde[ix];
    const double ly = ctx.log_partition(e);
    return std::exp(lxy - l0) - std::exp(lx + ly - 2.0 * l0);
}

CorrelationEstimate cbar(const QKernelContext& ctx, int m, const CbarOptions& opt) {
    const Box& box = ctx.box();
    if (m < 1) throw DomainError("cbar: separation must be at least 1");
    if (opt.axis < 0 || opt.axis >= box.dim()) throw DomainError("cbar: axis out of range");
    if (m >= box.extent(opt.axis)) throw DomainError("cbar: separation does not fit in the box");
    Site x = box.lower();
    for (int a = 0; a < box.dim(); ++a) x[a] += (box.extent(a) - 1) / 2;
    x[opt.axis] = box.lower()[opt.axis] + (box.extent(opt.axis) - 1 - m) / 2;
    Site y = x;
    y[opt.axis] += m;

    const int R = ctx.radix();
    const std::size_t ix = box.index_of(x), iy = box.index_of(y);
    DisorderSampler sampler(ctx.spec(), ctx.size(), opt.seed);
    const std::size_t nv = static_cast<std::size_t>(R * R);
    std::vector<std::vector<double>> absv(nv, std::vector<double>(opt.samples));
    std::vector<std::vector<double>> sgnv = absv;

    std::vector<int> e(ctx.size());
    std::vector<double> lx(R), ly(R);
    for (std::size_t s = 0; s < opt.samples; ++s) {
        sampler.sample_into(s, e);
        const int ox = e[ix], oy = e[iy];
        const double l0 = ctx.log_partition(e);
        for (int a = 0; a < R; ++a) {
            e[ix] = a;
            lx[a] = ctx.log_partition(e) - l0;
        }
        e[ix] = ox;
        for (int b = 0; b < R; ++b) {
            e[iy] = b;
            ly[b] = ctx.log_partition(e) - l0;
        }
        for (int a = 0; a < R; ++a)
            for (int b = 0; b < R; ++b) {
                e[ix] = a;
                e[iy] = b;
                const double c = std::exp(ctx.log_partition(e) - l0) - std::exp(lx[a] + ly[b]);
                absv[a * R + b][s] = std::abs(c);
                sgnv[a * R + b][s] = c;
            }
        e[ix] = ox;
        e[iy] = oy;
    }

    CorrelationEstimate out;
    out.m = m;
    out.x = x;
    out.y = y;
    out.samples = opt.samples;
    out.flagged = opt.samples < 2 * opt.batches;
    std::size_t best = 0;
    for (std::size_t v = 0; v < nv; ++v) {
        CorrelationValue cv{static_cast<int>(v) / R, static_cast<int>(v) % R,
                            batch_means(absv[v], opt.batches), batch_means(sgnv[v], opt.batches)};
        out.by_value.push_back(cv);
    }
    for (std::size_t v = 1; v < nv; ++v)
        if (out.by_value[v].abs.mean > out.by_value[best].abs.mean) best = v;
    out.cbar = out.by_value[best].abs.mean;
    out.stderr_ = out.by_value[best].abs.stderr_;
    if (opt.keep_series) out.series = absv[best];
    return out;
}

AprioriConstants apriori_constants(const ModelSpec& spec) {
    AprioriConstants c;
    c.delta_h_bound = apriori_delta_h_bound(spec);
    const int d = spec.dim();
    c.c1 = std::pow(3.0, d) * c.delta_h_bound;
    c.c2 = 2.0 * d * std::pow(3.0, 2 * d - 1) * std::exp(2.0 * c.delta_h_bound);
    return c;
}

SiteSet half_ball(int d, int m) {
    const Site o = Site::origin(d);
    std::vector<Site> v;
    for (const Site& z : Box::centered(o, m).sites())
        if (!(z < o)) v.push_back(z);
    return SiteSet(v);
}

DecayBudget decay_budget(const std::vector<std::pair<int, double>>& table, const SetWeight& w, int d,
                         double c1, double c2) {
    DecayBudget b;
    b.c1 = c1;
    b.c2 = c2;
    std::vector<double> terms;
    for (const auto& [m, cb] : table) {
        if (m < 1) throw DomainError("decay budget: separations start at 1");
        const double wb = w ? w(half_ball(d, m)) : 1.0;
        if (wb < 0.0) throw DomainError("decay budget: weights must be nonnegative");
        const double t = c2 * std::pow(static_cast<double>(m), 2 * d - 1) * wb * cb;
        terms.push_back(t);
    }
    b.terms = terms;
    b.total = c1 + pairwise_sum(terms);
    b.last_term = terms.empty() ? 0.0 : terms.back();
    return b;
}

double energy_energy_correlation(const QKernelContext& ctx, const Bond& b1, const Bond& b2,
                                 std::span<const int> eta) {
    const Box& box = ctx.box();
    const Site x2 = b1.x + Site::unit(box.dim(), b1.axis);
    const Site y2 = b2.x + Site::unit(box.dim(), b2.axis);
    const SiteSet s1{b1.x, x2}, s2{b2.x, y2};
    if (s1.intersects(s2)) throw DomainError("energy-energy correlation needs disjoint bonds");
    for (const Site& s : {b1.x, x2, b2.x, y2})
        if (!box.contains(s)) throw DomainError("bond site " + s.str() + " outside the box");
    const ModelSpec& spec = ctx.spec();
    if (!spec.is_ising()) throw DomainError("energy-energy correlation needs Ising spins");
    const std::size_t i1 = box.index_of(b1.x), i2 = box.index_of(x2), j1 = box.index_of(b2.x),
                      j2 = box.index_of(y2);
    const auto& sv = spec.spin_values();
    QuenchedEnsemble ens = ctx.ensemble(DisorderConfig(eta.begin(), eta.end()));
    const auto e = expectations(
        ens, {[&](std::span<const int> s) {
                  return static_cast<double>(sv[s[i1]] * sv[s[i2]] * sv[s[j1]] * sv[s[j2]]);
              },
              [&](std::span<const int> s) { return static_cast<double>(sv[s[i1]] * sv[s[i2]]); },
              [&](std::span<const int> s) { return static_cast<double>(sv[s[j1]] * sv[s[j2]]); }});
    return e[0] - e[1] * e[2];
}

nlohmann::json to_json(const CorrelationEstimate& c) {
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& v : c.by_value)
        vals.push_back({{"eta_x", v.eta_x},
                        {"eta_y", v.eta_y},
                        {"mean_abs", v.abs.mean},
                        {"stderr_abs", v.abs.stderr_},
                        {"mean_signed", v.signed_.mean},
                        {"stderr_signed", v.signed_.stderr_}});
    return {{"m", c.m},           {"x", c.x.coords()},   {"y", c.y.coords()},
            {"cbar", c.cbar},     {"stderr", c.stderr_}, {"samples", c.samples},
            {"flagged", c.flagged}, {"by_value", vals}};
}

}  // namespace wg
