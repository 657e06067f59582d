#include "wg/potentials.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "wg/disorder.hpp"
#include "wg/error.hpp"
#include "wg/simd/kernels.hpp"

namespace wg {

namespace {

struct Support {
    std::vector<int> values;
    std::vector<double> weights;
};

Support support_of(const std::vector<double>& w) {
    Support s;
    for (std::size_t v = 0; v < w.size(); ++v)
        if (w[v] > 0.0) {
            s.values.push_back(static_cast<int>(v));
            s.weights.push_back(w[v]);
        }
    return s;
}

// Odometer over the product of supports at the given box indices; writes
// the values into eta and calls f(weight).
template <class F>
void for_each_weighted(const std::vector<std::size_t>& idx, const std::vector<Support>& sup,
                       std::vector<int>& eta, F&& f) {
    const std::size_t k = idx.size();
    std::vector<std::size_t> pos(k, 0);
    for (std::size_t j = 0; j < k; ++j) eta[idx[j]] = sup[j].values[0];
    while (true) {
        double w = 1.0;
        for (std::size_t j = 0; j < k; ++j) w *= sup[j].weights[pos[j]];
        f(w);
        std::size_t j = 0;
        for (; j < k; ++j) {
            if (++pos[j] < sup[j].values.size()) {
                eta[idx[j]] = sup[j].values[pos[j]];
                break;
            }
            pos[j] = 0;
            eta[idx[j]] = sup[j].values[0];
        }
        if (j == k) break;
    }
}

double support_count(const std::vector<Support>& sup) {
    double c = 1.0;
    for (const auto& s : sup) c *= static_cast<double>(s.values.size());
    return c;
}

std::vector<Support> supports(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                              const std::vector<std::size_t>& idx) {
    std::vector<Support> out;
    for (std::size_t i : idx) out.push_back(support_of(alpha.site_weights(i, ctx.spec())));
    return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& in) {
    std::vector<bool> mark(n, false);
    for (std::size_t i : in) mark[i] = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (!mark[i]) out.push_back(i);
    return out;
}

}  // namespace

Estimate relative_energy(const QKernelContext& ctx, const SiteSet& lambda,
                         std::span<const int> eta_lambda, const NormalizingMeasure& alpha,
                         const IntegrationOptions& opt) {
    if (eta_lambda.size() != lambda.size()) throw DomainError("disorder on Lambda has wrong length");
    if (lambda.empty()) return {};
    alpha.validate(ctx.size(), ctx.spec());
    const auto lidx = ctx.indices(lambda);
    const auto all = all_indices(ctx.size());
    const auto sup = supports(ctx, alpha, all);
    std::vector<int> eta(ctx.size()), mixed(ctx.size());

    if (support_count(sup) <= std::ldexp(1.0, static_cast<int>(opt.exact_bits))) {
        double acc = 0.0;
        for_each_weighted(all, sup, eta, [&](double w) {
            mixed = eta;
            for (std::size_t k = 0; k < lidx.size(); ++k) mixed[lidx[k]] = eta_lambda[k];
            acc += w * (ctx.log_partition(mixed) - ctx.log_partition(eta));
        });
        return {acc, 0.0, 0, true};
    }
    if (!opt.allow_mc)
        throw CapExceeded("exact alpha integration (points)",
                          static_cast<std::size_t>(std::min(support_count(sup), 1e18)),
                          std::size_t{1} << opt.exact_bits);
    std::vector<std::vector<double>> w;
    for (std::size_t i = 0; i < ctx.size(); ++i) w.push_back(alpha.site_weights(i, ctx.spec()));
    DisorderSampler sampler(std::move(w), opt.seed);
    std::vector<double> xs(opt.samples);
    for (std::size_t s = 0; s < opt.samples; ++s) {
        sampler.sample_into(s, eta);
        mixed = eta;
        for (std::size_t k = 0; k < lidx.size(); ++k) mixed[lidx[k]] = eta_lambda[k];
        xs[s] = ctx.log_partition(mixed) - ctx.log_partition(eta);
    }
    const MeanEstimate m = batch_means(xs);
    return {m.mean, m.stderr_, opt.samples, false};
}

PotentialTable free_energy_potential(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                                     const SiteSet& window) {
    alpha.validate(ctx.size(), ctx.spec());
    const auto widx = ctx.indices(window);
    const std::size_t N = ctx.size(), n = window.size();
    const int R = ctx.radix();
    if (n > 24) throw CapExceeded("potential window", n, 24);
    const double ext_size = std::pow(static_cast<double>(R + 1), static_cast<double>(n));
    if (ext_size > std::ldexp(1.0, 25))
        throw CapExceeded("extended tensor entries", static_cast<std::size_t>(ext_size), std::size_t{1} << 25);
    const simd::KernelTable& K = simd::kernels();

    std::vector<double> data = ctx.log_partition_table();
    std::vector<std::size_t> dims(N, static_cast<std::size_t>(R));
    std::vector<bool> in_window(N, false);
    for (std::size_t i : widx) in_window[i] = true;

    // integrate out box sites outside the window (highest axis first)
    for (std::size_t ax = N; ax-- > 0;) {
        if (in_window[ax]) continue;
        std::size_t inner = 1;
        for (std::size_t q = 0; q < ax; ++q) inner *= dims[q];
        const std::size_t slots = dims[ax], outer = data.size() / (inner * slots);
        const auto w = alpha.site_weights(ax, ctx.spec());
        K.axis_weighted_sum(data.data(), outer, slots, inner, w.data(), w.size(), 0);
        std::vector<double> next(outer * inner);
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(data.data() + o * slots * inner, inner, next.data() + o * inner);
        data.swap(next);
        dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(ax));
    }
    // window axes now in window order; add a star slot (index R) holding the alpha-average
    const std::size_t S = static_cast<std::size_t>(R) + 1;
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t inner = 1;
        for (std::size_t q = 0; q < p; ++q) inner *= S;
        const std::size_t outer = data.size() / (inner * dims[p]);
        std::vector<double> next(outer * S * inner, 0.0);
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(data.data() + o * dims[p] * inner, dims[p] * inner, next.data() + o * S * inner);
        const auto w = alpha.site_weights(widx[p], ctx.spec());
        K.axis_weighted_sum(next.data(), outer, S, inner, w.data(), w.size(), static_cast<std::size_t>(R));
        data.swap(next);
        dims[p] = S;
    }
    // Moebius over (eta value, star): slot v -= star slot, axis by axis
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t inner = 1;
        for (std::size_t q = 0; q < p; ++q) inner *= S;
        K.axis_subtract(data.data(), data.size() / (inner * S), S, inner, static_cast<std::size_t>(R));
    }

    PotentialTable table(Window(window), R, alpha.tag());
    for (const DisorderValue& v : ctx.spec().disorder_values()) table.scalar_values.push_back(v.scalar());
    table.nu = ctx.spec().nu();
    std::vector<std::size_t> pw(n + 1, 1);
    for (std::size_t p = 1; p <= n; ++p) pw[p] = pw[p - 1] * S;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 1; mask < total; ++mask) {
        const int k = std::popcount(mask);
        std::size_t base = 0;
        std::vector<std::size_t> bits;
        for (std::size_t p = 0; p < n; ++p) {
            if (mask >> p & 1)
                bits.push_back(p);
            else
                base += static_cast<std::size_t>(R) * pw[p];
        }
        std::size_t cnt = 1;
        for (int i = 0; i < k; ++i) cnt *= static_cast<std::size_t>(R);
        PotentialEntry e;
        e.values.resize(cnt);
        for (std::size_t c = 0; c < cnt; ++c) {
            std::size_t idx = base, r = c;
            for (std::size_t b : bits) {
                idx += (r % R) * pw[b];
                r /= R;
            }
            e.values[c] = data[idx];
        }
        table.set(mask, std::move(e));
    }
    return table;
}

PropertyResult check_alpha_normalization(const PotentialTable& table, const QKernelContext& ctx,
                                         const NormalizingMeasure& alpha, double tol) {
    PropertyResult res{"alpha_normalization", 0, 0.0, tol, {}};
    if (!table.local()) throw DomainError("normalisation check needs a local table");
    const auto widx = ctx.indices(table.window().sites());
    const std::size_t R = static_cast<std::size_t>(table.radix());
    for (const auto& [mask, e] : table.entries()) {
        const int k = std::popcount(mask);
        int digit = 0;
        for (std::uint64_t m = mask; m; m &= m - 1, ++digit) {
            const int j = std::countr_zero(m);
            const auto w = alpha.site_weights(widx[j], ctx.spec());
            std::size_t stride = 1;
            for (int q = 0; q < digit; ++q) stride *= R;
            for (std::size_t c = 0; c < e.values.size(); ++c) {
                if ((c / stride) % R != 0) continue;
                double s = 0.0;
                for (std::size_t v = 0; v < R; ++v) s += w[v] * e.values[c + v * stride];
                ++res.trials;
                if (std::abs(s) > res.max_abs_violation) {
                    res.max_abs_violation = std::abs(s);
                    if (res.max_abs_violation > tol) {
                        nlohmann::json sites = nlohmann::json::array();
                        for (const Site& z : table.window().set_of(mask)) sites.push_back(z.coords());
                        res.witness = {{"sites", sites}, {"site", table.window().site(j).coords()},
                                       {"code", c}, {"integral", s}, {"size", k}};
                    }
                }
            }
        }
    }
    return res;
}

PropertyResult check_mobius_roundtrip(const PotentialTable& table, const QKernelContext& ctx,
                                      const NormalizingMeasure& alpha, double tol) {
    PropertyResult res{"mobius_roundtrip", 0, 0.0, tol, {}};
    const std::size_t n = table.window().size();
    const int R = table.radix();
    std::vector<int> eta_w(n, 0);
    for (std::uint64_t L = 1; L < (std::uint64_t{1} << n); ++L) {
        const SiteSet ls = table.window().set_of(L);
        const int k = std::popcount(L);
        std::size_t cnt = 1;
        for (int i = 0; i < k; ++i) cnt *= static_cast<std::size_t>(R);
        std::vector<int> el(k);
        for (std::size_t c = 0; c < cnt; ++c) {
            std::size_t r = c;
            int q = 0;
            for (std::uint64_t m = L; m; m &= m - 1, ++q) {
                el[q] = static_cast<int>(r % R);
                eta_w[std::countr_zero(m)] = el[q];
                r /= R;
            }
            double sum = 0.0;
            for (std::uint64_t a = L; a; a = (a - 1) & L) sum += table.value(a, eta_w);
            const double direct = relative_energy(ctx, ls, el, alpha).value;
            ++res.trials;
            const double d = std::abs(sum - direct);
            if (d > res.max_abs_violation) {
                res.max_abs_violation = d;
                if (d > tol) {
                    nlohmann::json sites = nlohmann::json::array();
                    for (const Site& z : ls) sites.push_back(z.coords());
                    res.witness = {{"lambda", sites}, {"eta", el}, {"sum", sum}, {"direct", direct}};
                }
            }
        }
    }
    return res;
}

double check_martingale(const QKernelContext& ctx, const SiteSet& lambda, const SiteSet& delta,
                        std::span<const int> eta_lambda, const NormalizingMeasure& alpha) {
    if (!lambda.is_subset_of(delta)) throw DomainError("martingale check needs Lambda inside Delta");
    const double el = relative_energy(ctx, lambda, eta_lambda, alpha).value;
    const SiteSet rest = delta.minus(lambda);
    const auto ridx = ctx.indices(rest);
    const auto sup = supports(ctx, alpha, ridx);
    std::vector<int> eta(ctx.size(), 0);
    const auto lidx = ctx.indices(lambda);
    for (std::size_t k = 0; k < lidx.size(); ++k) eta[lidx[k]] = eta_lambda[k];
    const auto didx = ctx.indices(delta);
    std::vector<int> ed(delta.size());
    double acc = 0.0;
    for_each_weighted(ridx, sup, eta, [&](double w) {
        for (std::size_t k = 0; k < didx.size(); ++k) ed[k] = eta[didx[k]];
        acc += w * relative_energy(ctx, delta, ed, alpha).value;
    });
    return std::abs(acc - el);
}

double partial_sum(const PotentialTable& table, std::uint64_t lambda, std::uint64_t delta,
                   std::span<const int> eta_window) {
    double s = 0.0;
    for (std::uint64_t a = delta; a; a = (a - 1) & delta)
        if (a & lambda) s += table.value(a, eta_window);
    return s;
}

double partial_sum_direct(const QKernelContext& ctx, const SiteSet& lambda, const SiteSet& delta,
                          std::span<const int> eta_box, const NormalizingMeasure& alpha) {
    if (eta_box.size() != ctx.size()) throw DomainError("disorder configuration must cover the box");
    if (lambda.empty()) return 0.0;
    const auto lidx = ctx.indices(lambda);
    const auto free_idx = complement(ctx.size(), ctx.indices(delta.minus(lambda)));
    const auto sup = supports(ctx, alpha, free_idx);
    std::vector<int> eta(eta_box.begin(), eta_box.end()), num;
    double acc = 0.0;
    for_each_weighted(free_idx, sup, eta, [&](double w) {
        num = eta;
        for (std::size_t i : lidx) num[i] = eta_box[i];
        acc += w * (ctx.log_partition(num) - ctx.log_partition(eta));
    });
    return acc;
}

ConditionalTable reconstruct_conditional(const QKernelContext& ctx, const FreeEnergySum& fe,
                                         const SiteSet& lambda, const JointState& xi,
                                         std::size_t max_sites) {
    if (lambda.size() > max_sites) throw CapExceeded("conditional sites", lambda.size(), max_sites);
    const Layout& L = ctx.layout();
    const auto idx = L.box_indices(lambda);
    const int S = ctx.spec().spin_radix(), R = ctx.radix();
    ConditionalTable tab{lambda, S, R, {}};
    std::size_t size = 1;
    for (std::size_t k = 0; k < idx.size(); ++k) size *= tab.digit_radix();

    std::vector<int> spins = L.full_spins(xi.sigma);
    std::vector<int> eta = L.full_disorder(xi.eta);
    std::vector<int> eta_box(xi.eta);
    const auto inst = L.instances_meeting(idx);
    std::vector<double> logw(size);
    for (std::size_t c = 0; c < size; ++c) {
        std::size_t r = c;
        double u = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const int dgt = static_cast<int>(r % tab.digit_radix());
            r /= tab.digit_radix();
            spins[idx[k]] = dgt / R;
            eta[idx[k]] = eta_box[idx[k]] = dgt % R;
            u -= std::log(ctx.spec().nu()[dgt % R]);
        }
        for (int t : inst) u += L.instance_energy(L.instances()[t], spins, eta);
        logw[c] = -u - fe(eta_box);
    }
    LogSumExp z;
    for (double w : logw) z.add(w);
    tab.prob.resize(size);
    for (std::size_t c = 0; c < size; ++c) tab.prob[c] = std::exp(logw[c] - z.value());
    return tab;
}

ConditionalTable reconstruct_conditional(const QKernelContext& ctx, const PotentialTable& table,
                                         const SiteSet& lambda, const SiteSet& delta,
                                         const JointState& xi, std::size_t max_sites) {
    const Window& w = table.window();
    const std::uint64_t lm = w.mask_of(lambda), dm = w.mask_of(delta);
    if (!lambda.is_subset_of(delta)) throw DomainError("reconstruction needs Lambda inside Delta");
    const auto widx = ctx.indices(w.sites());
    std::vector<int> eta_w(w.size());
    FreeEnergySum fe = [&](std::span<const int> eta_box) {
        for (std::size_t i = 0; i < widx.size(); ++i) eta_w[i] = eta_box[widx[i]];
        return partial_sum(table, lm, dm, eta_w);
    };
    return reconstruct_conditional(ctx, fe, lambda, xi, max_sites);
}

std::vector<double> telescope_logq(const QKernelContext& ctx, const SiteSet& lambda,
                                   std::span<const int> eta_box, std::span<const int> hat_box,
                                   const SiteSet& delta) {
    if (!lambda.is_subset_of(delta)) throw DomainError("telescoping needs Lambda inside Delta");
    if (eta_box.size() != ctx.size() || hat_box.size() != ctx.size())
        throw DomainError("disorder configurations must cover the box");
    std::vector<int> rest(hat_box.begin(), hat_box.end());
    for (std::size_t i : ctx.indices(delta.minus(lambda))) rest[i] = eta_box[i];
    std::vector<double> terms;
    for (const Site& x : lambda) {
        const std::size_t i = ctx.box().index_of(x);
        const int a[1] = {eta_box[i]}, b[1] = {hat_box[i]};
        terms.push_back(log_q(ctx, SiteSet{x}, a, b, rest));
        rest[i] = eta_box[i];  // later sites see eta on the earlier ones
    }
    return terms;
}

ConvergenceDiagnostic epsilon_diagnostic(const QKernelContext& ctx, const Site& x,
                                         const std::vector<int>& radii, const EpsilonOptions& opt) {
    const std::size_t N = ctx.size();
    const std::size_t ix = ctx.layout().box_index(x);
    const int R = ctx.radix();
    const auto& nu = ctx.spec().nu();
    if (opt.eta_x >= R) throw DomainError("eta_x out of range");
    DisorderSampler sampler(ctx.spec(), N, opt.seed);

    // sites off x whose eta is replaced by eta~ at radius r
    std::vector<std::vector<std::size_t>> outside(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (radii[k] < 0) throw DomainError("radii must be nonnegative");
        for (std::size_t i = 0; i < N; ++i)
            if (i != ix && linf_distance(ctx.box().site_at(i), x) > radii[k]) outside[k].push_back(i);
    }

    std::vector<std::vector<double>> dev(radii.size(), std::vector<double>(opt.samples));
    std::vector<int> eta(N), work(N), inner(N);
    auto avg_x = [&](std::vector<int>& cfg) {
        // log Z(eta_x, cfg) - int nu(dv) log Z(v, cfg)
        const int keep = eta[ix];
        cfg[ix] = keep;
        double v = ctx.log_partition(cfg);
        for (int a = 0; a < R; ++a) {
            cfg[ix] = a;
            v -= nu[a] * ctx.log_partition(cfg);
        }
        cfg[ix] = keep;
        return v;
    };
    for (std::size_t s = 0; s < opt.samples; ++s) {
        sampler.sample_into(s, eta);
        if (opt.eta_x >= 0) eta[ix] = opt.eta_x;
        work = eta;
        const double f_full = avg_x(work);
        for (std::size_t k = 0; k < radii.size(); ++k) {
            const auto& out = outside[k];
            const double bits = static_cast<double>(out.size()) * std::log2(static_cast<double>(R));
            double f_r = 0.0;
            work = eta;
            if (bits <= static_cast<double>(opt.inner_exact_bits)) {
                std::vector<Support> sup(out.size(), support_of(nu));
                for_each_weighted(out, sup, work, [&](double w) { f_r += w * avg_x(work); });
            } else {
                std::vector<std::vector<double>> ws(N, nu);
                DisorderSampler in(std::move(ws), opt.seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)) ^ k);
                double acc = 0.0;
                for (std::size_t t = 0; t < opt.inner_samples; ++t) {
                    in.sample_into(t, inner);
                    for (std::size_t i : out) work[i] = inner[i];
                    acc += avg_x(work);
                }
                f_r = acc / static_cast<double>(opt.inner_samples);
            }
            dev[k][s] = std::abs(f_r - f_full);
        }
    }

    ConvergenceDiagnostic d;
    d.x = x;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const MeanEstimate m = batch_means(dev[k], opt.batches);
        EpsilonRow row;
        row.r = radii[k];
        row.epsilon = m.mean;
        row.stderr_ = m.stderr_;
        row.samples = opt.samples;
        row.flagged = opt.samples < 2 * opt.batches;
        if (k > 0) {
            std::vector<double> diff(opt.samples);
            for (std::size_t s = 0; s < opt.samples; ++s) diff[s] = dev[k][s] - dev[k - 1][s];
            const MeanEstimate md = batch_means(diff, opt.batches);
            row.diff_prev = md.mean;
            row.diff_prev_stderr = md.stderr_;
        }
        d.rows.push_back(row);
    }
    return d;
}

}  // namespace wg
