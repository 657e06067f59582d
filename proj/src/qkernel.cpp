#include "wg/qkernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wg/error.hpp"

namespace wg {

QKernelContext::QKernelContext(ModelPtr spec, Box box, BoundaryCondition bc, QuenchedOptions opt)
    : layout_(std::make_shared<const Layout>(std::move(spec), std::move(box), std::move(bc))),
      opt_(opt) {}

QKernelContext::QKernelContext(ModelPtr spec, Box box, QuenchedOptions opt)
    : QKernelContext(spec, std::move(box), default_boundary(*spec), opt) {}

double QKernelContext::table_bits() const {
    return static_cast<double>(size()) * std::log2(static_cast<double>(radix()));
}

std::uint64_t QKernelContext::code(std::span<const int> eta) const {
    if (eta.size() != size()) throw DomainError("disorder configuration must cover the box");
    if (table_bits() > 63.0) throw CapExceeded("disorder code", size(), 63);
    const auto r = static_cast<std::uint64_t>(radix());
    std::uint64_t c = 0;
    for (std::size_t i = eta.size(); i-- > 0;) {
        if (eta[i] < 0 || eta[i] >= radix()) throw DomainError("disorder index out of range");
        c = c * r + static_cast<std::uint64_t>(eta[i]);
    }
    return c;
}

void QKernelContext::decode(std::uint64_t c, std::span<int> eta) const {
    const auto r = static_cast<std::uint64_t>(radix());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        eta[i] = static_cast<int>(c % r);
        c /= r;
    }
}

const std::vector<double>& QKernelContext::log_partition_table() const {
    if (!has_dense_table())
        throw CapExceeded("dense log Z table (bits)", static_cast<std::size_t>(std::ceil(table_bits())),
                          dense_table_bits);
    std::call_once(table_once_, [this] {
        std::uint64_t total = 1;
        for (std::size_t i = 0; i < size(); ++i) total *= static_cast<std::uint64_t>(radix());
        std::vector<double> t(total);
        std::vector<int> eta(size());
        for (std::uint64_t c = 0; c < total; ++c) {
            decode(c, eta);
            t[c] = wg::log_partition(bind_energy(*layout_, eta), box(), opt_);
        }
        table_ = std::move(t);
    });
    return table_;
}

double QKernelContext::log_partition_code(std::uint64_t c) const {
    if (has_dense_table()) return log_partition_table()[c];
    {
        std::lock_guard<std::mutex> g(cache_mu_);
        auto it = cache_.find(c);
        if (it != cache_.end()) return it->second;
    }
    std::vector<int> eta(size());
    decode(c, eta);
    const double v = wg::log_partition(bind_energy(*layout_, eta), box(), opt_);
    std::lock_guard<std::mutex> g(cache_mu_);
    cache_.emplace(c, v);
    return v;
}

double QKernelContext::log_partition(std::span<const int> eta) const {
    return log_partition_code(code(eta));
}

QuenchedEnsemble QKernelContext::ensemble(DisorderConfig eta) const {
    return QuenchedEnsemble(layout_, std::move(eta), opt_);
}

namespace {

std::vector<int> splice(const QKernelContext& ctx, const SiteSet& lambda, std::span<const int> vals,
                        std::span<const int> rest) {
    if (vals.size() != lambda.size()) throw DomainError("disorder on Lambda has wrong length");
    if (rest.size() != ctx.size()) throw DomainError("disorder configuration must cover the box");
    std::vector<int> out(rest.begin(), rest.end());
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        if (!ctx.box().contains(lambda[k]))
            throw DomainError("site " + lambda[k].str() + " outside " + ctx.box().str());
        out[ctx.box().index_of(lambda[k])] = vals[k];
    }
    return out;
}

}  // namespace

double log_q(const QKernelContext& ctx, const SiteSet& lambda, std::span<const int> eta1,
             std::span<const int> eta2, std::span<const int> eta_rest) {
    const auto a = splice(ctx, lambda, eta1, eta_rest);
    const auto b = splice(ctx, lambda, eta2, eta_rest);
    return ctx.log_partition(a) - ctx.log_partition(b);
}

// ---- Delta H ----

DeltaH::DeltaH(const Layout& layout, const SiteSet& v, std::span<const int> eta1,
               std::span<const int> eta2, std::span<const int> eta_rest)
    : layout_(&layout) {
    const auto idx = layout.box_indices(v);
    instances_ = layout.instances_meeting(idx);
    std::vector<int> e1(eta_rest.begin(), eta_rest.end()), e2 = e1;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        e1[idx[k]] = eta1[k];
        e2[idx[k]] = eta2[k];
    }
    eta1_full_ = layout.full_disorder(e1);
    eta2_full_ = layout.full_disorder(e2);
    spins_ = layout.full_spins(std::vector<int>(layout.box_size(), 0));
}

double DeltaH::operator()(std::span<const int> box_spins) const {
    std::copy(box_spins.begin(), box_spins.end(), spins_.begin());
    double d = 0.0;
    for (int t : instances_) {
        const TermInstance& ti = layout_->instances()[t];
        d += layout_->instance_energy(ti, spins_, eta1_full_) -
             layout_->instance_energy(ti, spins_, eta2_full_);
    }
    return d;
}

void DeltaH::tilt(EnergyModel& m) const {
    const std::size_t nb = layout_->box_size();
    const int radix = layout_->spec().spin_radix();
    std::vector<int> spins = layout_->full_spins(std::vector<int>(nb, 0));
    for (int t : instances_) {
        const TermInstance& ti = layout_->instances()[t];
        std::vector<int> vars;
        for (int s : ti.sites)
            if (static_cast<std::size_t>(s) < nb) vars.push_back(s);
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        std::size_t size = 1;
        for (std::size_t k = 0; k < vars.size(); ++k) size *= static_cast<std::size_t>(radix);
        std::vector<double> table(size);
        for (std::size_t c = 0; c < size; ++c) {
            std::size_t r = c;
            for (int v : vars) {
                spins[v] = static_cast<int>(r % radix);
                r /= radix;
            }
            table[c] = layout_->instance_energy(ti, spins, eta1_full_) -
                       layout_->instance_energy(ti, spins, eta2_full_);
        }
        m.accumulate(std::move(vars), std::move(table));
    }
}

double log_q_via_expectation(const QKernelContext& ctx, const SiteSet& lambda,
                             std::span<const int> eta1, std::span<const int> eta2,
                             std::span<const int> eta_rest) {
    const auto base = splice(ctx, lambda, eta2, eta_rest);
    DeltaH dh(ctx.layout(), lambda, eta1, eta2, base);
    EnergyModel m2 = bind_energy(ctx.layout(), base);
    if (ctx.size() <= 16 && ctx.spec().spin_radix() == 2) {
        // mu[eta2](e^{-dH}) literally: sum_sigma e^{-E2} e^{-dH} / sum_sigma e^{-E2}
        LogSumExp num, den;
        for_each_configuration(m2, [&](std::span<const int> s, double e) {
            den.add(-e);
            num.add(-e - dh(s));
        });
        return num.value() - den.value();
    }
    const double lz2 = log_partition(m2, ctx.box(), ctx.options());
    dh.tilt(m2);
    return log_partition(m2, ctx.box(), ctx.options()) - lz2;
}

double apriori_delta_h_bound(const ModelSpec& spec) {
    const int sr = spec.spin_radix(), dr = spec.disorder_radix();
    double total = 0.0;
    for (const TermShape& sh : spec.shapes()) {
        const std::size_t k = sh.offsets.size();
        std::size_t sc = 1, dc = 1;
        for (std::size_t i = 0; i < k; ++i) {
            sc *= static_cast<std::size_t>(sr);
            dc *= static_cast<std::size_t>(dr);
        }
        std::vector<int> s(k), d(k), d2(k);
        for (std::size_t pos = 0; pos < k; ++pos) {
            if (!sh.uses_disorder[pos]) continue;
            double worst = 0.0;
            for (std::size_t a = 0; a < sc; ++a) {
                std::size_t r = a;
                for (std::size_t i = 0; i < k; ++i, r /= sr) s[i] = static_cast<int>(r % sr);
                for (std::size_t b = 0; b < dc; ++b) {
                    std::size_t q = b;
                    for (std::size_t i = 0; i < k; ++i, q /= dr) d[i] = static_cast<int>(q % dr);
                    const double e = sh.energy(s, d);
                    d2 = d;
                    for (int v = 0; v < dr; ++v) {
                        d2[pos] = v;
                        worst = std::max(worst, std::abs(e - sh.energy(s, d2)));
                    }
                }
            }
            total += worst;
        }
    }
    return total;
}

// ---- property checks ----

nlohmann::json PropertyResult::to_json() const {
    nlohmann::json j{{"property", property},
                     {"trials", trials},
                     {"max_abs_violation", max_abs_violation},
                     {"tolerance", tolerance},
                     {"passed", passed()}};
    if (!witness.is_null()) j["witness"] = witness;
    return j;
}

namespace {

nlohmann::json sites_json(const SiteSet& s) {
    nlohmann::json a = nlohmann::json::array();
    for (const Site& x : s) a.push_back(x.coords());
    return a;
}

void record(PropertyResult& r, double v, const std::function<nlohmann::json()>& witness) {
    v = std::abs(v);
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    if (v > r.max_abs_violation) {
        r.max_abs_violation = v;
        if (v > r.tolerance) r.witness = witness();
    }
}

}  // namespace

std::vector<PropertyResult> check_q_properties(const QKernelContext& ctx, const QCheckOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    const Box& box = ctx.box();
    const int d = box.dim();
    const int R = ctx.radix();
    auto rand_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    PropertyResult anti{"antisymmetry", 0, 0.0, opt.tolerance, {}};
    PropertyResult restr{"restriction", 0, 0.0, opt.tolerance, {}};
    PropertyResult cocy{"cocycle", 0, 0.0, opt.tolerance, {}};
    PropertyResult dual{"dual_path", 0, 0.0, opt.tolerance, {}};

    for (std::size_t t = 0; t < opt.trials; ++t) {
        std::vector<int> lo(d), hi(d);
        for (int a = 0; a < d; ++a) {
            const int ext = rand_int(1, std::min(opt.max_extent, box.extent(a)));
            lo[a] = rand_int(box.lower()[a], box.upper()[a] - ext + 1);
            hi[a] = lo[a] + ext - 1;
        }
        const SiteSet delta = Box(Site(lo), Site(hi)).sites();
        std::vector<Site> pick;
        while (pick.empty())
            for (const Site& s : delta)
                if (rng() & 1) pick.push_back(s);
        const SiteSet lambda(pick);

        std::vector<int> rest(ctx.size());
        for (int& e : rest) e = rand_int(0, R - 1);
        std::vector<int> e1(delta.size()), e2(delta.size());
        std::vector<int> l1, l2, l3;
        for (std::size_t k = 0; k < delta.size(); ++k) {
            e1[k] = rand_int(0, R - 1);
            e2[k] = lambda.contains(delta[k]) ? rand_int(0, R - 1) : e1[k];
            if (lambda.contains(delta[k])) {
                l1.push_back(e1[k]);
                l2.push_back(e2[k]);
                l3.push_back(rand_int(0, R - 1));
            }
        }
        // outside Lambda the restriction check uses eta1 on Delta \ Lambda
        std::vector<int> rest_d = rest;
        for (std::size_t k = 0; k < delta.size(); ++k) rest_d[box.index_of(delta[k])] = e1[k];

        auto witness = [&] {
            return nlohmann::json{{"trial", t},          {"delta", sites_json(delta)},
                                  {"lambda", sites_json(lambda)}, {"eta1_delta", e1},
                                  {"eta2_delta", e2},   {"eta3_lambda", l3},
                                  {"eta_rest", rest}};
        };

        const double q12 = log_q(ctx, lambda, l1, l2, rest_d);
        const double q21 = log_q(ctx, lambda, l2, l1, rest_d);
        record(anti, q12 + q21, witness);
        ++anti.trials;

        const double qd = log_q(ctx, delta, e1, e2, rest);
        record(restr, qd - q12, witness);
        ++restr.trials;

        const double q13 = log_q(ctx, lambda, l1, l3, rest_d);
        const double q23 = log_q(ctx, lambda, l2, l3, rest_d);
        record(cocy, q13 - q23 - q12, witness);
        ++cocy.trials;

        if (opt.dual_path) {
            record(dual, q12 - log_q_via_expectation(ctx, lambda, l1, l2, rest_d), witness);
            ++dual.trials;
        }
    }
    std::vector<PropertyResult> out{anti, restr, cocy};
    if (opt.dual_path) out.push_back(dual);
    return out;
}

// ---- joint conditional ----

std::size_t ConditionalTable::index(std::span<const int> sigma, std::span<const int> eta) const {
    std::size_t idx = 0;
    for (std::size_t k = lambda.size(); k-- > 0;)
        idx = idx * digit_radix() + static_cast<std::size_t>(sigma[k] * disorder_radix + eta[k]);
    return idx;
}

double ConditionalTable::max_abs_diff(const ConditionalTable& o) const {
    if (o.prob.size() != prob.size()) throw DomainError("conditional tables differ in shape");
    double m = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) m = std::max(m, std::abs(prob[i] - o.prob[i]));
    return m;
}

double annealed_energy(const QKernelContext& ctx, std::span<const std::size_t> lambda_idx,
                       std::span<const int> sigma, std::span<const int> eta) {
    const Layout& L = ctx.layout();
    const auto fs = L.full_spins(sigma);
    const auto fe = L.full_disorder(eta);
    double u = 0.0;
    for (int t : L.instances_meeting(lambda_idx)) u += L.instance_energy(L.instances()[t], fs, fe);
    const auto& nu = ctx.spec().nu();
    for (std::size_t i : lambda_idx) u -= std::log(nu[eta[i]]);
    return u;
}

ConditionalTable joint_conditional(const QKernelContext& ctx, const SiteSet& lambda,
                                   const JointState& xi, std::size_t max_sites) {
    if (lambda.size() > max_sites) throw CapExceeded("joint conditional sites", lambda.size(), max_sites);
    const Layout& L = ctx.layout();
    const auto idx = L.box_indices(lambda);
    const int S = ctx.spec().spin_radix(), R = ctx.radix();
    ConditionalTable tab{lambda, S, R, {}};
    std::size_t size = 1;
    for (std::size_t k = 0; k < idx.size(); ++k) size *= tab.digit_radix();
    tab.prob.assign(size, 0.0);

    std::vector<int> spins = L.full_spins(xi.sigma);
    std::vector<int> eta = L.full_disorder(xi.eta);
    std::vector<int> eta_box(xi.eta);
    const double lz_ref = ctx.log_partition(xi.eta);
    const auto inst = L.instances_meeting(idx);
    std::vector<double> lognu(R);
    for (int v = 0; v < R; ++v) lognu[v] = std::log(ctx.spec().nu()[v]);

    std::vector<double> logw(size);
    for (std::size_t c = 0; c < size; ++c) {
        std::size_t r = c;
        double u = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const int dgt = static_cast<int>(r % tab.digit_radix());
            r /= tab.digit_radix();
            spins[idx[k]] = dgt / R;
            eta[idx[k]] = eta_box[idx[k]] = dgt % R;
            u -= lognu[dgt % R];
        }
        for (int t : inst) u += L.instance_energy(L.instances()[t], spins, eta);
        // log Q_Lambda(eta~_Lambda, eta_Lambda | eta_rest)
        const double lq = ctx.log_partition(eta_box) - lz_ref;
        logw[c] = -u - lq;
    }
    LogSumExp z;
    for (double w : logw) z.add(w);
    const double lz = z.value();
    for (std::size_t c = 0; c < size; ++c) tab.prob[c] = std::exp(logw[c] - lz);
    return tab;
}

}  // namespace wg
