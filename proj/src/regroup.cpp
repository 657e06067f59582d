#include "wg/regroup.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "wg/disorder.hpp"
#include "wg/error.hpp"

namespace wg {

namespace {

constexpr std::size_t kCellCodeCap = std::size_t{1} << 22;

void check_window(const Window& w) {
    if (w.size() == 0) throw DomainError("regrouping needs a nonempty window");
    if (w.size() > 63) throw CapExceeded("regrouping window", w.size(), 63);
}

std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

// Odometer over the alpha support at every box site.
template <class F>
void for_each_alpha(const QKernelContext& ctx, const NormalizingMeasure& alpha, std::vector<int>& eta,
                    F&& f) {
    const std::size_t n = ctx.size();
    std::vector<std::vector<int>> vals(n);
    std::vector<std::vector<double>> ws(n);
    double points = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = alpha.site_weights(i, ctx.spec());
        for (std::size_t v = 0; v < w.size(); ++v)
            if (w[v] > 0.0) {
                vals[i].push_back(static_cast<int>(v));
                ws[i].push_back(w[v]);
            }
        points *= static_cast<double>(vals[i].size());
    }
    if (points > std::ldexp(1.0, 20))
        throw CapExceeded("exact alpha integration (points)", static_cast<std::size_t>(points),
                          std::size_t{1} << 20);
    std::vector<std::size_t> pos(n, 0);
    for (std::size_t i = 0; i < n; ++i) eta[i] = vals[i][0];
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) w *= ws[i][pos[i]];
        f(w);
        std::size_t i = 0;
        for (; i < n; ++i) {
            if (++pos[i] < vals[i].size()) {
                eta[i] = vals[i][pos[i]];
                break;
            }
            pos[i] = 0;
            eta[i] = vals[i][0];
        }
        if (i == n) break;
    }
}

double energy(const QKernelContext& ctx, const NormalizingMeasure& alpha, const SiteSet& a,
              std::span<const int> eta_box) {
    return partial_sum_direct(ctx, a, a, eta_box, alpha);
}

}  // namespace

RegroupingScheme RegroupingScheme::kozlov(Window window, SiteOrder order, std::vector<std::size_t> radii) {
    check_window(window);
    RegroupingScheme s;
    s.kind_ = Kind::kozlov;
    s.window_ = std::move(window);
    s.order_ = std::move(order);
    s.rank_ = s.order_.ranks(s.window_.sites());
    const std::size_t n = s.window_.size();
    std::vector<std::size_t> by_rank(n + 1);
    for (std::size_t i = 0; i < n; ++i) by_rank[s.rank_[i]] = i;
    auto r = [&](std::size_t k) {
        std::size_t v = radii.empty() ? k : radii[std::min(k, radii.size()) - 1];
        return std::min(v, n);
    };
    s.cells_.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        const std::size_t rx = s.rank_[x];
        std::uint64_t prev = 0;
        for (std::size_t m = 1;; ++m) {
            const std::size_t top = std::max(r(rx + m), rx);
            std::uint64_t c = 0;
            for (std::size_t k = rx; k <= top; ++k) c |= bit(by_rank[k]);
            // r may plateau; repeated cells are skipped (their class is empty)
            if (c != prev) s.cells_[x].push_back(c);
            prev = c;
            if (top >= n) break;
            if (m > 4 * n + radii.size()) throw DomainError("kozlov radii never reach the window size");
        }
    }
    s.validate();
    return s;
}

RegroupingScheme RegroupingScheme::shell(Window window) {
    check_window(window);
    RegroupingScheme s;
    s.kind_ = Kind::shell;
    s.window_ = std::move(window);
    s.order_ = SiteOrder::lexicographic();
    s.rank_ = s.order_.ranks(s.window_.sites());
    const std::size_t n = s.window_.size();
    s.cells_.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        const Site& sx = s.window_.site(x);
        const std::uint64_t upper = s.upper_set(x);
        for (int m = 1;; ++m) {
            std::uint64_t c = 0;
            for (std::size_t z = 0; z < n; ++z)
                if ((upper & bit(z)) && linf_distance(s.window_.site(z), sx) <= m) c |= bit(z);
            s.cells_[x].push_back(c);
            if (c == upper) break;
        }
    }
    s.validate();
    return s;
}

RegroupingScheme RegroupingScheme::custom(Window window, SiteOrder order,
                                          std::vector<std::vector<std::uint64_t>> cells) {
    check_window(window);
    RegroupingScheme s;
    s.kind_ = Kind::custom;
    s.window_ = std::move(window);
    s.order_ = std::move(order);
    s.rank_ = s.order_.ranks(s.window_.sites());
    if (cells.size() != s.window_.size()) throw DomainError("custom scheme needs cells for every site");
    s.cells_ = std::move(cells);
    s.validate();
    return s;
}

std::uint64_t RegroupingScheme::upper_set(std::size_t x) const {
    std::uint64_t m = 0;
    for (std::size_t z = 0; z < window_.size(); ++z)
        if (rank_[z] >= rank_[x]) m |= bit(z);
    return m;
}

std::pair<std::size_t, std::size_t> RegroupingScheme::class_of(std::uint64_t a) const {
    if (a == 0) throw DomainError("the empty set has no regrouping class");
    if (a & ~window_.full_mask()) throw DomainError("set outside the regrouping window");
    std::size_t x = std::countr_zero(a);
    for (std::uint64_t m = a; m; m &= m - 1) {
        const std::size_t i = std::countr_zero(m);
        if (rank_[i] < rank_[x]) x = i;
    }
    const auto& c = cells_[x];
    for (std::size_t m = 0; m < c.size(); ++m)
        if ((a & ~c[m]) == 0) return {x, m + 1};
    throw DomainError("set is not covered by the cells of its minimal site");
}

std::uint64_t RegroupingScheme::cell_of(std::uint64_t a) const {
    const auto [x, m] = class_of(a);
    return cells_[x][m - 1];
}

void RegroupingScheme::validate() const {
    const std::size_t n = window_.size();
    if (cells_.size() != n || rank_.size() != n) throw DomainError("scheme does not cover the window");
    for (std::size_t x = 0; x < n; ++x) {
        const auto& c = cells_[x];
        const std::uint64_t up = upper_set(x);
        const std::string where = " at " + window_.site(x).str();
        if (c.empty()) throw DomainError("no cells" + where);
        std::uint64_t prev = 0;
        for (std::uint64_t cell : c) {
            if (!(cell & bit(x))) throw DomainError("cell does not contain its site" + where);
            if (cell & ~up) throw DomainError("cell reaches below its site in the order" + where);
            if ((prev & ~cell) != 0) throw DomainError("cells are not nested" + where);
            if (cell == prev) throw DomainError("repeated cell" + where);
            prev = cell;
        }
        if (prev != up) throw DomainError("cells do not exhaust the upper set" + where);
    }
}

PotentialTable regroup(const PotentialTable& table, const RegroupingScheme& scheme) {
    if (!(table.window().sites() == scheme.window().sites()))
        throw DomainError("regrouping scheme and table use different windows");
    PotentialTable out(table.window(), table.radix(), table.alpha(), table.kind());
    out.scalar_values = table.scalar_values;
    out.nu = table.nu;
    const std::size_t R = static_cast<std::size_t>(table.radix());
    std::vector<int> eta(table.window().size(), 0);

    for (const auto& [a, e] : table.entries()) {
        const std::uint64_t cell = scheme.cell_of(a);
        if (!table.local()) {
            out.add(cell, e.values);
            continue;
        }
        const int k = std::popcount(cell);
        const double size = std::pow(static_cast<double>(R), k);
        if (size > static_cast<double>(kCellCodeCap))
            throw CapExceeded("regrouped cell table", static_cast<std::size_t>(size), kCellCodeCap);
        std::vector<double> vals(static_cast<std::size_t>(size));
        std::vector<int> pos;
        for (std::uint64_t m = cell; m; m &= m - 1) pos.push_back(std::countr_zero(m));
        for (std::size_t c = 0; c < vals.size(); ++c) {
            std::size_t r = c;
            for (int p : pos) {
                eta[p] = static_cast<int>(r % R);
                r /= R;
            }
            vals[c] = e.values[table.local_code(a, eta)];
        }
        out.add(cell, vals);
    }
    return out;
}

PotentialTable kozlov_regroup(const PotentialTable& table, const RegroupingScheme& scheme) {
    if (scheme.kind() != RegroupingScheme::Kind::kozlov) throw DomainError("expected a kozlov scheme");
    return regroup(table, scheme);
}

PotentialTable shell_regroup(const PotentialTable& table) {
    return regroup(table, RegroupingScheme::shell(table.window()));
}

bool net_compatible(const RegroupingScheme& scheme, std::uint64_t lambda, std::uint64_t delta) {
    if ((lambda & ~delta) != 0) return false;
    for (std::uint64_t a = delta; a; a = (a - 1) & delta)
        if ((a & lambda) && (scheme.cell_of(a) & ~delta)) return false;
    return true;
}

NetCheck check_net_equality(const PotentialTable& original, const PotentialTable& regrouped,
                            const RegroupingScheme& scheme, std::uint64_t lambda,
                            std::span<const int> eta1_window, std::span<const int> eta2_window) {
    const std::uint64_t full = scheme.window().full_mask();
    if (lambda == 0 || (lambda & ~full)) throw DomainError("Lambda must be a nonempty window subset");
    if (scheme.window().size() > 20) throw CapExceeded("net equality window", scheme.window().size(), 20);
    for (std::size_t i = 0; i < scheme.window().size(); ++i)
        if (!(lambda & bit(i)) && eta1_window[i] != eta2_window[i])
            throw DomainError("net equality: configurations must agree off Lambda");
    NetCheck out;
    const std::uint64_t others = full & ~lambda;
    // Delta = Lambda u S for S ranging over subsets of the complement
    for (std::uint64_t s = others;; s = (s - 1) & others) {
        const std::uint64_t delta = lambda | s;
        if (net_compatible(scheme, lambda, delta)) {
            const double d0 = partial_sum(original, lambda, delta, eta1_window) -
                              partial_sum(original, lambda, delta, eta2_window);
            const double d1 = partial_sum(regrouped, lambda, delta, eta1_window) -
                              partial_sum(regrouped, lambda, delta, eta2_window);
            out.max_abs_violation = std::max(out.max_abs_violation, std::abs(d0 - d1));
            ++out.deltas;
        }
        if (s == 0) break;
    }
    return out;
}

double cell_value_from_energies(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                                const SiteSet& cell, const SiteSet& prev, const Site& x,
                                std::span<const int> eta_box) {
    if (!cell.contains(x) || !prev.is_subset_of(cell)) throw DomainError("malformed cell pair");
    const SiteSet xs{x};
    return energy(ctx, alpha, cell, eta_box) - energy(ctx, alpha, prev, eta_box) -
           energy(ctx, alpha, cell.minus(xs), eta_box) + energy(ctx, alpha, prev.minus(xs), eta_box);
}

double cell_value_from_logq(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                            const SiteSet& cell, const SiteSet& prev, const Site& x,
                            std::span<const int> eta_box) {
    if (!cell.contains(x) || !prev.is_subset_of(cell)) throw DomainError("malformed cell pair");
    const SiteSet xs{x};
    double v = partial_sum_direct(ctx, xs, cell, eta_box, alpha);
    if (!prev.empty()) v -= partial_sum_direct(ctx, xs, prev.with(x), eta_box, alpha);
    return v;
}

std::vector<ShellBracket> shell_brackets(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                                         const Window& window, const Site& x, int m,
                                         std::span<const int> eta_box) {
    if (m < 1) throw DomainError("shell index starts at 1");
    if (!window.index(x)) throw DomainError("x outside the window");
    if (eta_box.size() != ctx.size()) throw DomainError("disorder configuration must cover the box");
    alpha.validate(ctx.size(), ctx.spec());
    // L_{x,k} within the window; L_{x,0} = {x}
    auto layer = [&](int k) {
        std::vector<Site> v;
        for (const Site& z : window.sites())
            if (!(z < x) && linf_distance(z, x) <= k) v.push_back(z);
        return SiteSet(std::move(v));
    };
    const SiteSet inner = layer(m - 1);
    const SiteSet fresh = layer(m).minus(inner);
    const double bnd = std::exp(2.0 * apriori_delta_h_bound(ctx.spec()));
    const std::size_t ix = ctx.layout().box_index(x);

    std::vector<ShellBracket> out;
    SiteSet q = inner;  // Q_{<y}
    std::vector<int> tilde(ctx.size()), b(ctx.size());
    for (const Site& y : fresh) {
        ShellBracket br;
        br.y = y;
        const SiteSet qy = q.with(y);
        const SiteSet xs{x};
        br.from_energies = energy(ctx, alpha, qy, eta_box) - energy(ctx, alpha, q, eta_box) -
                           energy(ctx, alpha, qy.minus(xs), eta_box) +
                           energy(ctx, alpha, q.minus(xs), eta_box);

        const auto sidx = ctx.indices(q.minus(xs));
        const std::size_t iy = ctx.layout().box_index(y);
        double ratio = 0.0, absc = 0.0;
        for_each_alpha(ctx, alpha, tilde, [&](double w) {
            b = tilde;
            for (std::size_t i : sidx) b[i] = eta_box[i];
            const SiteSet pair{x, y};
            const int px[1] = {eta_box[ix]}, py[1] = {eta_box[iy]};
            const int tx[1] = {b[ix]}, ty[1] = {b[iy]};
            std::vector<int> e1, e2;
            for (const Site& s : pair) {
                const std::size_t i = ctx.layout().box_index(s);
                e1.push_back(eta_box[i]);
                e2.push_back(b[i]);
            }
            DeltaH dx(ctx.layout(), xs, px, tx, b);
            DeltaH dy(ctx.layout(), SiteSet{y}, py, ty, b);
            DeltaH dxy(ctx.layout(), pair, e1, e2, b);
            QuenchedEnsemble ens = ctx.ensemble(DisorderConfig(b.begin(), b.end()));
            const auto e = expectations(ens, {[&](std::span<const int> s) { return std::exp(-dxy(s)); },
                                              [&](std::span<const int> s) { return std::exp(-dx(s)); },
                                              [&](std::span<const int> s) { return std::exp(-dy(s)); }});
            ratio += w * std::log(e[0] / (e[1] * e[2]));
            absc += w * std::abs(e[0] - e[1] * e[2]);
        });
        br.from_ratio = ratio;
        br.bound = bnd * absc;
        out.push_back(br);
        q = qy;
    }
    return out;
}

}  // namespace wg
