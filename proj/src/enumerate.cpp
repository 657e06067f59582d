#include <algorithm>
#include <cmath>
#include <map>

#include "wg/error.hpp"
#include "wg/quenched.hpp"
#include "wg/simd/kernels.hpp"

namespace wg {

double EnergyModel::energy(std::span<const int> spins) const {
    double e = constant;
    for (const BoundTerm& t : terms) {
        std::size_t idx = 0, stride = 1;
        for (int v : t.vars) {
            idx += static_cast<std::size_t>(spins[v]) * stride;
            stride *= static_cast<std::size_t>(radix);
        }
        e += t.table[idx];
    }
    return e;
}

void EnergyModel::accumulate(std::vector<int> vars, std::vector<double> table) {
    if (vars.empty()) {
        constant += table.at(0);
        return;
    }
    for (BoundTerm& t : terms) {
        if (t.vars != vars) continue;
        for (std::size_t i = 0; i < table.size(); ++i) t.table[i] += table[i];
        return;
    }
    terms.push_back({std::move(vars), std::move(table)});
}

int EnergyModel::max_arity() const {
    std::size_t a = 0;
    for (const BoundTerm& t : terms) a = std::max(a, t.vars.size());
    return static_cast<int>(a);
}

EnergyModel bind_energy(const Layout& layout, std::span<const int> eta_box) {
    const ModelSpec& spec = layout.spec();
    EnergyModel m;
    m.n = static_cast<int>(layout.box_size());
    m.radix = spec.spin_radix();
    const std::vector<int> eta = layout.full_disorder(eta_box);
    std::vector<int> spins = layout.full_spins(SpinConfig(layout.box_size(), 0));
    const int n = m.n;

    std::map<std::vector<int>, std::size_t> where;
    for (const TermInstance& inst : layout.instances()) {
        std::vector<int> vars;
        for (int s : inst.sites)
            if (s < n) vars.push_back(s);
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        std::size_t count = 1;
        for (std::size_t k = 0; k < vars.size(); ++k) count *= static_cast<std::size_t>(m.radix);
        std::vector<double> table(count);
        for (std::size_t idx = 0; idx < count; ++idx) {
            std::size_t r = idx;
            for (int v : vars) {
                spins[v] = static_cast<int>(r % static_cast<std::size_t>(m.radix));
                r /= static_cast<std::size_t>(m.radix);
            }
            table[idx] = layout.instance_energy(inst, spins, eta);
        }
        auto it = where.find(vars);
        if (it == where.end()) {
            where.emplace(vars, m.terms.size());
            m.terms.push_back({std::move(vars), std::move(table)});
        } else {
            auto& dst = m.terms[it->second].table;
            for (std::size_t i = 0; i < count; ++i) dst[i] += table[i];
        }
    }
    return m;
}

namespace {

template <class Visit>
void gray_walk(const EnergyModel& m, Visit&& visit) {
    const int n = m.n;
    const int R = m.radix;
    std::vector<int> a(n, 0), o(n, 1), f(n + 1);
    for (int j = 0; j <= n; ++j) f[j] = j;

    struct Slot {
        int term;
        long stride;
    };
    std::vector<std::vector<Slot>> of_var(n);
    std::vector<long> idx(m.terms.size(), 0);
    for (std::size_t t = 0; t < m.terms.size(); ++t) {
        long stride = 1;
        for (int v : m.terms[t].vars) {
            of_var[v].push_back({static_cast<int>(t), stride});
            stride *= R;
        }
    }
    double e = m.energy(a);
    visit(std::span<const int>(a), e);
    if (R < 2) return;
    unsigned long steps = 0;
    for (;;) {
        const int j = f[0];
        f[0] = 0;
        if (j == n) break;
        const int delta = o[j];
        a[j] += delta;
        for (const Slot& s : of_var[j]) {
            const auto& tab = m.terms[s.term].table;
            const long next = idx[s.term] + delta * s.stride;
            e += tab[next] - tab[idx[s.term]];
            idx[s.term] = next;
        }
        if (a[j] == 0 || a[j] == R - 1) {
            o[j] = -o[j];
            f[j] = f[j + 1];
            f[j + 1] = j + 1;
        }
        if ((++steps & 4095UL) == 0) e = m.energy(a);
        visit(std::span<const int>(a), e);
    }
}

struct Quadratic {
    int n = 0;
    double constant = 0.0;
    std::vector<double> lin;
    std::vector<double> K;  // n*n, K[i*n+j] for i<j
};

Quadratic to_quadratic(const EnergyModel& m) {
    Quadratic q;
    q.n = m.n;
    q.constant = m.constant;
    q.lin.assign(m.n, 0.0);
    q.K.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
    for (const BoundTerm& t : m.terms) {
        if (t.vars.size() == 1) {
            q.constant += t.table[0];
            q.lin[t.vars[0]] += t.table[1] - t.table[0];
        } else {
            const int i = t.vars[0], j = t.vars[1];
            const double a = t.table[0], b = t.table[1], c = t.table[2], d = t.table[3];
            q.constant += a;
            q.lin[i] += b - a;
            q.lin[j] += c - a;
            q.K[static_cast<std::size_t>(i) * m.n + j] += d - b - c + a;
        }
    }
    return q;
}

double log_partition_quadratic(const Quadratic& q) {
    const simd::KernelTable& k = simd::kernels();
    const int n = q.n;
    const int L = std::min(n, 12);
    const int H = n - L;
    const std::size_t B = std::size_t{1} << L;
    auto K = [&](int i, int j) { return q.K[static_cast<std::size_t>(i) * n + j]; };

    std::vector<double> base(B, 0.0), buf(B, 0.0), e(B);
    for (std::size_t l = 1; l < B; ++l) {
        int top = 63 - __builtin_clzll(l);
        std::size_t prev = l ^ (std::size_t{1} << top);
        double v = base[prev] + q.lin[top];
        for (int j = 0; j < top; ++j)
            if (prev >> j & 1U) v += K(j, top);
        base[l] = v;
    }
    std::vector<double> g(L);
    bool coupled = false;
    for (int i = 0; i < L && !coupled; ++i)
        for (int j = L; j < n; ++j)
            if (K(i, j) != 0.0) coupled = true;

    LogSumExp acc;
    const std::size_t blocks = std::size_t{1} << H;
    double block_min = 0.0, block_sum = 0.0;
    for (std::size_t h = 0; h < blocks; ++h) {
        double C = q.constant;
        for (int j = 0; j < H; ++j) {
            if (!(h >> j & 1U)) continue;
            C += q.lin[L + j];
            for (int j2 = j + 1; j2 < H; ++j2)
                if (h >> j2 & 1U) C += K(L + j, L + j2);
        }
        if (coupled || h == 0) {
            for (int i = 0; i < L; ++i) {
                double s = 0.0;
                for (int j = 0; j < H; ++j)
                    if (h >> j & 1U) s += K(i, L + j);
                g[i] = s;
            }
            buf[0] = 0.0;
            for (int b = 0; b < L; ++b) {
                const std::size_t half = std::size_t{1} << b;
                k.add_scalar(buf.data() + half, buf.data(), g[b], half);
            }
            k.add(e.data(), base.data(), buf.data(), B);
            block_min = k.min_value(e.data(), B);
            block_sum = k.sum_exp_shifted(e.data(), B, block_min);
        }
        acc.add(-(C + block_min) + std::log(block_sum));
    }
    return acc.value();
}

}  // namespace

void for_each_configuration(const EnergyModel& m,
                            const std::function<void(std::span<const int>, double)>& visit,
                            std::size_t cap) {
    if (static_cast<std::size_t>(m.n) > cap)
        throw CapExceeded("spin enumeration", static_cast<std::size_t>(m.n), cap);
    gray_walk(m, [&](std::span<const int> a, double e) { visit(a, e); });
}

double log_partition_gray(const EnergyModel& m, std::size_t cap) {
    if (static_cast<std::size_t>(m.n) > cap)
        throw CapExceeded("spin enumeration", static_cast<std::size_t>(m.n), cap);
    LogSumExp acc;
    gray_walk(m, [&](std::span<const int>, double e) { acc.add(-e); });
    return acc.value();
}

double log_partition_enumerate(const EnergyModel& m, std::size_t cap) {
    if (static_cast<std::size_t>(m.n) > cap)
        throw CapExceeded("spin enumeration", static_cast<std::size_t>(m.n), cap);
    if (m.radix == 2 && m.max_arity() <= 2) return log_partition_quadratic(to_quadratic(m));
    return log_partition_gray(m, cap);
}

}  // namespace wg
