#include <algorithm>
#include <cmath>
#include <optional>

#include "wg/error.hpp"
#include "wg/quenched.hpp"
#include "wg/simd/kernels.hpp"

namespace wg {

namespace {

struct VarRef {
    bool prev;        // lives in the previous slice
    int pos;          // position inside its slice
    std::size_t mul;  // radix^k inside the term table
};

struct Plan {
    int axis = 0;
    std::size_t states = 1;
    std::vector<std::vector<int>> slices;
    std::vector<std::vector<std::pair<int, std::vector<VarRef>>>> terms;  // per slice
};

std::optional<Plan> make_plan(const EnergyModel& m, const Box& box, std::size_t max_states) {
    if (box.size() != static_cast<std::size_t>(m.n) || m.n == 0) return std::nullopt;
    Plan p;
    for (int ax = 1; ax < box.dim(); ++ax)
        if (box.extent(ax) > box.extent(p.axis)) p.axis = ax;
    const int ext = box.extent(p.axis);
    const std::size_t width = box.size() / static_cast<std::size_t>(ext);
    double states = std::pow(static_cast<double>(m.radix), static_cast<double>(width));
    if (states > static_cast<double>(max_states)) return std::nullopt;
    p.states = static_cast<std::size_t>(states + 0.5);

    std::vector<int> slice_of(m.n), pos_of(m.n);
    p.slices.resize(ext);
    for (int i = 0; i < m.n; ++i) {
        const int c = box.site_at(i)[p.axis] - box.lower()[p.axis];
        slice_of[i] = c;
        pos_of[i] = static_cast<int>(p.slices[c].size());
        p.slices[c].push_back(i);
    }
    p.terms.resize(ext);
    for (std::size_t t = 0; t < m.terms.size(); ++t) {
        const auto& vars = m.terms[t].vars;
        int lo = ext, hi = -1;
        for (int v : vars) {
            lo = std::min(lo, slice_of[v]);
            hi = std::max(hi, slice_of[v]);
        }
        if (hi - lo > 1) return std::nullopt;
        std::vector<VarRef> refs;
        std::size_t mul = 1;
        for (int v : vars) {
            refs.push_back({slice_of[v] != hi, pos_of[v], mul});
            mul *= static_cast<std::size_t>(m.radix);
        }
        p.terms[hi].emplace_back(static_cast<int>(t), std::move(refs));
    }
    return p;
}

}  // namespace

bool transfer_applicable(const EnergyModel& m, const Box& box, std::size_t max_states) {
    return make_plan(m, box, max_states).has_value();
}

double log_partition_transfer(const EnergyModel& m, const Box& box, std::size_t max_states) {
    auto plan = make_plan(m, box, max_states);
    if (!plan) throw DomainError("transfer matrix does not apply to this box/Hamiltonian");
    const Plan& p = *plan;
    const simd::KernelTable& k = simd::kernels();
    const std::size_t S = p.states;
    const std::size_t R = static_cast<std::size_t>(m.radix);

    std::vector<std::size_t> pw(16, 1);
    for (std::size_t i = 1; i < pw.size(); ++i) pw[i] = pw[i - 1] * R;
    auto digit = [&](std::size_t state, int pos) { return state / pw[pos] % R; };

    auto slice_energy = [&](std::size_t slice, std::size_t a, std::size_t b) {
        double e = 0.0;
        for (const auto& [t, refs] : p.terms[slice]) {
            std::size_t idx = 0;
            for (const VarRef& r : refs) idx += digit(r.prev ? a : b, r.pos) * r.mul;
            e += m.terms[t].table[idx];
        }
        return e;
    };

    double shift = -m.constant;
    std::vector<double> v(S), next(S), w(S * S), en(S * S);

    // first slice
    for (std::size_t b = 0; b < S; ++b) en[b] = slice_energy(0, 0, b);
    double emin = k.min_value(en.data(), S);
    for (std::size_t b = 0; b < S; ++b) v[b] = std::exp(emin - en[b]);
    shift -= emin;

    for (std::size_t s = 1; s < p.slices.size(); ++s) {
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = 0; b < S; ++b) en[a * S + b] = slice_energy(s, a, b);
        emin = k.min_value(en.data(), S * S);
        for (std::size_t i = 0; i < S * S; ++i) w[i] = std::exp(emin - en[i]);
        shift -= emin;
        k.vecmat(v.data(), w.data(), next.data(), S, S);
        const double mx = *std::max_element(next.begin(), next.end());
        for (std::size_t b = 0; b < S; ++b) v[b] = next[b] / mx;
        shift += std::log(mx);
    }
    double tot = 0.0;
    for (double x : v) tot += x;
    return shift + std::log(tot);
}

double log_partition(const EnergyModel& m, const Box& box, const QuenchedOptions& opt) {
    using M = QuenchedOptions::Method;
    switch (opt.method) {
        case M::enumerate:
            return log_partition_enumerate(m, opt.enumeration_cap);
        case M::transfer_matrix:
            return log_partition_transfer(m, box, opt.tm_max_states);
        case M::automatic:
            break;
    }
    if (m.n <= 12) return log_partition_enumerate(m, opt.enumeration_cap);
    if (transfer_applicable(m, box, opt.tm_max_states)) return log_partition_transfer(m, box, opt.tm_max_states);
    return log_partition_enumerate(m, opt.enumeration_cap);
}

}  // namespace wg
