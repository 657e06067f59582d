#pragma once

// Brute-force joint measure K on a whole box: enumerate every (sigma, eta),
// weight prod nu(eta_i) exp(-H(sigma, eta)) / Z(eta), Z summed directly.

#include <cmath>
#include <vector>

#include "wg/qkernel.hpp"

namespace oracle {

struct Joint {
    std::size_t n = 0;
    int S = 2, R = 2;
    std::vector<double> prob;  // index sigma_code + S^n * eta_code, site 0 least significant

    std::size_t index(std::span<const int> sigma, std::span<const int> eta) const {
        std::size_t cs = 0, ce = 0, m = 1, me = 1;
        for (std::size_t i = 0; i < n; ++i) {
            cs += static_cast<std::size_t>(sigma[i]) * m;
            ce += static_cast<std::size_t>(eta[i]) * me;
            m *= static_cast<std::size_t>(S);
            me *= static_cast<std::size_t>(R);
        }
        return cs + m * ce;
    }
};

inline std::vector<int> digits(std::size_t code, std::size_t n, int radix) {
    std::vector<int> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = static_cast<int>(code % static_cast<std::size_t>(radix));
        code /= static_cast<std::size_t>(radix);
    }
    return d;
}

inline Joint enumerate_joint(const wg::QKernelContext& ctx) {
    Joint j;
    j.n = ctx.size();
    j.S = ctx.spec().spin_radix();
    j.R = ctx.radix();
    std::size_t ns = 1, ne = 1;
    for (std::size_t i = 0; i < j.n; ++i) {
        ns *= static_cast<std::size_t>(j.S);
        ne *= static_cast<std::size_t>(j.R);
    }
    j.prob.assign(ns * ne, 0.0);
    const auto& nu = ctx.spec().nu();
    std::vector<double> boltz(ns);
    for (std::size_t ce = 0; ce < ne; ++ce) {
        const auto eta = digits(ce, j.n, j.R);
        const wg::EnergyModel m = wg::bind_energy(ctx.layout(), eta);
        double z = 0.0;
        for (std::size_t cs = 0; cs < ns; ++cs) {
            boltz[cs] = std::exp(-m.energy(digits(cs, j.n, j.S)));
            z += boltz[cs];
        }
        double pe = 1.0;
        for (int v : eta) pe *= nu[v];
        for (std::size_t cs = 0; cs < ns; ++cs) j.prob[cs + ns * ce] = pe * boltz[cs] / z;
    }
    return j;
}

// P(xi_Lambda | xi off Lambda) read off the joint table; same layout as
// wg::ConditionalTable (digit k = sigma_k * R + eta_k).
inline wg::ConditionalTable condition(const Joint& j, const std::vector<std::size_t>& lambda_idx,
                                      const wg::SiteSet& lambda, const wg::JointState& xi) {
    wg::ConditionalTable t{lambda, j.S, j.R, {}};
    const std::size_t base = static_cast<std::size_t>(j.S * j.R);
    std::size_t size = 1;
    for (std::size_t k = 0; k < lambda_idx.size(); ++k) size *= base;
    t.prob.assign(size, 0.0);
    std::vector<int> s = xi.sigma, e = xi.eta;
    double total = 0.0;
    for (std::size_t c = 0; c < size; ++c) {
        std::size_t r = c;
        for (std::size_t i : lambda_idx) {
            const int d = static_cast<int>(r % base);
            r /= base;
            s[i] = d / j.R;
            e[i] = d % j.R;
        }
        t.prob[c] = j.prob[j.index(s, e)];
        total += t.prob[c];
    }
    for (double& p : t.prob) p /= total;
    return t;
}

}  // namespace oracle
