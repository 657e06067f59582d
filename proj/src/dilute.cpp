#include "wg/dilute.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "wg/error.hpp"
#include "wg/quenched.hpp"

namespace wg {

double dilute_log_z0(double J, const SiteSet& c) {
    if (c.empty()) return 0.0;
    EnergyModel m;
    m.n = static_cast<int>(c.size());
    m.radix = 2;
    // spin index 0 -> -1, 1 -> +1; table index s_a + 2 s_b
    const std::vector<double> bond{-J, J, J, -J};
    for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = a + 1; b < c.size(); ++b)
            if (l1_distance(c[a], c[b]) == 1)
                m.accumulate({static_cast<int>(a), static_cast<int>(b)}, bond);
    return log_partition_enumerate(m);
}

double dilute_vacuum_coeff(double J, const SiteSet& a, std::size_t cap) {
    if (a.size() > cap) throw CapExceeded("vacuum coefficient set", a.size(), cap);
    if (a.empty()) return 0.0;
    const Window w(a);
    const std::uint64_t full = w.full_mask();
    double c = 0.0;
    for (std::uint64_t l = full;; l = (l - 1) & full) {
        const int k = std::popcount(l);
        const double e = dilute_log_z0(J, w.set_of(l)) - k * std::numbers::ln2;
        c += ((a.size() - k) % 2 ? -e : e);
        if (l == 0) break;
    }
    return c;
}

namespace {

double normalised(double J, const SiteSet& c, ClusterNormalization norm) {
    const double z = dilute_log_z0(J, c);
    return norm == ClusterNormalization::per_spin ? z - c.size() * std::numbers::ln2 : z;
}

std::vector<int> occupation_values(const Box& box, std::span<const int> eta_box) {
    if (eta_box.size() != box.size()) throw DomainError("occupations must cover the box");
    for (int v : eta_box)
        if (v != 0 && v != 1) throw DomainError("occupations must be 0 or 1");
    return {eta_box.begin(), eta_box.end()};
}

}  // namespace

PotentialTable cluster_potential(double J, const Box& box, ClusterNormalization norm,
                                 std::size_t max_box) {
    if (box.size() > max_box) throw CapExceeded("cluster potential box", box.size(), max_box);
    const Window w(box);
    PotentialTable t(w, 2, "cluster", PotentialTable::Kind::local);
    t.scalar_values = {0.0, 1.0};
    const std::uint64_t full = w.full_mask();
    for (std::uint64_t cm = 1; cm <= full; ++cm) {
        const SiteSet c = w.set_of(cm);
        if (!is_connected(c)) continue;
        const SiteSet bd = boundary(c, 1);
        std::vector<Site> inside;
        for (const Site& s : bd)
            if (box.contains(s)) {
                bool adj = false;
                for (const Site& z : c)
                    if (l1_distance(s, z) == 1) adj = true;
                if (adj) inside.push_back(s);
            }
        const std::uint64_t dm = w.mask_of(SiteSet(inside));
        const std::uint64_t am = cm | dm;
        const int k = std::popcount(am);
        std::vector<double> vals(std::size_t{1} << k, 0.0);
        // local code: bit j is the occupation of the j-th site of A
        std::size_t code = 0;
        int j = 0;
        for (std::uint64_t m = am; m; m &= m - 1, ++j)
            if (cm & (std::uint64_t{1} << std::countr_zero(m))) code |= std::size_t{1} << j;
        vals[code] = normalised(J, c, norm);
        t.add(am, vals);
    }
    return t;
}

PotentialTable cluster_potential(double J, const Box& box, std::span<const int> eta_box,
                                 ClusterNormalization norm) {
    const auto occ = occupation_values(box, eta_box);
    const Window w(box);
    PotentialTable t(w, 2, "cluster", PotentialTable::Kind::fixed);
    std::vector<Site> occupied;
    for (std::size_t i = 0; i < occ.size(); ++i)
        if (occ[i]) occupied.push_back(box.site_at(i));
    for (const SiteSet& c : connected_components(SiteSet(occupied))) {
        std::vector<Site> a(c.begin(), c.end());
        for (const Site& s : boundary(c, 1))
            if (box.contains(s))
                for (const Site& z : c)
                    if (l1_distance(s, z) == 1) {
                        a.push_back(s);
                        break;
                    }
        const double v = normalised(J, c, norm);
        t.set(w.mask_of(SiteSet(a)), PotentialEntry{{v}, {}, CoeffForm::tabulated, 0.0});
    }
    return t;
}

}  // namespace wg
