#include <cmath>
#include <random>

#include "doctest.h"
#include "wg/error.hpp"
#include "wg/layout.hpp"
#include "wg/model.hpp"

using namespace wg;

namespace {

// spin index 1 = +1, 0 = -1 for the built-ins
JointConfig uniform_config(const SiteSet& region, int spin, int eta) {
    JointConfig xi;
    for (const Site& s : region) {
        xi.sigma[s] = spin;
        xi.eta[s] = eta;
    }
    return xi;
}

JointConfig random_config(std::mt19937_64& rng, const SiteSet& region, int sr, int dr) {
    JointConfig xi;
    for (const Site& s : region) {
        xi.sigma[s] = static_cast<int>(rng() % sr);
        xi.eta[s] = static_cast<int>(rng() % dr);
    }
    return xi;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("rfim potential values") {
    ModelSpec zero = make_rfim(0.0, 0.0, {-1.0, 1.0}, {0.5, 0.5}, 1);
    SiteSet region = Box::from_extents({4}).sites();
    std::mt19937_64 rng(1);
    JointConfig xi = random_config(rng, region, 2, 2);
    CHECK(phi(zero, SiteSet{Site{1}}, xi) == 0.0);
    CHECK(phi(zero, SiteSet{Site{1}, Site{2}}, xi) == 0.0);

    ModelSpec m = make_rfim(0.7, 0.4, {-1.0, 1.0}, {0.5, 0.5}, 2);
    SiteSet r2 = Box::from_extents({2, 2}).sites();
    JointConfig pp = uniform_config(r2, 1, 1);
    CHECK(phi(m, SiteSet{Site{0, 0}, Site{0, 1}}, pp) == doctest::Approx(-0.7));
    CHECK(phi(m, SiteSet{Site{0, 0}, Site{1, 0}}, pp) == doctest::Approx(-0.7));
    // eta_x = +1, sigma_x = -1: Phi = h
    JointConfig one = uniform_config(r2, 0, 1);
    CHECK(phi(m, SiteSet{Site{0, 0}}, one) == doctest::Approx(0.4));
    CHECK(m.range() == 1);
    CHECK(m.ferromagnetic());
}

TEST_CASE("random bond and dilute") {
    ModelSpec fixed = make_random_bond({{{0.9}, {1.0}}, {{0.9}, {1.0}}});
    SiteSet r = Box::from_extents({2, 2}).sites();
    JointConfig xi = uniform_config(r, 1, 0);
    CHECK(phi(fixed, SiteSet{Site{0, 0}, Site{1, 0}}, xi) == doctest::Approx(-0.9));
    CHECK(fixed.disorder_radix() == 1);

    ModelSpec ea = make_random_bond({{{-1.0, 1.0}, {0.5, 0.5}}, {{-1.0, 1.0}, {0.5, 0.5}}});
    CHECK(ea.disorder_radix() == 4);
    CHECK(!ea.ferromagnetic());
    double total = 0.0;
    for (double w : ea.nu()) total += w;
    CHECK(total == doctest::Approx(1.0));
    ModelSpec ferro = make_random_bond({{{0.5, 1.5}, {0.3, 0.7}}});
    CHECK(ferro.ferromagnetic());

    ModelSpec d = make_dilute(1.2, 0.3, 2);
    CHECK(d.nu()[1] == doctest::Approx(0.3));
    JointConfig occ = uniform_config(r, 1, 1);
    CHECK(phi(d, SiteSet{Site{0, 0}, Site{0, 1}}, occ) == doctest::Approx(-1.2));
    occ.eta[Site{0, 1}] = 0;
    CHECK(phi(d, SiteSet{Site{0, 0}, Site{0, 1}}, occ) == 0.0);
    CHECK(phi(d, SiteSet{Site{0, 0}, Site{1, 0}}, occ) == doctest::Approx(-1.2));
    CHECK_THROWS_AS(make_dilute(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(make_dilute(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(make_rfim(1.0, 1.0, {}, {}), DomainError);
}

TEST_CASE("dilute: p only changes nu") {
    ModelSpec a = make_dilute(0.8, 0.2, 1), b = make_dilute(0.8, 0.7, 1);
    std::mt19937_64 rng(3);
    SiteSet r = Box::from_extents({3}).sites();
    for (int t = 0; t < 20; ++t) {
        JointConfig xi = random_config(rng, r, 2, 2);
        CHECK(phi(a, SiteSet{Site{0}, Site{1}}, xi) == phi(b, SiteSet{Site{0}, Site{1}}, xi));
    }
}

TEST_CASE("annealed potential") {
    auto m = share(make_rfim(0.5, 0.3, {-1.0, 1.0}, {0.5, 0.5}, 1));
    AnnealedPotential u = annealed_potential(m);
    SiteSet r = Box::from_extents({3}).sites();
    JointConfig xi = uniform_config(r, 1, 1);
    CHECK(u.value(SiteSet{Site{0}}, xi) == doctest::Approx(-0.3 + std::log(2.0)));
    CHECK(u.value(SiteSet{Site{0}, Site{1}}, xi) == doctest::Approx(-0.5));

    auto f = share(make_free_model(1, 3));
    CHECK(annealed_potential(f).value(SiteSet{Site{0}}, uniform_config(r, 0, 2)) ==
          doctest::Approx(std::log(3.0)));

    // differs from Phi only on singletons, by -log nu
    auto d = share(make_dilute(0.7, 0.25, 1));
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        JointConfig z = random_config(rng, r, 2, 2);
        for (const SiteSet& a : {SiteSet{Site{1}}, SiteSet{Site{0}, Site{1}}, SiteSet{Site{0}, Site{2}}}) {
            double diff = annealed_potential(d).value(a, z) - phi(*d, a, z);
            double want = a.size() == 1 ? -std::log(d->nu()[z.eta[a[0]]]) : 0.0;
            CHECK(diff == doctest::Approx(want));
        }
    }
}

TEST_CASE("delta_H examples") {
    ModelSpec m = make_rfim(0.6, 0.9, {-1.0, 1.0}, {0.5, 0.5}, 1);
    SiteSet v{Site{0}};
    SiteSet nb = r_neighborhood(v, 1);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        JointConfig xi = random_config(rng, nb, 2, 2);
        const int e1 = static_cast<int>(rng() % 2), e2 = static_cast<int>(rng() % 2);
        const double f1 = e1 ? 1.0 : -1.0, f2 = e2 ? 1.0 : -1.0;
        const double s = xi.sigma[Site{0}] ? 1.0 : -1.0;
        std::vector<int> a{e1}, b{e2};
        CHECK(delta_H(m, v, xi, a, b) == doctest::Approx(-0.9 * (f1 - f2) * s));
        CHECK(delta_H(m, v, xi, a, a) == 0.0);
    }

    ModelSpec d = make_dilute(1.1, 0.5, 2);
    SiteSet v2{Site{0, 0}};
    SiteSet nb2 = r_neighborhood(v2, 1);
    for (int t = 0; t < 20; ++t) {
        JointConfig xi = random_config(rng, nb2, 2, 2);
        std::vector<int> one{1}, zero{0};
        double sum = 0.0;
        for (Site y : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}})
            sum += xi.eta[y] * (xi.sigma[y] ? 1.0 : -1.0);
        const double sx = xi.sigma[Site{0, 0}] ? 1.0 : -1.0;
        CHECK(delta_H(d, v2, xi, one, zero) == doctest::Approx(-1.1 * sx * sum));
    }
}

TEST_CASE("delta_H antisymmetry and locality (random)") {
    std::mt19937_64 rng(17);
    ModelSpec models[] = {make_rfim(0.4, 0.8, {-1.0, 0.5, 1.0}, {0.2, 0.3, 0.5}, 2),
                          make_dilute(0.9, 0.4, 2),
                          make_random_bond({{{-0.5, 1.0}, {0.4, 0.6}}, {{0.3, 0.8}, {0.5, 0.5}}})};
    for (const ModelSpec& m : models) {
        for (int t = 0; t < 40; ++t) {
            SiteSet v{Site{0, 0}};
            if (t % 2) v = v.with(Site{0, 1});
            SiteSet vbar = r_neighborhood(v, m.range());
            SiteSet outer = r_neighborhood(v, m.range() + 2);
            JointConfig xi = random_config(rng, outer, m.spin_radix(), m.disorder_radix());
            std::vector<int> e1, e2;
            for (std::size_t k = 0; k < v.size(); ++k) {
                e1.push_back(static_cast<int>(rng() % m.disorder_radix()));
                e2.push_back(static_cast<int>(rng() % m.disorder_radix()));
            }
            const double d12 = delta_H(m, v, xi, e1, e2);
            CHECK(d12 == doctest::Approx(-delta_H(m, v, xi, e2, e1)));
            // vary sigma outside vbar
            JointConfig xi2 = xi;
            for (const Site& s : outer.minus(vbar)) xi2.sigma[s] = static_cast<int>(rng() % m.spin_radix());
            CHECK(delta_H(m, v, xi2, e1, e2) == d12);
        }
    }
}

TEST_CASE("phi vanishes on sets wider than the range") {
    std::mt19937_64 rng(23);
    ModelSpec m = make_rfim(1.0, 1.0, {-1.0, 1.0}, {0.5, 0.5}, 2);
    SiteSet region = Box::from_extents({6, 6}).sites();
    JointConfig xi = random_config(rng, region, 2, 2);
    for (int t = 0; t < 200; ++t) {
        std::vector<Site> v;
        const int k = 2 + static_cast<int>(rng() % 3);
        for (int i = 0; i < k; ++i) v.push_back(region[rng() % region.size()]);
        SiteSet a(v);
        if (a.diameter() > m.range()) CHECK(phi(m, a, xi) == 0.0);
    }
}

TEST_CASE("layout keeps boundary terms only when the collar has spins") {
    auto m = share(make_rfim(1.0, 0.0, {-1.0, 1.0}, {0.5, 0.5}, 2));
    Box b = Box::from_extents({2, 2});
    Layout free_l(m, b, BoundaryCondition::free_bc());
    // 4 field terms + 4 internal bonds
    CHECK(free_l.instances().size() == 8);
    CHECK(free_l.site_count() == 4);
    Layout plus_l(m, b, BoundaryCondition::uniform(1));
    // plus 8 boundary bonds
    CHECK(plus_l.instances().size() == 16);
    CHECK(plus_l.site_count() == 12);
    BoundaryCondition mixed;
    mixed.spins[Site{-1, 0}] = 0;
    Layout mixed_l(m, b, mixed);
    CHECK(mixed_l.instances().size() == 9);
}

}  // TEST_SUITE
