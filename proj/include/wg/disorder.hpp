#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "wg/qkernel.hpp"
#include "wg/stats.hpp"

namespace wg {

// Sitewise independent disorder draws; configuration `index` is a pure
// function of (seed, index).
class DisorderSampler {
public:
    DisorderSampler(std::vector<std::vector<double>> site_weights, std::uint64_t seed);
    DisorderSampler(const ModelSpec& spec, std::size_t sites, std::uint64_t seed);

    std::size_t sites() const { return cdf_.size(); }
    std::uint64_t seed() const { return seed_; }
    DisorderConfig sample(std::uint64_t index) const;
    void sample_into(std::uint64_t index, std::span<int> out) const;

private:
    std::vector<std::vector<double>> cdf_;
    std::uint64_t seed_;
};

// mu[eta~](e^{-dH_{x,y}}) - mu[eta~](e^{-dH_x}) mu[eta~](e^{-dH_y}) where the
// variations replace eta~ at x (y) by eta_x (eta_y). Quenched expectations
// by enumeration.
double c_xy(const QKernelContext& ctx, const Site& x, const Site& y, int eta_x, int eta_y,
            std::span<const int> eta_tilde);
// Same through partition-function ratios.
double c_xy_ratio(const QKernelContext& ctx, const Site& x, const Site& y, int eta_x, int eta_y,
                  std::span<const int> eta_tilde);

struct CorrelationValue {
    int eta_x = 0, eta_y = 0;
    MeanEstimate abs;     // IP-average of |c_xy|
    MeanEstimate signed_; // IP-average of c_xy
};

struct CorrelationEstimate {
    int m = 0;
    Site x, y;
    double cbar = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
    bool flagged = false;  // too few samples for batch means
    std::vector<CorrelationValue> by_value;
    // per-sample max-pair |c| series, kept for paired comparisons across m
    std::vector<double> series;
};

struct CbarOptions {
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    std::size_t batches = 20;
    int axis = 0;
    bool keep_series = false;
};

// Representative pair x, x + m e_axis centred in the box; sup over the
// disorder values at the two sites of the IP-average of |c_xy|.
CorrelationEstimate cbar(const QKernelContext& ctx, int m, const CbarOptions& opt = {});

struct AprioriConstants {
    double delta_h_bound = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

// From the uniform bound B on |Delta H_x|: C1 = 3^d B (cells with m = 1),
// C2 = 2d 3^{2d-1} e^{2B} (bracket constant times shell counting).
AprioriConstants apriori_constants(const ModelSpec& spec);

// weight of a site set (translation invariant); default w = 1
using SetWeight = std::function<double(const SiteSet&)>;

// lexicographic half-ball {z >= 0, |z| <= m} in d dimensions
SiteSet half_ball(int d, int m);

struct DecayBudget {
    double c1 = 0.0, c2 = 0.0;
    double total = 0.0;
    std::vector<double> terms;  // C2 m^{2d-1} wbar(m) cbar(m), aligned with the input
    double last_term = 0.0;     // size of the truncation point
};

// C1 + C2 sum_m m^{2d-1} wbar(m) cbar(m) over the supplied (m, cbar) pairs.
DecayBudget decay_budget(const std::vector<std::pair<int, double>>& cbar_table, const SetWeight& w,
                         int d, double c1, double c2);

struct Bond {
    Site x;
    int axis = 0;
};

// mu(s_x s_{x+e} s_y s_{y+e'}) - mu(s_x s_{x+e}) mu(s_y s_{y+e'}); bonds must be disjoint.
double energy_energy_correlation(const QKernelContext& ctx, const Bond& b1, const Bond& b2,
                                 std::span<const int> eta);

nlohmann::json to_json(const CorrelationEstimate& c);

}  // namespace wg
