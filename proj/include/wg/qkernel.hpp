#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "wg/quenched.hpp"

namespace wg {

// A fixed finite box Lambda_N with its boundary condition. log Z(eta) for
// disorder configurations on the box is memoised; small boxes get a dense
// table over all |H0|^n configurations.
class QKernelContext {
public:
    QKernelContext(ModelPtr spec, Box box, BoundaryCondition bc, QuenchedOptions opt = {});
    // default boundary for the model
    QKernelContext(ModelPtr spec, Box box, QuenchedOptions opt = {});

    const ModelSpec& spec() const { return layout_->spec(); }
    const ModelPtr& spec_ptr() const { return layout_->spec_ptr(); }
    const Box& box() const { return layout_->box(); }
    const Layout& layout() const { return *layout_; }
    const LayoutPtr& layout_ptr() const { return layout_; }
    const QuenchedOptions& options() const { return opt_; }
    std::size_t size() const { return layout_->box_size(); }
    int radix() const { return layout_->spec().disorder_radix(); }

    // bits needed for a dense table: n * log2 |H0|
    double table_bits() const;
    bool has_dense_table() const { return table_bits() <= dense_table_bits; }

    // Packed code sum_i eta_i |H0|^i (site 0 least significant).
    std::uint64_t code(std::span<const int> eta) const;
    void decode(std::uint64_t code, std::span<int> eta) const;

    double log_partition(std::span<const int> eta) const;
    double log_partition_code(std::uint64_t code) const;
    // Dense table over all codes; CapExceeded when too large.
    const std::vector<double>& log_partition_table() const;

    QuenchedEnsemble ensemble(DisorderConfig eta) const;
    // Box indices of a site set; DomainError when a site is outside the box.
    std::vector<std::size_t> indices(const SiteSet& s) const { return layout_->box_indices(s); }

    std::size_t dense_table_bits = 20;

private:
    LayoutPtr layout_;
    QuenchedOptions opt_;
    mutable std::once_flag table_once_;
    mutable std::vector<double> table_;
    mutable std::mutex cache_mu_;
    mutable std::unordered_map<std::uint64_t, double> cache_;
};

using QKernelPtr = std::shared_ptr<const QKernelContext>;

// log Q_Lambda(eta1, eta2 | eta_rest) = log Z(eta1_L eta_rest) - log Z(eta2_L eta_rest).
// eta1/eta2 list the disorder on Lambda in its canonical order; eta_rest is a
// full box configuration (its values on Lambda are ignored).
double log_q(const QKernelContext& ctx, const SiteSet& lambda, std::span<const int> eta1,
             std::span<const int> eta2, std::span<const int> eta_rest);

// Same quantity as log mu[eta2](exp(-Delta H_Lambda(eta1, eta2))), evaluated
// as a quenched expectation (no partition-function ratio).
double log_q_via_expectation(const QKernelContext& ctx, const SiteSet& lambda,
                             std::span<const int> eta1, std::span<const int> eta2,
                             std::span<const int> eta_rest);

// Spin-configuration level Delta H_Lambda for the box, as a function of the
// box spins (used by the expectation path and by correlation observables).
class DeltaH {
public:
    DeltaH(const Layout& layout, const SiteSet& v, std::span<const int> eta1,
           std::span<const int> eta2, std::span<const int> eta_rest);
    double operator()(std::span<const int> box_spins) const;
    // Adds exp(-Delta H) tilt into a bound energy model.
    void tilt(EnergyModel& m) const;

private:
    const Layout* layout_;
    std::vector<int> instances_;
    std::vector<int> eta1_full_, eta2_full_;
    mutable std::vector<int> spins_;
};

// max |Delta H_x| over all spins, disorder and single-site changes at one site
double apriori_delta_h_bound(const ModelSpec& spec);

struct PropertyResult {
    std::string property;
    std::size_t trials = 0;
    double max_abs_violation = 0.0;
    double tolerance = 1e-10;
    nlohmann::json witness;  // null unless a violation exceeded the tolerance
    bool passed() const { return max_abs_violation <= tolerance; }
    nlohmann::json to_json() const;
};

struct QCheckOptions {
    std::size_t trials = 100;
    std::uint64_t seed = 20240601;
    double tolerance = 1e-10;
    int max_extent = 3;  // sub-box Delta extents
    bool dual_path = true;
};

// Antisymmetry, restriction, cocycle (and the expectation path) over
// randomised Lambda in Delta in Lambda_N.
std::vector<PropertyResult> check_q_properties(const QKernelContext& ctx,
                                               const QCheckOptions& opt = {});

struct JointState {
    SpinConfig sigma;     // box spins
    DisorderConfig eta;   // box disorder
};

// Probability table over xi_Lambda. Entry index: digit k (site k of Lambda,
// least significant first) is sigma_k * |H0| + eta_k.
struct ConditionalTable {
    SiteSet lambda;
    int spin_radix = 2;
    int disorder_radix = 2;
    std::vector<double> prob;

    std::size_t digit_radix() const { return static_cast<std::size_t>(spin_radix * disorder_radix); }
    std::size_t index(std::span<const int> sigma, std::span<const int> eta) const;
    double max_abs_diff(const ConditionalTable& o) const;
};

// Sum over instances meeting Lambda of U^ann (Phi minus log nu on Lambda)
// with the box state replaced on Lambda.
double annealed_energy(const QKernelContext& ctx, std::span<const std::size_t> lambda_idx,
                       std::span<const int> sigma, std::span<const int> eta);

// Conditional of the finite-volume joint measure on xi_Lambda given the rest
// of the box state: exp(-sum U^ann - log Q_Lambda(eta~, eta | eta_rest)).
ConditionalTable joint_conditional(const QKernelContext& ctx, const SiteSet& lambda,
                                   const JointState& xi, std::size_t max_sites = 4);

}  // namespace wg
