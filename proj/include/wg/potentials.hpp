#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wg/potential_table.hpp"
#include "wg/qkernel.hpp"

namespace wg {

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
    bool exact = true;
};

struct IntegrationOptions {
    std::size_t exact_bits = 20;  // enumerate alpha when its support has <= 2^bits points
    bool allow_mc = false;
    std::size_t samples = 4096;
    std::uint64_t seed = 7;
};

// E^alpha_Lambda(eta_Lambda) = int alpha(d eta~) log Q_Lambda(eta_Lambda, eta~_Lambda | eta~_rest).
// eta_lambda in Lambda's canonical order.
Estimate relative_energy(const QKernelContext& ctx, const SiteSet& lambda,
                         std::span<const int> eta_lambda, const NormalizingMeasure& alpha,
                         const IntegrationOptions& opt = {});

// alpha-normalised free-energy potential on a window inside the box, as a
// table local in eta_A: U = Moebius transform of E^alpha over the window.
PotentialTable free_energy_potential(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                                     const SiteSet& window);

// Largest |int alpha_x U_A| over entries, sites x in A and values off x.
PropertyResult check_alpha_normalization(const PotentialTable& table, const QKernelContext& ctx,
                                         const NormalizingMeasure& alpha, double tol = 1e-10);

// max over subsets L and eta_L of |sum_{A subset L} U_A - E^alpha_L| (E by direct integration)
PropertyResult check_mobius_roundtrip(const PotentialTable& table, const QKernelContext& ctx,
                                      const NormalizingMeasure& alpha, double tol = 1e-11);

// |int alpha(d eta~_{D\L}) E_D(eta_L eta~_{D\L}) - E_L(eta_L)|
double check_martingale(const QKernelContext& ctx, const SiteSet& lambda, const SiteSet& delta,
                        std::span<const int> eta_lambda, const NormalizingMeasure& alpha);

// sum_{A subset Delta, A n Lambda != 0} U_A(eta); masks relative to the table window.
double partial_sum(const PotentialTable& table, std::uint64_t lambda, std::uint64_t delta,
                   std::span<const int> eta_window);

// int alpha(d eta~) log Q_Lambda(eta_Lambda, eta~_Lambda | eta_{Delta\Lambda} eta~_rest),
// eta a box configuration.
double partial_sum_direct(const QKernelContext& ctx, const SiteSet& lambda, const SiteSet& delta,
                          std::span<const int> eta_box, const NormalizingMeasure& alpha);

// Free-energy part of the conditional weight as a function of the box disorder.
using FreeEnergySum = std::function<double(std::span<const int> eta_box)>;

// exp(-sum U^ann - fe(eta~_Lambda eta_rest)) normalised over xi_Lambda.
ConditionalTable reconstruct_conditional(const QKernelContext& ctx, const FreeEnergySum& fe,
                                         const SiteSet& lambda, const JointState& xi,
                                         std::size_t max_sites = 4);
// fe = partial_sum of the table over subsets of Delta meeting Lambda.
ConditionalTable reconstruct_conditional(const QKernelContext& ctx, const PotentialTable& table,
                                         const SiteSet& lambda, const SiteSet& delta,
                                         const JointState& xi, std::size_t max_sites = 4);

// Single-site terms, lexicographic along Lambda:
// log Q_x(eta_x, hat_x | eta_{Lambda<x} hat_{Lambda>x} eta_{Delta\Lambda} hat_rest).
std::vector<double> telescope_logq(const QKernelContext& ctx, const SiteSet& lambda,
                                   std::span<const int> eta_box, std::span<const int> hat_box,
                                   const SiteSet& delta);

struct EpsilonRow {
    int r = 0;
    double epsilon = 0.0;
    double stderr_ = 0.0;
    double diff_prev = 0.0;         // epsilon(r) - epsilon(r_prev), paired samples
    double diff_prev_stderr = 0.0;
    std::size_t samples = 0;
    bool flagged = false;
};

struct ConvergenceDiagnostic {
    Site x;
    std::vector<EpsilonRow> rows;
};

struct EpsilonOptions {
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    std::size_t batches = 20;
    std::size_t inner_exact_bits = 16;
    std::size_t inner_samples = 256;
    int eta_x = -1;  // fix eta_x to this value when >= 0
};

// eps_x(r) = int IP(d eta) | F_r(eta) - F_full(eta) |, F_r keeping eta on the
// l-infinity ball of radius r around x (x excluded) and averaging the rest,
// F_full keeping eta everywhere off x. Spiral order centred at x.
ConvergenceDiagnostic epsilon_diagnostic(const QKernelContext& ctx, const Site& x,
                                         const std::vector<int>& radii,
                                         const EpsilonOptions& opt = {});

}  // namespace wg
