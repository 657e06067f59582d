#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "wg/layout.hpp"

namespace wg {

// Positive real stored by its logarithm.
struct LogReal {
    double log = -std::numeric_limits<double>::infinity();
    double value() const { return std::exp(log); }
};

// Streaming log-sum-exp: tracks a running maximum and a rescaled sum.
class LogSumExp {
public:
    void add(double log_term) {
        if (log_term == -std::numeric_limits<double>::infinity()) return;
        if (log_term <= max_) {
            sum_ += std::exp(log_term - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            max_ = log_term;
        }
    }
    // add exp(shift) * scaled, where scaled >= 0
    void add_scaled(double shift, double scaled) {
        if (!(scaled > 0.0)) return;
        add(shift + std::log(scaled));
    }
    void merge(const LogSumExp& o) {
        if (o.sum_ > 0.0) add_scaled(o.max_, o.sum_);
    }
    double value() const {
        return sum_ > 0.0 ? max_ + std::log(sum_) : -std::numeric_limits<double>::infinity();
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

// A spin Hamiltonian bound to a fixed disorder configuration: a constant plus
// local tables over the box spins. Table index = sum_k spin[vars[k]] * radix^k.
struct BoundTerm {
    std::vector<int> vars;  // ascending box indices
    std::vector<double> table;
};

struct EnergyModel {
    int n = 0;
    int radix = 2;
    double constant = 0.0;
    std::vector<BoundTerm> terms;

    double energy(std::span<const int> spins) const;
    // Adds f into the term over `vars` (merging with an existing one).
    void accumulate(std::vector<int> vars, std::vector<double> table);
    int max_arity() const;
};

// Bind the layout's Hamiltonian to a disorder configuration on the box.
EnergyModel bind_energy(const Layout& layout, std::span<const int> eta_box);

struct QuenchedOptions {
    enum class Method { automatic, enumerate, transfer_matrix };
    Method method = Method::automatic;
    std::size_t enumeration_cap = 22;
    std::size_t tm_max_states = 64;
};

// log sum_sigma exp(-E(sigma)) by Gray-code / blocked enumeration.
double log_partition_enumerate(const EnergyModel& m, std::size_t cap = 22);
// Plain Gray-code walk (reference path for the blocked enumerator).
double log_partition_gray(const EnergyModel& m, std::size_t cap = 22);
// Same through a transfer matrix along the longest box axis.
double log_partition_transfer(const EnergyModel& m, const Box& box, std::size_t max_states = 64);
bool transfer_applicable(const EnergyModel& m, const Box& box, std::size_t max_states = 64);
double log_partition(const EnergyModel& m, const Box& box, const QuenchedOptions& opt = {});

// Visit every configuration with its energy (reflected mixed-radix Gray order).
void for_each_configuration(const EnergyModel& m,
                            const std::function<void(std::span<const int>, double)>& visit,
                            std::size_t cap = 22);

class QuenchedEnsemble {
public:
    QuenchedEnsemble(LayoutPtr layout, DisorderConfig eta, QuenchedOptions opt = {});
    static QuenchedEnsemble make(ModelPtr spec, Box box, BoundaryCondition bc, DisorderConfig eta,
                                 QuenchedOptions opt = {});

    const Layout& layout() const { return *layout_; }
    const LayoutPtr& layout_ptr() const { return layout_; }
    const DisorderConfig& eta() const { return eta_; }
    const EnergyModel& energy_model() const { return model_; }
    const QuenchedOptions& options() const { return opt_; }
    double energy(std::span<const int> spins) const { return model_.energy(spins); }

private:
    LayoutPtr layout_;
    DisorderConfig eta_;
    QuenchedOptions opt_;
    EnergyModel model_;
};

LogReal log_partition(const QuenchedEnsemble& ens);
double gibbs_probability(const QuenchedEnsemble& ens, std::span<const int> sigma);
// Observable receives spin alphabet indices on the box.
double expectation(const QuenchedEnsemble& ens,
                   const std::function<double(std::span<const int>)>& observable);
// Several observables in one pass.
std::vector<double> expectations(
    const QuenchedEnsemble& ens,
    const std::vector<std::function<double(std::span<const int>)>>& observables);
// <sigma_x>; DomainError for a non-Ising spin alphabet.
double magnetization(const QuenchedEnsemble& ens, const Site& x);

}  // namespace wg
