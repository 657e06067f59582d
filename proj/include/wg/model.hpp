#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wg/lattice.hpp"

namespace wg {

// One element of the disorder alphabet H0. Built-ins use a single component
// (field, occupation); random-bond models carry one coupling per direction.
struct DisorderValue {
    std::vector<double> components;
    double scalar() const { return components.empty() ? 0.0 : components[0]; }
};

// Energy of one term instance. spins[k] / disorder[k] are alphabet indices at
// the k-th site of the term (anchor-relative offsets, lexicographic).
using TermEnergy = std::function<double(std::span<const int> spins, std::span<const int> disorder)>;

struct TermShape {
    std::string name;
    std::vector<Site> offsets;        // offsets[0] is the origin; sorted
    std::vector<bool> uses_disorder;  // per offset
    TermEnergy energy;
};

struct ModelParams {
    std::string name;
    int dim = 1;
    std::vector<int> spin_values;
    std::vector<DisorderValue> disorder_values;
    std::vector<double> nu;
    std::vector<TermShape> shapes;
    bool ferromagnetic = false;          // default bc: plus if true, free otherwise
    int collar_disorder = 0;             // disorder index assumed outside the box
    std::string description;             // JSON text of the parameters (for manifests)
};

class ModelSpec {
public:
    explicit ModelSpec(ModelParams p);

    const std::string& name() const { return p_.name; }
    int dim() const { return p_.dim; }
    const std::vector<int>& spin_values() const { return p_.spin_values; }
    const std::vector<DisorderValue>& disorder_values() const { return p_.disorder_values; }
    const std::vector<double>& nu() const { return p_.nu; }
    const std::vector<TermShape>& shapes() const { return p_.shapes; }
    int spin_radix() const { return static_cast<int>(p_.spin_values.size()); }
    int disorder_radix() const { return static_cast<int>(p_.disorder_values.size()); }
    int range() const { return range_; }
    bool ferromagnetic() const { return p_.ferromagnetic; }
    int collar_disorder() const { return p_.collar_disorder; }
    const std::string& description() const { return p_.description; }
    const ModelParams& params() const { return p_; }

    bool disorder_dependent() const;
    int plus_spin() const;   // index of the largest spin value
    int minus_spin() const;  // index of the smallest spin value
    bool is_ising() const;   // spin alphabet {-1, +1}

    // Shapes whose support, translated to anchor A[0], equals A.
    std::vector<int> shapes_matching(const SiteSet& a) const;

private:
    ModelParams p_;
    int range_ = 0;
};

// xi = (sigma, eta), both as alphabet indices.
struct JointConfig {
    std::unordered_map<Site, int, SiteHash> sigma;
    std::unordered_map<Site, int, SiteHash> eta;

    int spin(const Site& s) const;      // DomainError when missing
    int disorder(const Site& s) const;  // DomainError when missing
    SiteSet region() const;
};

// Phi_A(xi_A); zero when no shape matches A.
double phi(const ModelSpec& spec, const SiteSet& a, const JointConfig& xi);

struct TermRef {
    int shape;
    Site anchor;
    SiteSet sites;
};

// Term instances A (one per shape and anchor) with A n V != empty.
std::vector<TermRef> terms_touching(const ModelSpec& spec, const SiteSet& v);

// U^ann_A = Phi_A - 1{A={x}} log nu(eta_x)
class AnnealedPotential {
public:
    explicit AnnealedPotential(std::shared_ptr<const ModelSpec> spec) : spec_(std::move(spec)) {}
    double value(const SiteSet& a, const JointConfig& xi) const;
    const ModelSpec& spec() const { return *spec_; }

private:
    std::shared_ptr<const ModelSpec> spec_;
};

AnnealedPotential annealed_potential(std::shared_ptr<const ModelSpec> spec);

// V-variation of the Hamiltonian. xi must hold sigma on the r-neighborhood of V
// and eta on its boundary; eta1/eta2 give the disorder on V (V's canonical order).
double delta_H(const ModelSpec& spec, const SiteSet& v, const JointConfig& xi,
               std::span<const int> eta1, std::span<const int> eta2);

// ---- built-in models ----

ModelSpec make_rfim(double J, double h, std::vector<double> fields, std::vector<double> nu,
                    int dim = 2);

struct CouplingLaw {
    std::vector<double> values;
    std::vector<double> weights;
};

// One law per lattice direction; dim = laws.size().
ModelSpec make_random_bond(std::vector<CouplingLaw> laws);

ModelSpec make_dilute(double J, double p, int dim = 2);

// Phi = 0 with the given disorder alphabet size (uniform nu).
ModelSpec make_free_model(int dim, int disorder_states = 2);

using ModelPtr = std::shared_ptr<const ModelSpec>;

// Spins and disorder outside the working box. A collar site with no spin
// (neither explicit nor uniform) is absent: terms touching it are dropped.
struct BoundaryCondition {
    std::unordered_map<Site, int, SiteHash> spins;
    std::optional<int> uniform_spin;
    std::unordered_map<Site, int, SiteHash> disorder;
    std::optional<int> uniform_disorder;

    static BoundaryCondition free_bc();
    static BoundaryCondition uniform(int spin_index);

    std::optional<int> spin_at(const Site& s) const;
    int disorder_at(const Site& s, const ModelSpec& spec) const;
    std::string label(const ModelSpec& spec) const;
};

// plus for ferromagnetic models, free otherwise
BoundaryCondition default_boundary(const ModelSpec& spec);

inline ModelPtr share(ModelSpec s) { return std::make_shared<const ModelSpec>(std::move(s)); }

}  // namespace wg
