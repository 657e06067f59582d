#include "wg/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "wg/error.hpp"

namespace wg {

namespace {

void check_measure(const std::vector<double>& nu, std::size_t n, const std::string& what) {
    if (n == 0) throw DomainError(what + ": empty alphabet");
    if (nu.size() != n) throw DomainError(what + ": weight count does not match alphabet");
    double s = 0.0;
    for (double w : nu) {
        if (!(w > 0.0)) throw DomainError(what + ": weights must be strictly positive");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw DomainError(what + ": weights must sum to 1");
}

}  // namespace

ModelSpec::ModelSpec(ModelParams p) : p_(std::move(p)) {
    if (p_.dim < 1 || p_.dim > kMaxDim) throw DomainError("model dimension out of range");
    if (p_.spin_values.empty()) throw DomainError("empty spin alphabet");
    check_measure(p_.nu, p_.disorder_values.size(), "disorder measure");
    if (p_.collar_disorder < 0 || p_.collar_disorder >= disorder_radix())
        throw DomainError("collar disorder index out of range");
    for (const TermShape& s : p_.shapes) {
        if (s.offsets.empty() || s.offsets.size() != s.uses_disorder.size() || !s.energy)
            throw DomainError("malformed term shape '" + s.name + "'");
        if (!(s.offsets[0] == Site::origin(p_.dim)))
            throw DomainError("shape '" + s.name + "' must start at the origin");
        for (std::size_t k = 1; k < s.offsets.size(); ++k)
            if (!(s.offsets[k - 1] < s.offsets[k]))
                throw DomainError("shape '" + s.name + "' offsets must be strictly increasing");
        range_ = std::max(range_, SiteSet(s.offsets).diameter());
    }
}

bool ModelSpec::disorder_dependent() const {
    for (const TermShape& s : p_.shapes)
        for (bool u : s.uses_disorder)
            if (u) return true;
    return false;
}

int ModelSpec::plus_spin() const {
    return static_cast<int>(std::max_element(p_.spin_values.begin(), p_.spin_values.end()) -
                            p_.spin_values.begin());
}

int ModelSpec::minus_spin() const {
    return static_cast<int>(std::min_element(p_.spin_values.begin(), p_.spin_values.end()) -
                            p_.spin_values.begin());
}

bool ModelSpec::is_ising() const {
    std::vector<int> v = p_.spin_values;
    std::sort(v.begin(), v.end());
    return v == std::vector<int>{-1, 1};
}

std::vector<int> ModelSpec::shapes_matching(const SiteSet& a) const {
    std::vector<int> out;
    if (a.empty()) return out;
    const Site anchor = a[0];
    for (std::size_t i = 0; i < p_.shapes.size(); ++i) {
        const auto& off = p_.shapes[i].offsets;
        if (off.size() != a.size()) continue;
        bool ok = true;
        for (std::size_t k = 0; k < off.size() && ok; ++k) ok = (a[k] - anchor) == off[k];
        if (ok) out.push_back(static_cast<int>(i));
    }
    return out;
}

// ---- JointConfig ----

int JointConfig::spin(const Site& s) const {
    auto it = sigma.find(s);
    if (it == sigma.end()) throw DomainError("missing spin at " + s.str());
    return it->second;
}

int JointConfig::disorder(const Site& s) const {
    auto it = eta.find(s);
    if (it == eta.end()) throw DomainError("missing disorder at " + s.str());
    return it->second;
}

SiteSet JointConfig::region() const {
    std::vector<Site> v;
    for (const auto& [s, val] : sigma) v.push_back(s);
    for (const auto& [s, val] : eta) v.push_back(s);
    return SiteSet(std::move(v));
}

namespace {

double eval_shape(const ModelSpec& spec, const TermShape& sh, const Site& anchor,
                  const JointConfig& xi, const std::unordered_map<Site, int, SiteHash>* eta_override) {
    std::vector<int> sp(sh.offsets.size()), dz(sh.offsets.size(), 0);
    for (std::size_t k = 0; k < sh.offsets.size(); ++k) {
        const Site s = anchor + sh.offsets[k];
        sp[k] = xi.spin(s);
        if (sh.uses_disorder[k]) {
            if (eta_override) {
                auto it = eta_override->find(s);
                dz[k] = it != eta_override->end() ? it->second : xi.disorder(s);
            } else {
                dz[k] = xi.disorder(s);
            }
            if (dz[k] < 0 || dz[k] >= spec.disorder_radix()) throw DomainError("disorder index out of range");
        }
        if (sp[k] < 0 || sp[k] >= spec.spin_radix()) throw DomainError("spin index out of range");
    }
    return sh.energy(sp, dz);
}

}  // namespace

double phi(const ModelSpec& spec, const SiteSet& a, const JointConfig& xi) {
    double e = 0.0;
    for (int i : spec.shapes_matching(a)) e += eval_shape(spec, spec.shapes()[i], a[0], xi, nullptr);
    return e;
}

std::vector<TermRef> terms_touching(const ModelSpec& spec, const SiteSet& v) {
    std::set<std::pair<int, Site>> seen;
    std::vector<TermRef> out;
    for (const Site& x : v) {
        for (std::size_t i = 0; i < spec.shapes().size(); ++i) {
            const auto& sh = spec.shapes()[i];
            for (const Site& off : sh.offsets) {
                Site anchor = x - off;
                if (!seen.insert({static_cast<int>(i), anchor}).second) continue;
                std::vector<Site> sites;
                for (const Site& o : sh.offsets) sites.push_back(anchor + o);
                out.push_back({static_cast<int>(i), anchor, SiteSet(std::move(sites))});
            }
        }
    }
    return out;
}

double AnnealedPotential::value(const SiteSet& a, const JointConfig& xi) const {
    double u = phi(*spec_, a, xi);
    if (a.size() == 1) {
        const int e = xi.disorder(a[0]);
        const double w = spec_->nu().at(static_cast<std::size_t>(e));
        if (!(w > 0.0)) throw DomainError("zero disorder weight at " + a[0].str());
        u -= std::log(w);
    }
    return u;
}

AnnealedPotential annealed_potential(std::shared_ptr<const ModelSpec> spec) {
    return AnnealedPotential(std::move(spec));
}

double delta_H(const ModelSpec& spec, const SiteSet& v, const JointConfig& xi,
               std::span<const int> eta1, std::span<const int> eta2) {
    if (eta1.size() != v.size() || eta2.size() != v.size())
        throw DomainError("delta_H: disorder on V has wrong length");
    std::unordered_map<Site, int, SiteHash> e1, e2;
    for (std::size_t k = 0; k < v.size(); ++k) {
        e1[v[k]] = eta1[k];
        e2[v[k]] = eta2[k];
    }
    double d = 0.0;
    for (const TermRef& t : terms_touching(spec, v)) {
        const TermShape& sh = spec.shapes()[t.shape];
        d += eval_shape(spec, sh, t.anchor, xi, &e1) - eval_shape(spec, sh, t.anchor, xi, &e2);
    }
    return d;
}

// ---- boundary conditions ----

BoundaryCondition BoundaryCondition::free_bc() { return {}; }

BoundaryCondition BoundaryCondition::uniform(int spin_index) {
    BoundaryCondition b;
    b.uniform_spin = spin_index;
    return b;
}

std::optional<int> BoundaryCondition::spin_at(const Site& s) const {
    auto it = spins.find(s);
    if (it != spins.end()) return it->second;
    return uniform_spin;
}

int BoundaryCondition::disorder_at(const Site& s, const ModelSpec& spec) const {
    auto it = disorder.find(s);
    if (it != disorder.end()) return it->second;
    return uniform_disorder.value_or(spec.collar_disorder());
}

std::string BoundaryCondition::label(const ModelSpec& spec) const {
    if (!spins.empty()) return "mixed";
    if (!uniform_spin) return "free";
    if (*uniform_spin == spec.plus_spin()) return "plus";
    if (*uniform_spin == spec.minus_spin()) return "minus";
    return "uniform:" + std::to_string(*uniform_spin);
}

BoundaryCondition default_boundary(const ModelSpec& spec) {
    return spec.ferromagnetic() ? BoundaryCondition::uniform(spec.plus_spin())
                                : BoundaryCondition::free_bc();
}

// ---- built-ins ----

namespace {

std::vector<TermShape> nn_pairs(int dim, const std::string& prefix, bool disorder_at_anchor,
                                bool disorder_at_both,
                                const std::function<TermEnergy(int axis)>& make) {
    std::vector<TermShape> out;
    for (int ax = dim - 1; ax >= 0; --ax) {
        TermShape t;
        t.name = prefix + std::to_string(ax);
        t.offsets = {Site::origin(dim), Site::unit(dim, ax)};
        t.uses_disorder = {disorder_at_anchor || disorder_at_both, disorder_at_both};
        t.energy = make(ax);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

ModelSpec make_rfim(double J, double h, std::vector<double> fields, std::vector<double> nu, int dim) {
    if (fields.empty()) throw DomainError("rfim: empty field alphabet");
    check_measure(nu, fields.size(), "rfim");
    ModelParams p;
    p.name = "rfim";
    p.dim = dim;
    p.spin_values = {-1, 1};
    for (double f : fields) p.disorder_values.push_back({{f}});
    p.nu = nu;
    const std::vector<int> sv = p.spin_values;
    TermShape site;
    site.name = "field";
    site.offsets = {Site::origin(dim)};
    site.uses_disorder = {true};
    site.energy = [h, fields, sv](std::span<const int> s, std::span<const int> e) {
        return -h * fields[e[0]] * sv[s[0]];
    };
    p.shapes.push_back(site);
    for (auto& t : nn_pairs(dim, "bond", false, false, [J, sv](int) {
             return [J, sv](std::span<const int> s, std::span<const int>) {
                 return -J * sv[s[0]] * sv[s[1]];
             };
         }))
        p.shapes.push_back(std::move(t));
    p.ferromagnetic = J >= 0.0;
    p.description = nlohmann::json{{"model", "rfim"}, {"dim", dim},      {"J", J},
                                   {"h", h},          {"fields", fields}, {"weights", nu}}
                        .dump();
    return ModelSpec(std::move(p));
}

ModelSpec make_random_bond(std::vector<CouplingLaw> laws) {
    if (laws.empty() || laws.size() > static_cast<std::size_t>(kMaxDim))
        throw DomainError("random_bond: need one coupling law per direction");
    const int dim = static_cast<int>(laws.size());
    for (const auto& l : laws) check_measure(l.weights, l.values.size(), "random_bond");

    ModelParams p;
    p.name = "random_bond";
    p.dim = dim;
    p.spin_values = {-1, 1};
    // disorder index = sum_e digit_e * stride_e, stride_0 = 1
    std::vector<int> stride(dim, 1);
    int total = 1;
    for (int e = 0; e < dim; ++e) {
        stride[e] = total;
        total *= static_cast<int>(laws[e].values.size());
    }
    for (int idx = 0; idx < total; ++idx) {
        DisorderValue v;
        double w = 1.0;
        for (int e = 0; e < dim; ++e) {
            int d = idx / stride[e] % static_cast<int>(laws[e].values.size());
            v.components.push_back(laws[e].values[d]);
            w *= laws[e].weights[d];
        }
        p.disorder_values.push_back(std::move(v));
        p.nu.push_back(w);
    }
    const std::vector<DisorderValue> dv = p.disorder_values;
    const std::vector<int> sv = p.spin_values;
    for (auto& t : nn_pairs(dim, "bond", true, false, [dv, sv](int ax) {
             return [dv, sv, ax](std::span<const int> s, std::span<const int> e) {
                 return -dv[e[0]].components[ax] * sv[s[0]] * sv[s[1]];
             };
         }))
        p.shapes.push_back(std::move(t));
    bool ferro = true;
    for (const auto& l : laws)
        for (double v : l.values) ferro = ferro && v > 0.0;
    p.ferromagnetic = ferro;
    nlohmann::json jl = nlohmann::json::array();
    for (const auto& l : laws) jl.push_back({{"values", l.values}, {"weights", l.weights}});
    p.description = nlohmann::json{{"model", "random_bond"}, {"dim", dim}, {"laws", jl}}.dump();
    return ModelSpec(std::move(p));
}

ModelSpec make_dilute(double J, double p_occ, int dim) {
    if (!(p_occ > 0.0 && p_occ < 1.0)) throw DomainError("dilute: p must lie in (0,1)");
    ModelParams p;
    p.name = "dilute";
    p.dim = dim;
    p.spin_values = {-1, 1};
    p.disorder_values = {{{0.0}}, {{1.0}}};
    p.nu = {1.0 - p_occ, p_occ};
    const std::vector<int> sv = p.spin_values;
    for (auto& t : nn_pairs(dim, "bond", true, true, [J, sv](int) {
             return [J, sv](std::span<const int> s, std::span<const int> e) {
                 return -J * e[0] * sv[s[0]] * e[1] * sv[s[1]];
             };
         }))
        p.shapes.push_back(std::move(t));
    p.ferromagnetic = false;  // open boundary by default
    p.collar_disorder = 1;
    p.description = nlohmann::json{{"model", "dilute"}, {"dim", dim}, {"J", J}, {"p", p_occ}}.dump();
    return ModelSpec(std::move(p));
}

ModelSpec make_free_model(int dim, int disorder_states) {
    ModelParams p;
    p.name = "free";
    p.dim = dim;
    p.spin_values = {-1, 1};
    for (int i = 0; i < disorder_states; ++i) {
        p.disorder_values.push_back({{static_cast<double>(i)}});
        p.nu.push_back(1.0 / disorder_states);
    }
    p.description = nlohmann::json{{"model", "free"}, {"dim", dim}}.dump();
    return ModelSpec(std::move(p));
}

}  // namespace wg
