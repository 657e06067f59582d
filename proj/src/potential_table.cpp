#include "wg/potential_table.hpp"

#include <bit>
#include <cmath>

#include "wg/error.hpp"
#include "wg/simd/kernels.hpp"

namespace wg {

NormalizingMeasure NormalizingMeasure::product() { return {}; }

NormalizingMeasure NormalizingMeasure::product(std::vector<std::vector<double>> per_site) {
    NormalizingMeasure a;
    a.weights = std::move(per_site);
    return a;
}

NormalizingMeasure NormalizingMeasure::point_mass(std::vector<int> vacuum) {
    NormalizingMeasure a;
    a.kind = Kind::point_mass;
    a.vacuum = std::move(vacuum);
    return a;
}

std::vector<double> NormalizingMeasure::site_weights(std::size_t i, const ModelSpec& spec) const {
    if (kind == Kind::point_mass) {
        if (i >= vacuum.size()) throw DomainError("vacuum configuration does not cover the box");
        std::vector<double> w(spec.disorder_radix(), 0.0);
        w.at(vacuum[i]) = 1.0;
        return w;
    }
    if (weights.empty()) return spec.nu();
    if (i >= weights.size()) throw DomainError("product measure does not cover the box");
    return weights[i];
}

void NormalizingMeasure::validate(std::size_t box_size, const ModelSpec& spec) const {
    if (kind == Kind::point_mass) {
        if (vacuum.size() != box_size) throw DomainError("vacuum configuration must cover the box");
        for (int v : vacuum)
            if (v < 0 || v >= spec.disorder_radix()) throw DomainError("vacuum value out of range");
        return;
    }
    if (weights.empty()) return;
    if (weights.size() != box_size) throw DomainError("product measure must cover the box");
    for (const auto& w : weights) {
        if (w.size() != static_cast<std::size_t>(spec.disorder_radix()))
            throw DomainError("product measure weights have wrong length");
        double s = 0.0;
        for (double x : w) {
            if (!(x > 0.0)) throw DomainError("product measure weights must be positive");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-9) throw DomainError("product measure weights must sum to 1");
    }
}

std::string to_string(CoeffForm f) {
    switch (f) {
        case CoeffForm::tabulated: return "tabulated";
        case CoeffForm::vacuum_product: return "vacuum_product";
        case CoeffForm::centered_product: return "centered_product";
        case CoeffForm::shifted_product: return "shifted_product";
    }
    return "?";
}

PotentialTable::PotentialTable(Window window, int radix, std::string alpha, Kind kind)
    : window_(std::move(window)), radix_(radix), alpha_(std::move(alpha)), kind_(kind) {
    if (radix_ < 1) throw DomainError("potential table radix must be positive");
}

void PotentialTable::set(std::uint64_t mask, PotentialEntry e) {
    if (mask & ~window_.full_mask()) throw DomainError("potential entry outside the window");
    entries_[mask] = std::move(e);
}

void PotentialTable::add(std::uint64_t mask, std::span<const double> values) {
    auto it = entries_.find(mask);
    if (it == entries_.end()) {
        set(mask, PotentialEntry{{values.begin(), values.end()}, {}, CoeffForm::tabulated, 0.0});
        return;
    }
    if (it->second.values.size() != values.size()) throw DomainError("entry shape mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) it->second.values[i] += values[i];
    it->second.form = CoeffForm::tabulated;
}

const PotentialEntry* PotentialTable::find(std::uint64_t mask) const {
    auto it = entries_.find(mask);
    return it == entries_.end() ? nullptr : &it->second;
}

PotentialEntry* PotentialTable::find(std::uint64_t mask) {
    auto it = entries_.find(mask);
    return it == entries_.end() ? nullptr : &it->second;
}

std::size_t PotentialTable::local_code(std::uint64_t mask, std::span<const int> eta_window) const {
    if (!local()) return 0;
    std::size_t c = 0, mul = 1;
    for (std::uint64_t m = mask; m; m &= m - 1) {
        const int i = std::countr_zero(m);
        c += static_cast<std::size_t>(eta_window[i]) * mul;
        mul *= static_cast<std::size_t>(radix_);
    }
    return c;
}

double PotentialTable::value(std::uint64_t mask, std::span<const int> eta_window) const {
    const PotentialEntry* e = find(mask);
    if (!e) return 0.0;
    return e->values[local_code(mask, eta_window)];
}

std::size_t PotentialTable::support_size(double tol) const {
    std::size_t n = 0;
    for (const auto& [m, e] : entries_)
        for (double v : e.values)
            if (std::abs(v) > tol) {
                ++n;
                break;
            }
    return n;
}

void PotentialTable::prune(double tol) {
    for (auto it = entries_.begin(); it != entries_.end();) {
        bool keep = false;
        for (double v : it->second.values) keep = keep || std::abs(v) > tol;
        it = keep ? std::next(it) : entries_.erase(it);
    }
}

PotentialTable mobius_potential(const Window& window, const std::function<double(std::uint64_t)>& energy,
                                std::size_t cap) {
    if (window.size() > cap) throw CapExceeded("mobius window", window.size(), cap);
    const std::size_t total = std::size_t{1} << window.size();
    std::vector<double> f(total);
    for (std::size_t m = 0; m < total; ++m) f[m] = energy(m);
    simd::subset_mobius(f.data(), static_cast<unsigned>(window.size()));
    PotentialTable t(window, 1, "fixed", PotentialTable::Kind::fixed);
    for (std::size_t m = 1; m < total; ++m) t.set(m, PotentialEntry{{f[m]}, {}, CoeffForm::tabulated, 0.0});
    return t;
}

std::vector<double> subset_sums(const PotentialTable& t) {
    if (t.local()) throw DomainError("subset_sums needs a fixed table");
    const std::size_t total = std::size_t{1} << t.window().size();
    std::vector<double> f(total, 0.0);
    for (const auto& [m, e] : t.entries()) f[m] = e.values[0];
    simd::subset_zeta(f.data(), static_cast<unsigned>(t.window().size()));
    return f;
}

PotentialTable center_potential(const PotentialTable& table) {
    if (!table.local()) throw DomainError("centring needs a table local in eta");
    if (table.nu.size() != static_cast<std::size_t>(table.radix()))
        throw DomainError("centring needs the single-site measure");
    PotentialTable out = table;
    for (const auto& [mask, e] : table.entries()) {
        const int k = std::popcount(mask);
        double mean = 0.0;
        for (std::size_t c = 0; c < e.values.size(); ++c) {
            double w = 1.0;
            std::size_t r = c;
            for (int i = 0; i < k; ++i, r /= table.radix()) w *= table.nu[r % table.radix()];
            mean += w * e.values[c];
        }
        PotentialEntry ne = e;
        for (double& v : ne.values) v -= mean;
        if (e.form == CoeffForm::vacuum_product) ne.form = CoeffForm::shifted_product;
        out.set(mask, std::move(ne));
    }
    out.prune(0.0);
    return out;
}

namespace {

double form_basis(CoeffForm f, const PotentialTable& t, int k, std::size_t code, double p) {
    double prod = 1.0, cprod = 1.0;
    for (int i = 0; i < k; ++i, code /= t.radix()) {
        const double s = t.scalar_values[code % t.radix()];
        prod *= s;
        cprod *= s - p;
    }
    switch (f) {
        case CoeffForm::vacuum_product: return prod;
        case CoeffForm::centered_product: return cprod;
        case CoeffForm::shifted_product: return prod - std::pow(p, k);
        default: return 0.0;
    }
}

}  // namespace

void annotate_forms(PotentialTable& table, double tol) {
    if (!table.local() || table.scalar_values.size() != static_cast<std::size_t>(table.radix())) return;
    double p = 0.0;
    if (table.nu.size() == table.scalar_values.size())
        for (std::size_t v = 0; v < table.nu.size(); ++v) p += table.nu[v] * table.scalar_values[v];
    for (const auto& [mask, e0] : table.entries()) {
        PotentialEntry* e = table.find(mask);
        const int k = std::popcount(mask);
        for (CoeffForm f : {CoeffForm::vacuum_product, CoeffForm::centered_product,
                            CoeffForm::shifted_product}) {
            std::size_t best = 0;
            double bmax = 0.0;
            for (std::size_t c = 0; c < e->values.size(); ++c) {
                const double b = std::abs(form_basis(f, table, k, c, p));
                if (b > bmax) {
                    bmax = b;
                    best = c;
                }
            }
            if (bmax == 0.0) continue;
            const double coeff = e->values[best] / form_basis(f, table, k, best, p);
            bool ok = true;
            for (std::size_t c = 0; c < e->values.size() && ok; ++c)
                ok = std::abs(e->values[c] - coeff * form_basis(f, table, k, c, p)) <= tol;
            if (ok) {
                e->form = f;
                e->coeff = coeff;
                break;
            }
        }
    }
}

nlohmann::json to_json(const PotentialTable& table) {
    nlohmann::json win = nlohmann::json::array();
    for (const Site& s : table.window().sites()) win.push_back(s.coords());
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [mask, e] : table.entries()) {
        nlohmann::json sites = nlohmann::json::array();
        for (const Site& s : table.window().set_of(mask)) sites.push_back(s.coords());
        nlohmann::json j{{"sites", sites}};
        if (e.form != CoeffForm::tabulated) {
            j["coeff_form"] = to_string(e.form);
            j["coeff"] = e.coeff;
        }
        if (table.local())
            j["values"] = e.values;
        else
            j["value"] = e.values[0];
        if (!e.stderrs.empty()) j["stderr"] = e.stderrs;
        entries.push_back(std::move(j));
    }
    return {{"window", win},
            {"alpha", table.alpha()},
            {"radix", table.radix()},
            {"kind", table.local() ? "local" : "fixed"},
            {"entries", entries}};
}

}  // namespace wg
