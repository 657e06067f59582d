#include "wg/layout.hpp"

#include <algorithm>

#include "wg/error.hpp"

namespace wg {

Layout::Layout(ModelPtr spec, Box box, BoundaryCondition bc)
    : spec_(std::move(spec)), box_(std::move(box)), bc_(std::move(bc)) {
    if (box_.dim() != spec_->dim()) throw DomainError("box and model dimensions differ");
    n_box_ = box_.size();
    for (std::size_t i = 0; i < n_box_; ++i) sites_.push_back(box_.site_at(i));
    by_site_.resize(n_box_);

    const SiteSet box_sites(sites_);
    for (const TermRef& t : terms_touching(*spec_, box_sites)) {
        TermInstance inst{t.shape, {}};
        bool keep = true;
        for (const Site& s : spec_->shapes()[t.shape].offsets) {
            const Site z = t.anchor + s;
            if (box_.contains(z)) {
                inst.sites.push_back(static_cast<int>(box_.index_of(z)));
                continue;
            }
            auto it = collar_index_.find(z);
            if (it != collar_index_.end()) {
                inst.sites.push_back(static_cast<int>(it->second));
                continue;
            }
            std::optional<int> sp = bc_.spin_at(z);
            if (!sp) {
                keep = false;
                break;
            }
            if (*sp < 0 || *sp >= spec_->spin_radix()) throw DomainError("boundary spin out of range");
            const int dz = bc_.disorder_at(z, *spec_);
            if (dz < 0 || dz >= spec_->disorder_radix()) throw DomainError("boundary disorder out of range");
            const std::size_t idx = sites_.size();
            sites_.push_back(z);
            collar_spin_.push_back(*sp);
            collar_disorder_.push_back(dz);
            collar_index_.emplace(z, idx);
            inst.sites.push_back(static_cast<int>(idx));
        }
        if (!keep) continue;
        const int id = static_cast<int>(instances_.size());
        for (int s : inst.sites)
            if (static_cast<std::size_t>(s) < n_box_) by_site_[s].push_back(id);
        instances_.push_back(std::move(inst));
    }
    for (auto& v : by_site_) v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::optional<std::size_t> Layout::index(const Site& s) const {
    if (box_.contains(s)) return box_.index_of(s);
    auto it = collar_index_.find(s);
    if (it == collar_index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Layout::box_index(const Site& s) const {
    if (!box_.contains(s)) throw DomainError("site " + s.str() + " outside box " + box_.str());
    return box_.index_of(s);
}

std::vector<std::size_t> Layout::box_indices(const SiteSet& a) const {
    std::vector<std::size_t> out;
    out.reserve(a.size());
    for (const Site& s : a) out.push_back(box_index(s));
    return out;
}

std::vector<int> Layout::full_spins(std::span<const int> box_spins) const {
    if (box_spins.size() != n_box_) throw DomainError("spin configuration has wrong length");
    std::vector<int> out(box_spins.begin(), box_spins.end());
    out.insert(out.end(), collar_spin_.begin(), collar_spin_.end());
    return out;
}

std::vector<int> Layout::full_disorder(std::span<const int> box_eta) const {
    if (box_eta.size() != n_box_) throw DomainError("disorder configuration has wrong length");
    std::vector<int> out(box_eta.begin(), box_eta.end());
    out.insert(out.end(), collar_disorder_.begin(), collar_disorder_.end());
    return out;
}

double Layout::instance_energy(const TermInstance& t, std::span<const int> spins,
                               std::span<const int> eta) const {
    int sp[8], dz[8];
    const std::size_t k = t.sites.size();
    if (k > 8) {
        std::vector<int> s(k), d(k);
        for (std::size_t i = 0; i < k; ++i) {
            s[i] = spins[t.sites[i]];
            d[i] = eta[t.sites[i]];
        }
        return spec_->shapes()[t.shape].energy(s, d);
    }
    for (std::size_t i = 0; i < k; ++i) {
        sp[i] = spins[t.sites[i]];
        dz[i] = eta[t.sites[i]];
    }
    return spec_->shapes()[t.shape].energy(std::span<const int>(sp, k), std::span<const int>(dz, k));
}

std::vector<int> Layout::instances_meeting(std::span<const std::size_t> box_idx) const {
    std::vector<int> out;
    for (std::size_t i : box_idx) out.insert(out.end(), by_site_[i].begin(), by_site_[i].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace wg
