#pragma once

#include <memory>
#include <unordered_map>
#include <span>
#include <vector>

#include "wg/lattice.hpp"
#include "wg/model.hpp"

namespace wg {

// Indices into the disorder alphabet, one per box site (box order).
using DisorderConfig = std::vector<int>;
// Indices into the spin alphabet, one per box site (box order).
using SpinConfig = std::vector<int>;

struct TermInstance {
    int shape;
    std::vector<int> sites;  // layout indices, in shape offset order
};

// Box sites (indices 0..n-1, lexicographic) followed by the collar sites that
// carry a boundary spin, plus every term instance the finite-volume
// Hamiltonian keeps: A meets the box and every site of A outside the box has
// a boundary spin.
class Layout {
public:
    Layout(ModelPtr spec, Box box, BoundaryCondition bc);

    const ModelSpec& spec() const { return *spec_; }
    const ModelPtr& spec_ptr() const { return spec_; }
    const Box& box() const { return box_; }
    const BoundaryCondition& bc() const { return bc_; }

    std::size_t box_size() const { return n_box_; }
    std::size_t site_count() const { return sites_.size(); }
    const Site& site(std::size_t i) const { return sites_[i]; }
    std::optional<std::size_t> index(const Site& s) const;
    std::size_t box_index(const Site& s) const;  // DomainError outside the box
    std::vector<std::size_t> box_indices(const SiteSet& a) const;

    const std::vector<TermInstance>& instances() const { return instances_; }
    // instances containing box site i
    const std::vector<int>& instances_at(std::size_t i) const { return by_site_[i]; }

    int collar_spin(std::size_t i) const { return collar_spin_[i - n_box_]; }
    int collar_disorder(std::size_t i) const { return collar_disorder_[i - n_box_]; }

    // Extend box configurations with the collar values.
    std::vector<int> full_spins(std::span<const int> box_spins) const;
    std::vector<int> full_disorder(std::span<const int> box_eta) const;

    // Energy of one instance given full spin/disorder arrays.
    double instance_energy(const TermInstance& t, std::span<const int> spins,
                           std::span<const int> eta) const;

    // Instances meeting a set of box indices (deduplicated, ascending).
    std::vector<int> instances_meeting(std::span<const std::size_t> box_idx) const;

private:
    ModelPtr spec_;
    Box box_;
    BoundaryCondition bc_;
    std::size_t n_box_ = 0;
    std::vector<Site> sites_;
    std::vector<int> collar_spin_;
    std::vector<int> collar_disorder_;
    std::vector<TermInstance> instances_;
    std::vector<std::vector<int>> by_site_;
    std::unordered_map<Site, std::size_t, SiteHash> collar_index_;
};

using LayoutPtr = std::shared_ptr<const Layout>;

}  // namespace wg
