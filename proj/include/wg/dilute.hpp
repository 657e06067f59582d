#pragma once

#include <cstdint>

#include "wg/potential_table.hpp"

namespace wg {

// log Z0_C: Ising model with coupling J on the nearest-neighbour bonds inside
// C, every site occupied, free boundary. log Z0 of the empty set is 0.
double dilute_log_z0(double J, const SiteSet& c);

// c_A = sum_{L subset A} (-1)^{|A\L|} log(Z0_L / 2^{|L|}). Computed for any A;
// vanishes for disconnected A.
double dilute_vacuum_coeff(double J, const SiteSet& a, std::size_t cap = 16);

enum class ClusterNormalization {
    counting,  // U = log Z0_C
    per_spin,  // U = log(Z0_C / 2^{|C|})
};

// Cluster potential on a box, local in eta: for each connected C in the box,
// the entry at A = (C u dC) n box (dC the l1 outer boundary) equals the
// normalised log Z0_C when C is occupied and dC empty, 0 otherwise.
PotentialTable cluster_potential(double J, const Box& box,
                                 ClusterNormalization norm = ClusterNormalization::per_spin,
                                 std::size_t max_box = 16);

// Same, evaluated at one disorder configuration (fixed table): one entry
// per occupied component. eta_box holds occupations 0/1 in box order.
PotentialTable cluster_potential(double J, const Box& box, std::span<const int> eta_box,
                                 ClusterNormalization norm = ClusterNormalization::per_spin);

}  // namespace wg
