#pragma once

#include "gmhf/gaussian.h"

#include <vector>

namespace gmhf {

/// A nucleus with charge Z < 0 (electrons carry +1 in this convention, so
/// the external potential sum_l Z_l / |r - R_l| is attractive).
struct Nucleus {
  double charge;
  Vec3 position;
};

struct MoleculeSpec {
  std::vector<Nucleus> nuclei;
  int n_orbitals = 1;

  /// Throws ValidationError unless there is at least one nucleus, every
  /// charge is negative, positions are finite and distinct, the orbital count
  /// is positive and all separations are below the kernel validity range.
  void validate() const;

  /// sum_{l<k} Z_l Z_k / |R_l - R_k|
  double nuclear_repulsion() const;

  Vec3 box_min() const;
  Vec3 box_max() const;

  /// Index of the nucleus closest to x; ties go to the lowest index.
  std::size_t nearest_nucleus(const Vec3 &x) const;
};

/// Largest separation allowed between nuclei, well inside the range on which
/// the kernel expansions are certified.
inline constexpr double max_nuclear_separation = 1e4;

/// HeH+ at bond length 1.4 bohr along z, one doubly occupied orbital.
MoleculeSpec heh_cation();

/// LiH at bond length 3.15 bohr along x, two doubly occupied orbitals.
MoleculeSpec lithium_hydride();

} // namespace gmhf
