#include "gmhf/molecule.h"

#include "gmhf/errors.h"

#include <fmt/format.h>

namespace gmhf {

void MoleculeSpec::validate() const {
  if (nuclei.empty()) throw ValidationError("molecule has no nuclei");
  if (n_orbitals < 1)
    throw ValidationError(fmt::format("orbital count must be positive, got {}", n_orbitals));
  for (std::size_t l = 0; l < nuclei.size(); ++l) {
    const auto &n = nuclei[l];
    if (!std::isfinite(n.charge) || !n.position.allFinite())
      throw ValidationError(fmt::format("nucleus {} has non-finite data", l));
    if (!(n.charge < 0.0))
      throw ValidationError(fmt::format(
          "nucleus {}: nuclear charge must be negative, got {}", l, n.charge));
    for (std::size_t k = 0; k < l; ++k) {
      const double d = (n.position - nuclei[k].position).norm();
      if (d == 0.0)
        throw ValidationError(fmt::format("nuclei {} and {} share a position", k, l));
      if (!(d < max_nuclear_separation))
        throw ValidationError(fmt::format(
            "nuclei {} and {} are {} bohr apart, beyond the supported {}", k, l, d,
            max_nuclear_separation));
    }
  }
}

double MoleculeSpec::nuclear_repulsion() const {
  double e = 0.0;
  for (std::size_t l = 0; l < nuclei.size(); ++l)
    for (std::size_t k = 0; k < l; ++k)
      e += nuclei[l].charge * nuclei[k].charge /
           (nuclei[l].position - nuclei[k].position).norm();
  return e;
}

Vec3 MoleculeSpec::box_min() const {
  Vec3 lo = nuclei.at(0).position;
  for (const auto &n : nuclei) lo = lo.cwiseMin(n.position);
  return lo;
}

Vec3 MoleculeSpec::box_max() const {
  Vec3 hi = nuclei.at(0).position;
  for (const auto &n : nuclei) hi = hi.cwiseMax(n.position);
  return hi;
}

std::size_t MoleculeSpec::nearest_nucleus(const Vec3 &x) const {
  std::size_t best = 0;
  double best_d2 = (x - nuclei.at(0).position).squaredNorm();
  for (std::size_t l = 1; l < nuclei.size(); ++l) {
    const double d2 = (x - nuclei[l].position).squaredNorm();
    if (d2 < best_d2) {
      best = l;
      best_d2 = d2;
    }
  }
  return best;
}

MoleculeSpec heh_cation() {
  return {{{-1.0, Vec3(0.0, 0.0, -0.7)}, {-2.0, Vec3(0.0, 0.0, 0.7)}}, 1};
}

MoleculeSpec lithium_hydride() {
  return {{{-3.0, Vec3(-1.575, 0.0, 0.0)}, {-1.0, Vec3(1.575, 0.0, 0.0)}}, 2};
}

} // namespace gmhf
