#include "gmhf/operators.h"

#include "gmhf/errors.h"

#include <fmt/format.h>
#include <numbers>

namespace gmhf {

std::size_t count_outside_box(std::span<const GaussianAtom> atoms,
                              const MoleculeSpec &mol, double slack) {
  const Vec3 lo = mol.box_min().array() - slack;
  const Vec3 hi = mol.box_max().array() + slack;
  std::size_t outside = 0;
  for (const auto &a : atoms)
    if ((a.center.array() < lo.array()).any() || (a.center.array() > hi.array()).any())
      ++outside;
  return outside;
}

namespace {

void check_box(const MixtureSet &s, const ReductionPlan *plan) {
  if (!plan || !plan->mol || !plan->diagnostics) return;
  auto &d = *plan->diagnostics;
  ++d.mixtures_checked;
  d.centers_checked += s.size();
  d.box_violations += count_outside_box(s.atoms, *plan->mol);
}

// Drop negligible terms, then reduce if the plan asks for it.
void finish(MixtureSet &s, const ReductionPlan *plan) {
  check_box(s, plan);
  drop_small_rows(s, plan ? plan->drop_threshold : default_drop_threshold);
  if (plan && plan->reduce && plan->mol) {
    s = grouped_reduce(s, *plan->mol, plan->grouping,
                       plan->diagnostics ? &plan->diagnostics->reductions : nullptr);
    check_box(s, plan);
  }
}

// Sum of the diagonal columns (i, i) of a pair-product set.
MixtureSet density_from_pairs(const MixtureSet &pairs, std::size_t n) {
  MixtureSet rho(pairs.size(), 1);
  rho.atoms = pairs.atoms;
  for (std::size_t i = 0; i < n; ++i)
    rho.coeffs.col(0) += pairs.coeffs.col(static_cast<Eigen::Index>(pair_index(i, i, n)));
  return rho;
}

MixtureSet append_rows(const MixtureSet &a, const MixtureSet &b) {
  MixtureSet out(a.size() + b.size(), a.functions());
  std::copy(a.atoms.begin(), a.atoms.end(), out.atoms.begin());
  std::copy(b.atoms.begin(), b.atoms.end(),
            out.atoms.begin() + static_cast<std::ptrdiff_t>(a.size()));
  out.coeffs.topRows(static_cast<Eigen::Index>(a.size())) = a.coeffs;
  out.coeffs.bottomRows(static_cast<Eigen::Index>(b.size())) = b.coeffs;
  return out;
}

// Potential set with column i*N + j holding `potentials` column i when j is
// `target` and zero otherwise, so that multiply_by_potentials sums
// phi_i * W_i into column `target`.
MixtureSet spread_to_column(const MixtureSet &potentials, std::size_t n,
                            std::size_t target) {
  MixtureSet out(potentials.size(), n * n);
  out.atoms = potentials.atoms;
  for (std::size_t i = 0; i < n; ++i)
    out.coeffs.col(static_cast<Eigen::Index>(i * n + target)) =
        potentials.coeffs.col(static_cast<Eigen::Index>(i));
  return out;
}

} // namespace

MixtureSet external_potential_atoms(const MoleculeSpec &mol,
                                    const KernelExpansion &coulomb) {
  MixtureSet out(mol.nuclei.size() * coulomb.size(), 1);
  std::size_t row = 0;
  for (const auto &nuc : mol.nuclei) {
    for (const auto &p : coulomb.pairs) {
      const double sigma = 0.5 / p.exponent;
      out.atoms[row] = {nuc.position, sigma};
      // w exp(-eta r^2) = w (pi sigma)^{3/4} g(r)
      out.coeffs(static_cast<Eigen::Index>(row), 0) =
          nuc.charge * p.weight * std::pow(std::numbers::pi * sigma, 0.75);
      ++row;
    }
  }
  return out;
}

MixtureSet hartree_potential(const MixtureSet &rho, const KernelExpansion &coulomb) {
  const auto exps = coulomb.exponents();
  Eigen::MatrixXd w(static_cast<Eigen::Index>(exps.size()),
                    static_cast<Eigen::Index>(rho.functions()));
  for (std::size_t k = 0; k < exps.size(); ++k)
    w.row(static_cast<Eigen::Index>(k)).setConstant(coulomb.pairs[k].weight);
  return convolve(rho, exps, w);
}

GaussianMixture apply_external_potential(const GaussianMixture &phi,
                                         const MoleculeSpec &mol,
                                         const KernelExpansion &coulomb,
                                         const ReductionPlan *plan) {
  auto out = multiply_by_potentials(MixtureSet::from_mixture(phi),
                                    external_potential_atoms(mol, coulomb));
  finish(out, plan);
  return out.column(0);
}

GaussianMixture hartree_potential(const GaussianMixture &rho,
                                  const KernelExpansion &coulomb,
                                  const ReductionPlan *plan) {
  auto out = hartree_potential(MixtureSet::from_mixture(rho), coulomb);
  finish(out, plan);
  return out.column(0);
}

GaussianMixture apply_coulomb(const GaussianMixture &phi_j,
                              const std::vector<GaussianMixture> &orbitals,
                              const KernelExpansion &coulomb,
                              const ReductionPlan *plan) {
  if (orbitals.empty() || phi_j.empty()) return {};
  const auto phi = MixtureSet::from_mixtures(orbitals);
  auto rho = density_from_pairs(pair_products(phi), orbitals.size());
  finish(rho, plan);
  auto potential = hartree_potential(rho, coulomb);
  finish(potential, plan);
  auto out = multiply_by_potentials(MixtureSet::from_mixture(phi_j), potential);
  finish(out, plan);
  return out.column(0);
}

GaussianMixture apply_exchange(const GaussianMixture &phi_j,
                               const std::vector<GaussianMixture> &orbitals,
                               const KernelExpansion &coulomb,
                               const ReductionPlan *plan) {
  if (orbitals.empty() || phi_j.empty()) return {};
  const std::size_t n = orbitals.size();
  auto all = orbitals;
  all.push_back(phi_j);
  const auto pairs = pair_products(MixtureSet::from_mixtures(all));
  MixtureSet mixed(pairs.size(), n);
  mixed.atoms = pairs.atoms;
  for (std::size_t i = 0; i < n; ++i)
    mixed.coeffs.col(static_cast<Eigen::Index>(i)) =
        pairs.coeffs.col(static_cast<Eigen::Index>(pair_index(i, n, n + 1)));
  finish(mixed, plan);
  auto potentials = hartree_potential(mixed, coulomb);
  finish(potentials, plan);
  auto out = multiply_by_potentials(MixtureSet::from_mixtures(orbitals),
                                    spread_to_column(potentials, n, 0));
  finish(out, plan);
  return out.column(0);
}

GaussianMixture total_potential_apply(const GaussianMixture &phi_j,
                                      const std::vector<GaussianMixture> &orbitals,
                                      const MoleculeSpec &mol,
                                      const KernelExpansion &coulomb,
                                      const ReductionPlan *plan) {
  auto v = concatenate(apply_external_potential(phi_j, mol, coulomb, plan),
                       scaled(apply_coulomb(phi_j, orbitals, coulomb, plan), 2.0));
  v = concatenate(v, scaled(apply_exchange(phi_j, orbitals, coulomb, plan), -1.0));
  auto out = MixtureSet::from_mixture(v);
  finish(out, plan);
  return out.column(0);
}

MixtureSet total_potential_apply(const MixtureSet &orbitals, const MoleculeSpec &mol,
                                 const KernelExpansion &coulomb,
                                 const ReductionPlan &plan,
                                 bool electron_interaction) {
  const std::size_t n = orbitals.functions();
  const auto ext = external_potential_atoms(mol, coulomb);

  // Potentials P_ij with V_tot phi_j = sum_i phi_i P_ij, at column i*n + j.
  MixtureSet potentials(ext.size(), n * n);
  potentials.atoms = ext.atoms;
  for (std::size_t i = 0; i < n; ++i)
    potentials.coeffs.col(static_cast<Eigen::Index>(i * n + i)) = ext.coeffs.col(0);

  if (electron_interaction) {
    auto pairs = pair_products(orbitals);
    finish(pairs, &plan);
    auto w = hartree_potential(pairs, coulomb);
    finish(w, &plan);
    MixtureSet ee(w.size(), n * n);
    ee.atoms = w.atoms;
    Eigen::VectorXd hartree = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.size()));
    for (std::size_t k = 0; k < n; ++k)
      hartree += w.coeffs.col(static_cast<Eigen::Index>(pair_index(k, k, n)));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto col = ee.coeffs.col(static_cast<Eigen::Index>(i * n + j));
        col = -w.coeffs.col(static_cast<Eigen::Index>(pair_index(i, j, n)));
        if (i == j) col += 2.0 * hartree;
      }
    }
    potentials = append_rows(ee, potentials);
  }

  auto out = multiply_by_potentials(orbitals, potentials);
  finish(out, &plan);
  return out;
}

Eigen::MatrixXd fock_matrix(const std::vector<GaussianMixture> &orbitals,
                            const std::vector<GaussianMixture> &vtot_phis) {
  const std::size_t n = orbitals.size();
  if (vtot_phis.size() != n)
    throw ValidationError(fmt::format("fock_matrix: {} orbitals but {} potentials", n,
                                      vtot_phis.size()));
  Eigen::MatrixXd h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          mixture_kinetic(orbitals[i], orbitals[j]) +
          mixture_inner(vtot_phis[i], orbitals[j]);
  const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  return sym;
}

Eigen::MatrixXd fock_matrix(const MixtureSet &orbitals, const MixtureSet &vtot_phis) {
  if (vtot_phis.functions() != orbitals.functions())
    throw ValidationError("fock_matrix: orbital and potential counts differ");
  const Eigen::MatrixXd h =
      kinetic_matrix(orbitals, orbitals) + inner_matrix(vtot_phis, orbitals);
  const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  return sym;
}

} // namespace gmhf
