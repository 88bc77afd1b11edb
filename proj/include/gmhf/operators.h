#pragma once

#include "gmhf/gaussian.h"
#include "gmhf/kernel.h"
#include "gmhf/mixture_set.h"
#include "gmhf/molecule.h"
#include "gmhf/reduction.h"

#include <Eigen/Core>
#include <vector>

namespace gmhf {

/// Counters for the convex-hull check run on every mixture the operators
/// produce, plus the log of all grouped reductions.
struct OperatorDiagnostics {
  std::size_t mixtures_checked = 0;
  std::size_t centers_checked = 0;
  std::size_t box_violations = 0;
  ReductionLog reductions;
};

/// Number of atoms whose center lies outside the axis-aligned bounding box of
/// the nuclei, allowing `slack` bohr of rounding.
std::size_t count_outside_box(std::span<const GaussianAtom> atoms,
                              const MoleculeSpec &mol, double slack = 1e-12);

/// How intermediate mixtures are reduced. Without a plan the operators are
/// exact up to dropping coefficients below `drop_threshold`.
struct ReductionPlan {
  const MoleculeSpec *mol = nullptr;
  GroupingConfig grouping;
  bool reduce = true;
  double drop_threshold = default_drop_threshold;
  OperatorDiagnostics *diagnostics = nullptr;
};

/// Z_l w_n exp(-eta_n |r - R_l|^2) for every nucleus and expansion pair,
/// as normalized atoms with one column.
MixtureSet external_potential_atoms(const MoleculeSpec &mol,
                                    const KernelExpansion &coulomb);

/// V_ext phi. Before reduction the result has |phi| * L * |pairs| terms.
GaussianMixture apply_external_potential(const GaussianMixture &phi,
                                         const MoleculeSpec &mol,
                                         const KernelExpansion &coulomb,
                                         const ReductionPlan *plan = nullptr);

/// The repulsive potential of a charge density, int rho(r') / |r - r'| dr',
/// one term per (density term, expansion pair).
GaussianMixture hartree_potential(const GaussianMixture &rho,
                                  const KernelExpansion &coulomb,
                                  const ReductionPlan *plan = nullptr);
MixtureSet hartree_potential(const MixtureSet &rho, const KernelExpansion &coulomb);

/// J phi_j = phi_j * V_H[sum_i phi_i^2].
GaussianMixture apply_coulomb(const GaussianMixture &phi_j,
                              const std::vector<GaussianMixture> &orbitals,
                              const KernelExpansion &coulomb,
                              const ReductionPlan *plan = nullptr);

/// K phi_j = sum_i phi_i * V_H[phi_i phi_j].
GaussianMixture apply_exchange(const GaussianMixture &phi_j,
                               const std::vector<GaussianMixture> &orbitals,
                               const KernelExpansion &coulomb,
                               const ReductionPlan *plan = nullptr);

/// V_ext phi_j + 2 J phi_j - K phi_j.
GaussianMixture total_potential_apply(const GaussianMixture &phi_j,
                                      const std::vector<GaussianMixture> &orbitals,
                                      const MoleculeSpec &mol,
                                      const KernelExpansion &coulomb,
                                      const ReductionPlan *plan = nullptr);

/// V_tot applied to every orbital of a shared-atom set. Intermediates are
/// reduced after the density, after the convolution and after the product
/// when the plan asks for it. With `electron_interaction` false only V_ext
/// is applied.
MixtureSet total_potential_apply(const MixtureSet &orbitals,
                                 const MoleculeSpec &mol,
                                 const KernelExpansion &coulomb,
                                 const ReductionPlan &plan,
                                 bool electron_interaction = true);

/// H_ij = <-1/2 Laplacian phi_i, phi_j> + <V_tot phi_i, phi_j>, symmetrized.
Eigen::MatrixXd fock_matrix(const std::vector<GaussianMixture> &orbitals,
                            const std::vector<GaussianMixture> &vtot_phis);
Eigen::MatrixXd fock_matrix(const MixtureSet &orbitals, const MixtureSet &vtot_phis);

} // namespace gmhf
