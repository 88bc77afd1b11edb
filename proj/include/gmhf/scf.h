#pragma once

#include "gmhf/kernel.h"
#include "gmhf/mixture_set.h"
#include "gmhf/molecule.h"
#include "gmhf/operators.h"
#include "gmhf/reduction.h"

#include <functional>
#include <string>
#include <vector>

namespace gmhf {

struct IterationRecord {
  int iteration = 0;
  std::vector<double> energies;
  std::vector<std::size_t> orbital_terms;
  std::size_t vtot_terms = 0;
  double step_s = 0.0;
  /// Wall time summed over all steps so far.
  double elapsed_s = 0.0;
  /// Term centers found outside the nuclear bounding box during the step.
  std::size_t box_violations = 0;
  std::size_t centers_checked = 0;
  /// Statistics of the updated orbitals and of V_tot phi, one per orbital.
  std::vector<GroupStatistics> orbital_stats;
  std::vector<GroupStatistics> vtot_stats;
  std::vector<ReductionRecord> reductions;
};

struct ScfConfig {
  double reduction_eps = 1e-6;
  double energy_tol = 4e-6;
  int max_iterations = 100;
  /// Grouping parameters; its reduction_eps is overridden by the field above.
  GroupingConfig grouping;
  /// When false, J and K are omitted (one-electron oracle mode).
  bool electron_interaction = true;
  /// Largest orbital term count accepted after reduction.
  std::size_t term_ceiling = 10000;
  double drop_threshold = default_drop_threshold;
  /// Called after every step, e.g. for progress logging.
  std::function<void(const IterationRecord &)> on_iteration;

  void validate() const;
  GroupingConfig effective_grouping() const;
};

struct ScfState {
  /// Orthonormal orbitals sharing one atom list, one column per orbital.
  MixtureSet orbitals;
  /// Fock-matrix eigenvalues of the orbitals that entered the latest step.
  std::vector<double> energies;
  std::vector<double> mus;
  int iteration = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  /// V_tot phi of the latest step, rotated into the Fock eigenbasis.
  MixtureSet vtot;
  /// Running totals of the convex-hull check.
  std::size_t box_violations = 0;
  std::size_t centers_checked = 0;

  std::vector<GaussianMixture> orbital_mixtures() const { return orbitals.columns(); }
};

/// Loewdin symmetric orthonormalization, coefficients <- coefficients S^{-1/2}.
/// Throws NumericalError if S has an eigenvalue below 1e-12.
MixtureSet orthonormalize(const MixtureSet &orbitals);
std::vector<GaussianMixture> orthonormalize(const std::vector<GaussianMixture> &orbitals);

/// Initial orbitals for a preset: "heh+" (one sigma=1 atom at the origin) or
/// "lih" (one sigma=10 atom on each nucleus).
std::vector<GaussianMixture> preset_guess(const std::string &preset,
                                          const MoleculeSpec &mol);

/// Orthonormalizes the guess and computes the initial orbital energies.
/// Throws ValidationError if any is non-negative or the guess does not match
/// the orbital count.
ScfState initialize(const MoleculeSpec &mol, const std::vector<GaussianMixture> &guess,
                    const KernelExpansion &coulomb, const ScfConfig &cfg);
ScfState initialize(const MoleculeSpec &mol, const std::string &preset,
                    const KernelExpansion &coulomb, const ScfConfig &cfg);

/// One iteration: V_tot phi, Fock matrix and its eigenpairs, rotation into
/// the eigenbasis, Green's function update with mu_j = sqrt(-2 E_j),
/// reduction and orthonormalization. Throws NumericalError if an eigenvalue
/// is non-negative.
ScfState scf_step(const ScfState &state, const MoleculeSpec &mol,
                  const KernelExpansion &coulomb, const ScfConfig &cfg);

/// Iterates until every |E_j^(m) - E_j^(m-1)| < energy_tol or the iteration
/// limit is hit; `converged` tells which.
ScfState run(const MoleculeSpec &mol, const ScfConfig &cfg, ScfState state,
             const KernelExpansion &coulomb);

struct EnergyBreakdown {
  std::vector<double> orbital_energies;
  std::vector<double> kinetic;
  std::vector<double> external;
  double nuclear_repulsion = 0.0;
  double total = 0.0;
};

/// Energies of the current orbitals. With electron interaction,
/// E_tot = sum_j (E_j + <T phi_j, phi_j> + <V_ext phi_j, phi_j>) + V_nn for
/// doubly occupied orbitals; in one-electron mode E_tot = sum_j E_j + V_nn.
EnergyBreakdown total_energy(const ScfState &state, const MoleculeSpec &mol,
                             const KernelExpansion &coulomb, const ScfConfig &cfg);

} // namespace gmhf
