#include "gmhf/scf.h"

#include "gmhf/errors.h"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <fmt/format.h>

namespace gmhf {

void ScfConfig::validate() const {
  if (!(reduction_eps > 0.0 && reduction_eps < 1.0))
    throw ValidationError(fmt::format("reduction eps must lie in (0, 1), got {}", reduction_eps));
  if (!(energy_tol > 0.0))
    throw ValidationError(fmt::format("energy tolerance must be positive, got {}", energy_tol));
  if (max_iterations < 1)
    throw ValidationError(fmt::format("max iterations must be positive, got {}", max_iterations));
  if (!(drop_threshold >= 0.0))
    throw ValidationError("drop threshold must be non-negative");
  effective_grouping().validate();
}

GroupingConfig ScfConfig::effective_grouping() const {
  GroupingConfig g = grouping;
  g.reduction_eps = reduction_eps;
  return g;
}

MixtureSet orthonormalize(const MixtureSet &orbitals) {
  const Eigen::MatrixXd gram = inner_matrix(orbitals, orbitals);
  const Eigen::MatrixXd s = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed on the orbital Gram matrix");
  const double smallest = es.eigenvalues().minCoeff();
  if (!(smallest >= 1e-12))
    throw NumericalError(fmt::format(
        "orbitals are linearly dependent (Gram eigenvalue {:.3e})", smallest));
  const Eigen::MatrixXd inv_sqrt = es.eigenvectors() *
                                   es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                   es.eigenvectors().transpose();
  return transform(orbitals, inv_sqrt);
}

std::vector<GaussianMixture> orthonormalize(const std::vector<GaussianMixture> &orbitals) {
  if (orbitals.empty()) return {};
  return orthonormalize(MixtureSet::from_mixtures(orbitals)).columns();
}

std::vector<GaussianMixture> preset_guess(const std::string &preset,
                                          const MoleculeSpec &mol) {
  if (preset == "heh+") {
    if (mol.n_orbitals != 1)
      throw ValidationError("preset heh+ needs a molecule with one orbital");
    return {GaussianMixture{{{1.0, Vec3::Zero(), 1.0}}}};
  }
  if (preset == "lih") {
    if (mol.n_orbitals != 2 || mol.nuclei.size() < 2)
      throw ValidationError("preset lih needs two nuclei and two orbitals");
    return {GaussianMixture{{{1.0, mol.nuclei[0].position, 10.0}}},
            GaussianMixture{{{1.0, mol.nuclei[1].position, 10.0}}}};
  }
  throw ValidationError(fmt::format("unknown preset '{}'", preset));
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<GroupStatistics> per_function_stats(const MixtureSet &s,
                                                const MoleculeSpec &mol,
                                                const GroupingConfig &g) {
  std::vector<GroupStatistics> out;
  for (std::size_t j = 0; j < s.functions(); ++j) {
    std::vector<GaussianAtom> atoms;
    for (std::size_t a = 0; a < s.size(); ++a)
      if (s.coeffs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) != 0.0)
        atoms.push_back(s.atoms[a]);
    out.push_back(group_statistics(atoms, mol, g));
  }
  return out;
}

std::vector<std::size_t> per_function_terms(const MixtureSet &s) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < s.functions(); ++j)
    out.push_back(static_cast<std::size_t>(
        (s.coeffs.col(static_cast<Eigen::Index>(j)).array() != 0.0).count()));
  return out;
}

struct FockSolution {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
};

FockSolution solve_fock(const MixtureSet &orbitals, const MixtureSet &vtot) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fock_matrix(orbitals, vtot));
  if (es.info() != Eigen::Success) throw NumericalError("Fock eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<double> to_vector(const Eigen::VectorXd &v) {
  return {v.data(), v.data() + v.size()};
}

} // namespace

ScfState initialize(const MoleculeSpec &mol, const std::vector<GaussianMixture> &guess,
                    const KernelExpansion &coulomb, const ScfConfig &cfg) {
  mol.validate();
  cfg.validate();
  if (guess.size() != static_cast<std::size_t>(mol.n_orbitals))
    throw ValidationError(fmt::format("initial guess has {} orbitals, molecule needs {}",
                                      guess.size(), mol.n_orbitals));
  for (std::size_t j = 0; j < guess.size(); ++j) {
    if (guess[j].empty())
      throw ValidationError(fmt::format("initial orbital {} is empty", j + 1));
    for (const auto &t : guess[j].terms) validate(t);
  }

  ScfState state;
  try {
    state.orbitals = orthonormalize(MixtureSet::from_mixtures(guess));
  } catch (const NumericalError &e) {
    throw ValidationError(fmt::format("initial guess: {}", e.what()));
  }
  state.centers_checked = state.orbitals.size();
  state.box_violations = count_outside_box(state.orbitals.atoms, mol);

  OperatorDiagnostics diag;
  const ReductionPlan plan{&mol, cfg.effective_grouping(), true, cfg.drop_threshold, &diag};
  const auto vtot = total_potential_apply(state.orbitals, mol, coulomb, plan,
                                          cfg.electron_interaction);
  const auto fock = solve_fock(state.orbitals, vtot);
  state.energies = to_vector(fock.energies);
  for (std::size_t j = 0; j < state.energies.size(); ++j)
    if (!(state.energies[j] < 0.0))
      throw ValidationError(fmt::format(
          "initial orbital energy E_{} = {} is not negative; choose another guess", j + 1,
          state.energies[j]));
  for (double e : state.energies) state.mus.push_back(std::sqrt(-2.0 * e));
  state.vtot = transform(vtot, fock.vectors);
  state.box_violations += diag.box_violations;
  state.centers_checked += diag.centers_checked;
  return state;
}

ScfState initialize(const MoleculeSpec &mol, const std::string &preset,
                    const KernelExpansion &coulomb, const ScfConfig &cfg) {
  return initialize(mol, preset_guess(preset, mol), coulomb, cfg);
}

ScfState scf_step(const ScfState &state, const MoleculeSpec &mol,
                  const KernelExpansion &coulomb, const ScfConfig &cfg) {
  const auto start = Clock::now();
  const auto grouping = cfg.effective_grouping();
  OperatorDiagnostics diag;
  const ReductionPlan plan{&mol, grouping, true, cfg.drop_threshold, &diag};

  const auto vtot = total_potential_apply(state.orbitals, mol, coulomb, plan,
                                          cfg.electron_interaction);
  const auto fock = solve_fock(state.orbitals, vtot);
  const std::size_t n = state.orbitals.functions();
  for (Eigen::Index j = 0; j < fock.energies.size(); ++j)
    if (!(fock.energies(j) < 0.0))
      throw NumericalError(fmt::format(
          "orbital energy E_{} = {} is not negative at iteration {}", j + 1,
          fock.energies(j), state.iteration + 1));

  ScfState next;
  next.iteration = state.iteration + 1;
  next.energies = to_vector(fock.energies);
  next.vtot = transform(vtot, fock.vectors);

  const HelmholtzQuadrature quad;
  const auto exponents = quad.exponents();
  Eigen::MatrixXd weights(static_cast<Eigen::Index>(exponents.size()),
                          static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const double mu = std::sqrt(-2.0 * next.energies[j]);
    next.mus.push_back(mu);
    const auto g = helmholtz_expansion(mu, quad);
    for (std::size_t k = 0; k < g.size(); ++k)
      weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          -2.0 * g.pairs[k].weight;
  }

  auto updated = convolve(next.vtot, exponents, weights);
  ++diag.mixtures_checked;
  diag.centers_checked += updated.size();
  diag.box_violations += count_outside_box(updated.atoms, mol);
  drop_small_rows(updated, cfg.drop_threshold);
  updated = grouped_reduce(updated, mol, grouping, &diag.reductions);
  next.orbitals = orthonormalize(updated);
  ++diag.mixtures_checked;
  diag.centers_checked += next.orbitals.size();
  diag.box_violations += count_outside_box(next.orbitals.atoms, mol);
  if (next.orbitals.size() > cfg.term_ceiling)
    throw NumericalError(fmt::format("orbital term count {} exceeds the ceiling {}",
                                     next.orbitals.size(), cfg.term_ceiling));

  next.history = state.history;
  next.box_violations = state.box_violations + diag.box_violations;
  next.centers_checked = state.centers_checked + diag.centers_checked;

  IterationRecord rec;
  rec.iteration = next.iteration;
  rec.energies = next.energies;
  rec.orbital_terms = per_function_terms(next.orbitals);
  rec.vtot_terms = vtot.size();
  rec.box_violations = diag.box_violations;
  rec.centers_checked = diag.centers_checked;
  rec.orbital_stats = per_function_stats(next.orbitals, mol, grouping);
  rec.vtot_stats = per_function_stats(vtot, mol, grouping);
  rec.reductions = std::move(diag.reductions.records);
  rec.step_s = std::chrono::duration<double>(Clock::now() - start).count();
  rec.elapsed_s = rec.step_s + (state.history.empty() ? 0.0 : state.history.back().elapsed_s);
  next.history.push_back(rec);
  if (cfg.on_iteration) cfg.on_iteration(rec);
  return next;
}

ScfState run(const MoleculeSpec &mol, const ScfConfig &cfg, ScfState state,
             const KernelExpansion &coulomb) {
  cfg.validate();
  state.converged = false;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    // Energies from initialize() belong to the same orbitals the first step
    // starts from, so they are not a previous iterate.
    const bool have_previous = !state.history.empty();
    const auto previous = state.energies;
    state = scf_step(state, mol, coulomb, cfg);
    bool done = have_previous && previous.size() == state.energies.size();
    for (std::size_t j = 0; done && j < previous.size(); ++j)
      done = std::abs(state.energies[j] - previous[j]) < cfg.energy_tol;
    if (done) {
      state.converged = true;
      break;
    }
  }
  return state;
}

EnergyBreakdown total_energy(const ScfState &state, const MoleculeSpec &mol,
                             const KernelExpansion &coulomb, const ScfConfig &cfg) {
  const std::size_t n = state.orbitals.functions();
  const ReductionPlan plan{&mol, cfg.effective_grouping(), true, cfg.drop_threshold, nullptr};
  const auto vtot = total_potential_apply(state.orbitals, mol, coulomb, plan,
                                          cfg.electron_interaction);
  const auto fock = solve_fock(state.orbitals, vtot);
  const auto vext = total_potential_apply(state.orbitals, mol, coulomb, plan, false);

  const Eigen::MatrixXd &u = fock.vectors;
  const Eigen::MatrixXd kin = u.transpose() * kinetic_matrix(state.orbitals, state.orbitals) * u;
  const Eigen::MatrixXd ext = u.transpose() * inner_matrix(vext, state.orbitals) * u;

  EnergyBreakdown out;
  out.orbital_energies = to_vector(fock.energies);
  out.nuclear_repulsion = mol.nuclear_repulsion();
  out.total = out.nuclear_repulsion;
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.kinetic.push_back(kin(jj, jj));
    out.external.push_back(ext(jj, jj));
    out.total += out.orbital_energies[j];
    if (cfg.electron_interaction) out.total += kin(jj, jj) + ext(jj, jj);
  }
  return out;
}

} // namespace gmhf
