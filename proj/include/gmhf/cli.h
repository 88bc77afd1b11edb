#pragma once

#include "gmhf/molecule.h"
#include "gmhf/reduction.h"
#include "gmhf/scf.h"

#include <iosfwd>
#include <string>
#include <vector>

namespace gmhf {

/// Reads a molecule file:
///
///   # comment
///   orbitals 1
///   -1 0 0 -0.7
///   -2 0 0  0.7
///
/// Every nucleus line is `Z x y z` with Z < 0. Errors carry line numbers.
MoleculeSpec parse_molecule(std::istream &is);
MoleculeSpec parse_molecule_file(const std::string &path);

struct RunReport {
  bool converged = false;
  int iterations = 0;
  EnergyBreakdown energy;
  std::vector<std::size_t> orbital_terms;
  std::vector<GroupStatistics> orbital_stats;
  std::vector<GroupStatistics> vtot_stats;
  std::size_t box_violations = 0;
  std::size_t centers_checked = 0;
  double wall_time_s = 0.0;

  /// key=value lines.
  std::string to_text() const;
};

RunReport make_report(const ScfState &state, const EnergyBreakdown &energy,
                      const MoleculeSpec &mol, const ScfConfig &cfg, double wall_time_s);

/// `x,phi_1,...,phi_N` rows sampled on n points of [a, b] along one axis.
void write_line_samples(std::ostream &os, const std::vector<GaussianMixture> &orbitals,
                        char axis, double a, double b, std::size_t n);

/// Exit codes of `run_command`.
enum ExitCode : int {
  exit_converged = 0,
  exit_not_converged = 2,
  exit_validation = 3,
  exit_numerical = 4,
};

/// The command-line front end. Log lines go to `out`, errors to `err`.
int run_command(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace gmhf
