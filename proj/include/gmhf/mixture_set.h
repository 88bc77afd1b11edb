#pragma once

#include "gmhf/gaussian.h"

#include <Eigen/Core>
#include <span>
#include <vector>

namespace gmhf {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Several functions expanded over one shared list of atoms.
///
/// Column j of `coeffs` holds the coefficients of function j. Sharing atoms
/// lets a reduction pick one skeleton for all functions, so linear
/// combinations of the functions (orthonormalization, eigenvector rotation)
/// never grow the term count.
struct MixtureSet {
  std::vector<GaussianAtom> atoms;
  RowMatrix coeffs;

  MixtureSet() = default;
  MixtureSet(std::size_t n_atoms, std::size_t n_functions);

  std::size_t size() const { return atoms.size(); }
  std::size_t functions() const { return static_cast<std::size_t>(coeffs.cols()); }
  bool empty() const { return atoms.empty(); }

  /// Concatenates the terms of all mixtures; coefficients are zero where a
  /// function has no term on an atom.
  static MixtureSet from_mixtures(std::span<const GaussianMixture> mixtures);
  static MixtureSet from_mixture(const GaussianMixture &m);

  /// Function j as a mixture. Exactly-zero coefficients are skipped.
  GaussianMixture column(std::size_t j) const;
  std::vector<GaussianMixture> columns() const;

  /// Keeps rows listed in `rows`, in that order.
  MixtureSet select(std::span<const std::size_t> rows) const;
};

/// Removes atoms whose coefficients all have magnitude below `threshold`.
void drop_small_rows(MixtureSet &s, double threshold = default_drop_threshold);

/// Products phi_i * phi_j for all i <= j over unordered atom pairs a <= b.
/// Column order is (0,0), (0,1), ..., (0,N-1), (1,1), ...
MixtureSet pair_products(const MixtureSet &phi);

/// Column index of the pair (i, j), i <= j, in `pair_products` output.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n);

/// Sum over i of phi_i * P_ij for every j, where `potentials` has N*N
/// columns with P_ij stored at column i*N + j. Output has N columns and one
/// atom per (phi atom, potential atom) pair.
MixtureSet multiply_by_potentials(const MixtureSet &phi,
                                  const MixtureSet &potentials);

/// Convolution of every function with sum_k W(k, j) exp(-exponents[k] r^2),
/// where column j of the set uses column j of `weights`.
MixtureSet convolve(const MixtureSet &s, std::span<const double> exponents,
                    const Eigen::MatrixXd &weights);

/// Matrix of inner products <a_i, b_j>.
Eigen::MatrixXd inner_matrix(const MixtureSet &a, const MixtureSet &b);

/// Matrix of kinetic integrals <-1/2 Laplacian a_i, b_j>.
Eigen::MatrixXd kinetic_matrix(const MixtureSet &a, const MixtureSet &b);

/// Replaces the functions by linear combinations: coeffs <- coeffs * T.
MixtureSet transform(const MixtureSet &s, const Eigen::MatrixXd &t);

} // namespace gmhf
