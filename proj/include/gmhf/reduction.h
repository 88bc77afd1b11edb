#pragma once

#include "gmhf/gaussian.h"
#include "gmhf/mixture_set.h"
#include "gmhf/molecule.h"

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace gmhf {

enum class GroupKind { global, shell, cusp };

/// Identifies one reduction group. Ordering is global first, then by
/// (nucleus, j, m), which fixes the concatenation order of grouped output.
struct GroupKey {
  GroupKind kind = GroupKind::global;
  int nucleus = -1;
  int j = 0;
  int m = 0;

  bool operator==(const GroupKey &) const = default;
  std::strong_ordering operator<=>(const GroupKey &o) const {
    const bool g = kind == GroupKind::global, og = o.kind == GroupKind::global;
    if (g != og) return og <=> g;
    if (auto c = nucleus <=> o.nucleus; c != 0) return c;
    if (auto c = j <=> o.j; c != 0) return c;
    return m <=> o.m;
  }
  std::string to_string() const;
};

struct GroupingConfig {
  double sigma_far = 1.0;
  int J = 4;
  int J_tilde = 26;
  double reduction_eps = 1e-6;

  void validate() const;
};

/// Largest distance from each nucleus to the non-global atoms nearest to it
/// (0 when a nucleus owns no such atom).
std::vector<double> compute_s_max(std::span<const GaussianAtom> atoms,
                                  const MoleculeSpec &mol,
                                  const GroupingConfig &cfg);

/// Group of one atom, or nullopt when the atom is discarded: a fine-scale
/// atom too far from its nucleus for the cusp group, or finer than J_tilde.
std::optional<GroupKey> assign_group(const GaussianAtom &atom,
                                     const MoleculeSpec &mol,
                                     const GroupingConfig &cfg,
                                     std::span<const double> s_max);

/// Every key that `assign_group` can produce, in group order.
std::vector<GroupKey> enumerate_group_keys(std::size_t n_nuclei,
                                           const GroupingConfig &cfg);

/// Position of a key in `enumerate_group_keys`.
std::size_t group_index(const GroupKey &key, const GroupingConfig &cfg);

/// Skeleton reduction of one group.
///
/// Pivoted Cholesky on the Gram matrix of the atoms picks the skeleton;
/// every function is then replaced by its orthogonal projection onto the
/// skeleton span. Output atoms are a subset of the input atoms, in pivot
/// order. Throws NumericalError if the factorization loses positive
/// definiteness.
MixtureSet reduce_group(const MixtureSet &s, double eps);
GaussianMixture reduce_group(const GaussianMixture &m, double eps);

/// Per-group diagnostics of a grouped reduction.
struct ReductionRecord {
  GroupKey key;
  std::size_t input_terms = 0;
  std::size_t output_terms = 0;
  /// Upper bound on the L2 error of the worst function, relative to the norm
  /// of its projection.
  double error_bound = 0.0;
};

struct ReductionLog {
  std::vector<ReductionRecord> records;
  std::size_t discarded = 0;
};

/// Partitions atoms into groups, drops discarded atoms and reduces each group
/// independently with cfg.reduction_eps. Output is concatenated in group
/// order. Reduction failures are rethrown naming the group.
MixtureSet grouped_reduce(const MixtureSet &s, const MoleculeSpec &mol,
                          const GroupingConfig &cfg, ReductionLog *log = nullptr);
GaussianMixture grouped_reduce(const GaussianMixture &m, const MoleculeSpec &mol,
                               const GroupingConfig &cfg,
                               ReductionLog *log = nullptr);

/// Term-count statistics over groups. n_groups, n_max, n_min and n_ave cover
/// the non-empty local (shell and cusp) groups; the global group is reported
/// separately.
struct GroupStatistics {
  std::size_t n_global = 0;
  std::size_t n_groups = 0;
  std::size_t n_max = 0;
  std::size_t n_min = 0;
  double n_ave = 0.0;
  std::size_t n_discarded = 0;
};

GroupStatistics group_statistics(std::span<const GaussianAtom> atoms,
                                 const MoleculeSpec &mol,
                                 const GroupingConfig &cfg);
GroupStatistics group_statistics(const GaussianMixture &m, const MoleculeSpec &mol,
                                 const GroupingConfig &cfg);

} // namespace gmhf
