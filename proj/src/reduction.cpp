#include "gmhf/reduction.h"

#include "gmhf/errors.h"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace gmhf {

std::string GroupKey::to_string() const {
  switch (kind) {
  case GroupKind::global:
    return "global";
  case GroupKind::shell:
    return fmt::format("shell(l={},j={},m={})", nucleus, j, m);
  case GroupKind::cusp:
    return fmt::format("cusp(l={},j={})", nucleus, j);
  }
  return "unknown";
}

void GroupingConfig::validate() const {
  if (!(sigma_far > 0.0) || !std::isfinite(sigma_far))
    throw ValidationError(fmt::format("sigma_far must be positive, got {}", sigma_far));
  if (J < 0 || J > 20)
    throw ValidationError(fmt::format("J must lie in [0, 20], got {}", J));
  if (J_tilde <= J || J_tilde > 500)
    throw ValidationError(
        fmt::format("J_tilde must satisfy J < J_tilde <= 500, got {}", J_tilde));
  if (!(reduction_eps > 0.0 && reduction_eps < 1.0))
    throw ValidationError(
        fmt::format("reduction eps must lie in (0, 1), got {}", reduction_eps));
}

namespace {

// Scale bin j >= 0 with sigma in [4^{-j-1} sigma_far, 4^{-j} sigma_far).
int scale_bin(double sigma, double sigma_far) {
  int j = static_cast<int>(std::floor(0.5 * std::log2(sigma_far / sigma)));
  j = std::max(j, 0);
  while (j > 0 && sigma >= std::ldexp(sigma_far, -2 * j)) --j;
  while (sigma < std::ldexp(sigma_far, -2 * j - 2)) ++j;
  return j;
}

std::size_t block_size(const GroupingConfig &cfg) {
  return (std::size_t{2} << cfg.J) - 1 + static_cast<std::size_t>(cfg.J_tilde - cfg.J);
}

} // namespace

std::vector<double> compute_s_max(std::span<const GaussianAtom> atoms,
                                  const MoleculeSpec &mol,
                                  const GroupingConfig &cfg) {
  std::vector<double> s_max(mol.nuclei.size(), 0.0);
  for (const auto &a : atoms) {
    if (a.sigma >= cfg.sigma_far) continue;
    const auto l = mol.nearest_nucleus(a.center);
    s_max[l] = std::max(s_max[l], (a.center - mol.nuclei[l].position).norm());
  }
  return s_max;
}

std::optional<GroupKey> assign_group(const GaussianAtom &atom,
                                     const MoleculeSpec &mol,
                                     const GroupingConfig &cfg,
                                     std::span<const double> s_max) {
  if (atom.sigma >= cfg.sigma_far) return GroupKey{};
  const auto l = mol.nearest_nucleus(atom.center);
  const double dist = (atom.center - mol.nuclei[l].position).norm();
  const int j = scale_bin(atom.sigma, cfg.sigma_far);
  if (j > cfg.J_tilde) return std::nullopt;
  const double smax = s_max[l];
  if (j <= cfg.J) {
    const int bins = 1 << j;
    int m = 0;
    if (smax > 0.0) {
      const double pos = std::floor(dist * bins / smax);
      m = pos >= bins ? bins - 1 : static_cast<int>(pos);
    }
    return GroupKey{GroupKind::shell, static_cast<int>(l), j, m};
  }
  if (dist <= std::ldexp(smax, -j))
    return GroupKey{GroupKind::cusp, static_cast<int>(l), j, 0};
  return std::nullopt;
}

std::vector<GroupKey> enumerate_group_keys(std::size_t n_nuclei,
                                           const GroupingConfig &cfg) {
  std::vector<GroupKey> keys{GroupKey{}};
  for (std::size_t l = 0; l < n_nuclei; ++l) {
    const int li = static_cast<int>(l);
    for (int j = 0; j <= cfg.J; ++j)
      for (int m = 0; m < (1 << j); ++m) keys.push_back({GroupKind::shell, li, j, m});
    for (int j = cfg.J + 1; j <= cfg.J_tilde; ++j)
      keys.push_back({GroupKind::cusp, li, j, 0});
  }
  return keys;
}

std::size_t group_index(const GroupKey &key, const GroupingConfig &cfg) {
  if (key.kind == GroupKind::global) return 0;
  const std::size_t base = 1 + static_cast<std::size_t>(key.nucleus) * block_size(cfg);
  if (key.kind == GroupKind::shell)
    return base + (std::size_t{1} << key.j) - 1 + static_cast<std::size_t>(key.m);
  return base + (std::size_t{2} << cfg.J) - 1 + static_cast<std::size_t>(key.j - cfg.J - 1);
}

namespace {

template <typename Real> struct AtomData {
  Real x, y, z, sigma;
};

// Pivoted Cholesky of the Gram matrix with lazily computed columns, followed
// by the projection of every function onto the skeleton span.
template <typename Real>
MixtureSet reduce_impl(const MixtureSet &s, double eps, double *bound_out) {
  const std::size_t n = s.size();
  const std::size_t nf = s.functions();
  if (bound_out) *bound_out = 0.0;
  if (n == 0) return s;

  std::vector<AtomData<Real>> atoms(n);
  for (std::size_t k = 0; k < n; ++k)
    atoms[k] = {Real(s.atoms[k].center.x()), Real(s.atoms[k].center.y()),
                Real(s.atoms[k].center.z()), Real(s.atoms[k].sigma)};

  const Real u = std::numeric_limits<Real>::epsilon();
  const Real tol2 = Real(eps) * Real(eps);
  const Real noise_floor = std::max(Real(1e-3) * tol2, Real(100) * u);
  const Real negative_tol = Real(1e6) * u;

  std::vector<Real> d(n, Real(1));
  std::vector<char> taken(n, 0);
  std::vector<std::vector<Real>> cols;
  std::vector<std::size_t> pivots;
  // z(i, f) = sum_k L(k, i) c(k, f): coordinates of the projections.
  std::vector<std::vector<Real>> z;

  auto add_pivot = [&](std::size_t p) {
    const Real lpp = std::sqrt(d[p]);
    const auto &ap = atoms[p];
    std::vector<Real> col(n, Real(0));
    for (std::size_t k = 0; k < n; ++k) {
      if (taken[k]) continue;
      const auto &ak = atoms[k];
      const Real dx = ak.x - ap.x, dy = ak.y - ap.y, dz = ak.z - ap.z;
      col[k] = detail::atom_overlap<Real>(ak.sigma, ap.sigma, dx * dx + dy * dy + dz * dz);
    }
    for (const auto &c : cols) {
      const Real f = c[p];
      if (f == Real(0)) continue;
      for (std::size_t k = 0; k < n; ++k) col[k] -= c[k] * f;
    }
    const Real inv = Real(1) / lpp;
    for (std::size_t k = 0; k < n; ++k) {
      if (taken[k]) {
        col[k] = Real(0);
        continue;
      }
      col[k] *= inv;
    }
    col[p] = lpp;
    taken[p] = 1;
    d[p] = Real(0);
    for (std::size_t k = 0; k < n; ++k) {
      if (taken[k]) continue;
      d[k] -= col[k] * col[k];
      if (d[k] < Real(0)) {
        if (d[k] < -negative_tol)
          throw NumericalError(fmt::format(
              "Gram factorization lost positive definiteness (residual {:.3e})",
              static_cast<double>(d[k])));
        d[k] = Real(0);
      }
    }
    std::vector<Real> zi(nf, Real(0));
    for (std::size_t k = 0; k < n; ++k) {
      if (col[k] == Real(0)) continue;
      for (std::size_t f = 0; f < nf; ++f)
        zi[f] += col[k] * Real(s.coeffs(static_cast<Eigen::Index>(k),
                                        static_cast<Eigen::Index>(f)));
    }
    z.push_back(std::move(zi));
    cols.push_back(std::move(col));
    pivots.push_back(p);
  };

  // Coefficient-blind stage: every atom is represented within eps.
  while (pivots.size() < n) {
    std::size_t best = n;
    Real best_d = tol2;
    for (std::size_t k = 0; k < n; ++k)
      if (!taken[k] && d[k] >= best_d && (best == n || d[k] > best_d)) {
        best = k;
        best_d = d[k];
      }
    if (best == n) break;
    add_pivot(best);
  }

  // Error of function f is at most sum_k |c_kf| sqrt(d_k), and its norm is at
  // least |z_f|. When that bound does not certify relative accuracy eps,
  // continue pivoting on the atoms that dominate the bound.
  auto worst_ratio = [&]() {
    Real worst = Real(0);
    for (std::size_t f = 0; f < nf; ++f) {
      Real bound = Real(0), norm2 = Real(0);
      for (std::size_t k = 0; k < n; ++k)
        if (!taken[k] && d[k] > Real(0))
          bound += std::abs(Real(s.coeffs(static_cast<Eigen::Index>(k),
                                          static_cast<Eigen::Index>(f)))) *
                   std::sqrt(d[k]);
      for (const auto &zi : z) norm2 += zi[f] * zi[f];
      if (bound == Real(0)) continue;
      const Real ratio = norm2 > Real(0) ? bound / std::sqrt(norm2)
                                         : std::numeric_limits<Real>::infinity();
      worst = std::max(worst, ratio);
    }
    return worst;
  };
  Real ratio = worst_ratio();
  while (ratio > Real(eps) && pivots.size() < n) {
    std::size_t best = n;
    Real best_w = Real(0);
    for (std::size_t k = 0; k < n; ++k) {
      if (taken[k] || d[k] < noise_floor) continue;
      Real c2 = Real(0);
      for (std::size_t f = 0; f < nf; ++f) {
        const Real c = Real(s.coeffs(static_cast<Eigen::Index>(k),
                                     static_cast<Eigen::Index>(f)));
        c2 += c * c;
      }
      const Real w = d[k] * c2;
      if (w > best_w) {
        best = k;
        best_w = w;
      }
    }
    if (best == n) break;
    add_pivot(best);
    ratio = worst_ratio();
  }
  if (bound_out) *bound_out = static_cast<double>(ratio);

  // Projection coefficients x solve L_S^T x = z, with L_S(j, i) = cols[i][p_j].
  const std::size_t r = pivots.size();
  MixtureSet out(r, nf);
  std::vector<Real> x(r);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t ii = r; ii-- > 0;) {
      Real acc = z[ii][f];
      for (std::size_t j = ii + 1; j < r; ++j) acc -= cols[ii][pivots[j]] * x[j];
      x[ii] = acc / cols[ii][pivots[ii]];
    }
    for (std::size_t i = 0; i < r; ++i)
      out.coeffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
          static_cast<double>(x[i]);
  }
  for (std::size_t i = 0; i < r; ++i) out.atoms[i] = s.atoms[pivots[i]];
  return out;
}

// Residual pivots near eps^2 = 1e-14 and below are lost in double rounding.
constexpr double extended_precision_below = 1e-7;

MixtureSet reduce_dispatch(const MixtureSet &s, double eps, double *bound) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ValidationError(fmt::format("reduction eps must lie in (0, 1), got {}", eps));
  if (eps < extended_precision_below) return reduce_impl<long double>(s, eps, bound);
  return reduce_impl<double>(s, eps, bound);
}

} // namespace

MixtureSet reduce_group(const MixtureSet &s, double eps) {
  return reduce_dispatch(s, eps, nullptr);
}

GaussianMixture reduce_group(const GaussianMixture &m, double eps) {
  return reduce_group(MixtureSet::from_mixture(m), eps).column(0);
}

MixtureSet grouped_reduce(const MixtureSet &s, const MoleculeSpec &mol,
                          const GroupingConfig &cfg, ReductionLog *log) {
  cfg.validate();
  const auto s_max = compute_s_max(s.atoms, mol, cfg);
  const auto keys = enumerate_group_keys(mol.nuclei.size(), cfg);
  std::vector<std::vector<std::size_t>> members(keys.size());
  std::size_t discarded = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    const auto key = assign_group(s.atoms[a], mol, cfg, s_max);
    if (!key) {
      ++discarded;
      continue;
    }
    members[group_index(*key, cfg)].push_back(a);
  }
  if (log) log->discarded += discarded;

  std::vector<MixtureSet> parts;
  std::size_t total = 0;
  for (std::size_t g = 0; g < keys.size(); ++g) {
    if (members[g].empty()) continue;
    double bound = 0.0;
    MixtureSet reduced;
    try {
      reduced = reduce_dispatch(s.select(members[g]), cfg.reduction_eps, &bound);
    } catch (const NumericalError &e) {
      throw NumericalError(fmt::format("group {}: {}", keys[g].to_string(), e.what()));
    }
    if (log)
      log->records.push_back({keys[g], members[g].size(), reduced.size(), bound});
    total += reduced.size();
    parts.push_back(std::move(reduced));
  }

  MixtureSet out(total, s.functions());
  std::size_t row = 0;
  for (const auto &p : parts) {
    std::copy(p.atoms.begin(), p.atoms.end(), out.atoms.begin() + static_cast<std::ptrdiff_t>(row));
    out.coeffs.middleRows(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(p.size())) =
        p.coeffs;
    row += p.size();
  }
  return out;
}

GaussianMixture grouped_reduce(const GaussianMixture &m, const MoleculeSpec &mol,
                               const GroupingConfig &cfg, ReductionLog *log) {
  return grouped_reduce(MixtureSet::from_mixture(m), mol, cfg, log).column(0);
}

GroupStatistics group_statistics(std::span<const GaussianAtom> atoms,
                                 const MoleculeSpec &mol,
                                 const GroupingConfig &cfg) {
  const auto s_max = compute_s_max(atoms, mol, cfg);
  std::vector<std::size_t> counts(enumerate_group_keys(mol.nuclei.size(), cfg).size(), 0);
  GroupStatistics st;
  for (const auto &a : atoms) {
    const auto key = assign_group(a, mol, cfg, s_max);
    if (key)
      ++counts[group_index(*key, cfg)];
    else
      ++st.n_discarded;
  }
  st.n_global = counts[0];
  std::size_t local_total = 0;
  for (std::size_t g = 1; g < counts.size(); ++g) {
    if (counts[g] == 0) continue;
    st.n_max = st.n_groups == 0 ? counts[g] : std::max(st.n_max, counts[g]);
    st.n_min = st.n_groups == 0 ? counts[g] : std::min(st.n_min, counts[g]);
    ++st.n_groups;
    local_total += counts[g];
  }
  if (st.n_groups > 0)
    st.n_ave = static_cast<double>(local_total) / static_cast<double>(st.n_groups);
  return st;
}

GroupStatistics group_statistics(const GaussianMixture &m, const MoleculeSpec &mol,
                                 const GroupingConfig &cfg) {
  std::vector<GaussianAtom> atoms;
  atoms.reserve(m.size());
  for (const auto &t : m.terms) atoms.push_back(t.atom());
  return group_statistics(atoms, mol, cfg);
}

} // namespace gmhf
