#include "gmhf/mixture_set.h"

#include "gmhf/errors.h"

#include <fmt/format.h>

namespace gmhf {

MixtureSet::MixtureSet(std::size_t n_atoms, std::size_t n_functions)
    : atoms(n_atoms), coeffs(RowMatrix::Zero(static_cast<Eigen::Index>(n_atoms),
                                             static_cast<Eigen::Index>(n_functions))) {}

MixtureSet MixtureSet::from_mixtures(std::span<const GaussianMixture> mixtures) {
  std::size_t total = 0;
  for (const auto &m : mixtures) total += m.size();
  MixtureSet s(total, mixtures.size());
  std::size_t row = 0;
  for (std::size_t j = 0; j < mixtures.size(); ++j) {
    for (const auto &t : mixtures[j].terms) {
      s.atoms[row] = t.atom();
      s.coeffs(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = t.coeff;
      ++row;
    }
  }
  return s;
}

MixtureSet MixtureSet::from_mixture(const GaussianMixture &m) {
  return from_mixtures(std::span<const GaussianMixture>(&m, 1));
}

GaussianMixture MixtureSet::column(std::size_t j) const {
  if (j >= functions())
    throw ValidationError(fmt::format("column {} out of range", j));
  GaussianMixture m;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const double c = coeffs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
    if (c != 0.0) m.terms.push_back({c, atoms[a].center, atoms[a].sigma});
  }
  return m;
}

std::vector<GaussianMixture> MixtureSet::columns() const {
  std::vector<GaussianMixture> out;
  for (std::size_t j = 0; j < functions(); ++j) out.push_back(column(j));
  return out;
}

MixtureSet MixtureSet::select(std::span<const std::size_t> rows) const {
  MixtureSet s(rows.size(), functions());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.atoms[i] = atoms[rows[i]];
    s.coeffs.row(static_cast<Eigen::Index>(i)) =
        coeffs.row(static_cast<Eigen::Index>(rows[i]));
  }
  return s;
}

void drop_small_rows(MixtureSet &s, double threshold) {
  const Eigen::Index n = static_cast<Eigen::Index>(s.size());
  Eigen::Index out = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    const double biggest = s.coeffs.cols() ? s.coeffs.row(a).cwiseAbs().maxCoeff() : 0.0;
    if (!(biggest >= threshold)) continue;
    if (out != a) {
      s.atoms[static_cast<std::size_t>(out)] = s.atoms[static_cast<std::size_t>(a)];
      s.coeffs.row(out) = s.coeffs.row(a);
    }
    ++out;
  }
  s.atoms.resize(static_cast<std::size_t>(out));
  s.coeffs.conservativeResize(out, Eigen::NoChange);
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  // rows before i hold n, n-1, ..., n-i+1 pairs
  return i * n - (i * (i + 1)) / 2 + i + (j - i);
}

MixtureSet pair_products(const MixtureSet &phi) {
  const std::size_t n = phi.size();
  const std::size_t nf = phi.functions();
  const std::size_t npairs = nf * (nf + 1) / 2;
  MixtureSet out(n * (n + 1) / 2, npairs);
  std::size_t row = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const auto ca = phi.coeffs.row(static_cast<Eigen::Index>(a));
    for (std::size_t b = a; b < n; ++b) {
      const auto cb = phi.coeffs.row(static_cast<Eigen::Index>(b));
      const auto p = atom_product(phi.atoms[a], phi.atoms[b]);
      out.atoms[row] = p.atom;
      auto dst = out.coeffs.row(static_cast<Eigen::Index>(row));
      std::size_t col = 0;
      for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = i; j < nf; ++j, ++col) {
          const auto ii = static_cast<Eigen::Index>(i);
          const auto jj = static_cast<Eigen::Index>(j);
          const double c = (a == b) ? ca(ii) * ca(jj)
                                    : ca(ii) * cb(jj) + cb(ii) * ca(jj);
          dst(static_cast<Eigen::Index>(col)) = p.factor * c;
        }
      }
      ++row;
    }
  }
  return out;
}

MixtureSet multiply_by_potentials(const MixtureSet &phi,
                                  const MixtureSet &potentials) {
  const std::size_t nf = phi.functions();
  if (potentials.functions() != nf * nf)
    throw ValidationError(fmt::format(
        "potential set has {} columns, expected {}", potentials.functions(), nf * nf));
  const auto nf_i = static_cast<Eigen::Index>(nf);
  MixtureSet out(phi.size() * potentials.size(), nf);
  std::size_t row = 0;
  for (std::size_t a = 0; a < phi.size(); ++a) {
    const auto ca = phi.coeffs.row(static_cast<Eigen::Index>(a));
    for (std::size_t b = 0; b < potentials.size(); ++b) {
      const auto p = atom_product(phi.atoms[a], potentials.atoms[b]);
      out.atoms[row] = p.atom;
      // P_b viewed as an N x N matrix with P_ij at i*N + j.
      const Eigen::Map<const RowMatrix> pb(
          potentials.coeffs.row(static_cast<Eigen::Index>(b)).data(), nf_i, nf_i);
      out.coeffs.row(static_cast<Eigen::Index>(row)) = p.factor * (ca * pb);
      ++row;
    }
  }
  return out;
}

MixtureSet convolve(const MixtureSet &s, std::span<const double> exponents,
                    const Eigen::MatrixXd &weights) {
  const std::size_t nk = exponents.size();
  if (static_cast<std::size_t>(weights.rows()) != nk ||
      static_cast<std::size_t>(weights.cols()) != s.functions())
    throw ValidationError("convolution weight matrix has the wrong shape");
  MixtureSet out(s.size() * nk, s.functions());
  std::size_t row = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    const auto ca = s.coeffs.row(static_cast<Eigen::Index>(a));
    for (std::size_t k = 0; k < nk; ++k) {
      const auto c = atom_convolution(s.atoms[a].sigma, 1.0, exponents[k]);
      out.atoms[row] = {s.atoms[a].center, c.sigma};
      out.coeffs.row(static_cast<Eigen::Index>(row)) =
          c.factor * ca.cwiseProduct(weights.row(static_cast<Eigen::Index>(k)));
      ++row;
    }
  }
  return out;
}

namespace {

template <typename Integral>
Eigen::MatrixXd bilinear(const MixtureSet &a, const MixtureSet &b,
                         Integral integral) {
  const std::size_t na = a.functions();
  const std::size_t nb = b.functions();
  // Extended accumulation keeps Gram matrices of long expansions accurate.
  std::vector<long double> acc(na * nb, 0.0L);
  std::vector<long double> t(nb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::fill(t.begin(), t.end(), 0.0L);
    for (std::size_t k = 0; k < b.size(); ++k) {
      const long double s = integral(a.atoms[i], b.atoms[k]);
      if (s == 0.0L) continue;
      const double *row = b.coeffs.row(static_cast<Eigen::Index>(k)).data();
      for (std::size_t q = 0; q < nb; ++q) t[q] += s * row[q];
    }
    const double *ca = a.coeffs.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t p = 0; p < na; ++p)
      for (std::size_t q = 0; q < nb; ++q) acc[p * nb + q] += ca[p] * t[q];
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
  for (std::size_t p = 0; p < na; ++p)
    for (std::size_t q = 0; q < nb; ++q)
      out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
          static_cast<double>(acc[p * nb + q]);
  return out;
}

} // namespace

Eigen::MatrixXd inner_matrix(const MixtureSet &a, const MixtureSet &b) {
  return bilinear(a, b, [](const GaussianAtom &x, const GaussianAtom &y) {
    return overlap(x, y);
  });
}

Eigen::MatrixXd kinetic_matrix(const MixtureSet &a, const MixtureSet &b) {
  return bilinear(a, b, [](const GaussianAtom &x, const GaussianAtom &y) {
    return kinetic(x, y);
  });
}

MixtureSet transform(const MixtureSet &s, const Eigen::MatrixXd &t) {
  if (static_cast<std::size_t>(t.rows()) != s.functions())
    throw ValidationError("transform matrix has the wrong number of rows");
  MixtureSet out;
  out.atoms = s.atoms;
  out.coeffs = s.coeffs * t;
  return out;
}

} // namespace gmhf
