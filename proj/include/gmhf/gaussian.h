#pragma once

#include <Eigen/Core>
#include <cmath>
#include <iosfwd>
#include <numbers>
#include <span>
#include <vector>

namespace gmhf {

using Vec3 = Eigen::Vector3d;

/// Shape of an L2-normalized isotropic Gaussian atom
///
///   g(x) = (pi sigma)^(-3/4) exp(-|x - center|^2 / (2 sigma))
///
/// `sigma` is the covariance scalar (bohr^2), not the exponent
/// p = 1/(2 sigma).
struct GaussianAtom {
  Vec3 center = Vec3::Zero();
  double sigma = 1.0;
};

/// One term c * g(x) of a Gaussian mixture.
struct GaussianTerm {
  double coeff = 0.0;
  Vec3 center = Vec3::Zero();
  double sigma = 1.0;

  GaussianAtom atom() const { return {center, sigma}; }
};

/// A finite linear combination of Gaussian atoms. An empty mixture is the zero
/// function.
struct GaussianMixture {
  std::vector<GaussianTerm> terms;

  std::size_t size() const { return terms.size(); }
  bool empty() const { return terms.empty(); }
};

/// Default magnitude below which coefficients are dropped after algebra.
inline constexpr double default_drop_threshold = 1e-14;

// Closed forms shared by the double and extended precision code paths.
namespace detail {

template <typename Real>
inline Real squared_distance(const Vec3 &a, const Vec3 &b) {
  const Real dx = Real(a.x()) - Real(b.x());
  const Real dy = Real(a.y()) - Real(b.y());
  const Real dz = Real(a.z()) - Real(b.z());
  return dx * dx + dy * dy + dz * dz;
}

/// <g_a, g_b> for normalized atoms given the squared center distance.
template <typename Real>
inline Real atom_overlap(Real sigma_a, Real sigma_b, Real d2) {
  using std::exp;
  using std::sqrt;
  const Real s = sigma_a + sigma_b;
  const Real ratio = 2 * sqrt(sigma_a * sigma_b) / s;
  return ratio * sqrt(ratio) * exp(-d2 / (2 * s));
}

} // namespace detail

/// Normalization constant (pi sigma)^(-3/4) of an atom.
inline double atom_norm(double sigma) {
  return std::pow(std::numbers::pi * sigma, -0.75);
}

/// Value of the normalized atom at x.
double atom_value(const GaussianAtom &atom, const Vec3 &x);

double evaluate(const GaussianMixture &m, const Vec3 &x);

/// <g_a, g_b>, coefficients excluded.
double overlap(const GaussianAtom &a, const GaussianAtom &b);
double overlap(const GaussianTerm &a, const GaussianTerm &b);

/// <-1/2 Laplacian g_a, g_b>, coefficients excluded.
double kinetic(const GaussianAtom &a, const GaussianAtom &b);
double kinetic(const GaussianTerm &a, const GaussianTerm &b);

/// Result of multiplying two atoms: product_coeff * g(x; center, sigma).
struct AtomProduct {
  double factor;
  GaussianAtom atom;
};

AtomProduct atom_product(const GaussianAtom &a, const GaussianAtom &b);

/// Pointwise product of two terms, again a single term. Coordinates of the new
/// center lie between the corresponding input coordinates.
GaussianTerm product(const GaussianTerm &a, const GaussianTerm &b);

/// Convolution of a normalized atom with w * exp(-eta |r|^2) equals
/// factor * g(x; center, sigma + 1/(2 eta)). The factor includes w.
struct AtomConvolution {
  double factor;
  double sigma;
};

AtomConvolution atom_convolution(double sigma, double weight, double eta);

/// Convolution of a term with the radial Gaussian w * exp(-eta |r|^2).
/// The center is unchanged.
GaussianTerm convolve_with_radial_gaussian(const GaussianTerm &a,
                                           double weight, double eta);

/// All |A| * |B| pairwise products.
GaussianMixture mixture_product(const GaussianMixture &a,
                                const GaussianMixture &b);

double mixture_inner(const GaussianMixture &a, const GaussianMixture &b);
double mixture_kinetic(const GaussianMixture &a, const GaussianMixture &b);
double mixture_norm(const GaussianMixture &m);

/// L2 norm of a - b, computed in extended precision from the Gram form.
double mixture_distance(const GaussianMixture &a, const GaussianMixture &b);

GaussianMixture scaled(GaussianMixture m, double factor);
GaussianMixture concatenate(const GaussianMixture &a, const GaussianMixture &b);

/// Removes terms with |coeff| < threshold (and non-finite coefficients).
void drop_small_terms(GaussianMixture &m,
                      double threshold = default_drop_threshold);

/// Throws ValidationError unless sigma > 0 and all fields are finite.
void validate(const GaussianTerm &t);

/// Text format: one term per line, `coeff x y z sigma`, 17 significant
/// digits. Lines starting with '#' are comments.
void write_mixture(std::ostream &os, const GaussianMixture &m);
GaussianMixture read_mixture(std::istream &is);

} // namespace gmhf
