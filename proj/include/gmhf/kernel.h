#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

namespace gmhf {

/// One Gaussian w * exp(-eta r^2) of a kernel expansion.
struct KernelPair {
  double weight;
  double exponent;
};

/// A radial kernel approximated by sum_n w_n exp(-eta_n r^2) on [delta, R].
/// Pairs are stored with strictly increasing exponents.
struct KernelExpansion {
  std::vector<KernelPair> pairs;
  double delta = 0.0;
  double range = 0.0;
  double accuracy = 0.0;

  std::size_t size() const { return pairs.size(); }

  /// Sum of the expansion at distance r, accumulated in extended precision.
  double evaluate(double r) const;

  std::vector<double> exponents() const;
  std::vector<double> weights() const;
};

/// `samples` log-spaced points on [lo, hi], endpoints included.
std::vector<double> log_spaced(double lo, double hi, std::size_t samples);

/// Largest value of scale(r) * |kernel(r) - expansion(r)| over log-spaced
/// samples of [delta, range].
double max_scaled_error(const KernelExpansion &k,
                        const std::function<double(double)> &kernel,
                        const std::function<double(double)> &scale,
                        std::size_t samples = 10000);

/// Step size used by `build_power_expansion` for a given alpha and eps.
double power_expansion_step(double alpha, double eps);

/// Sum-of-Gaussians approximation of r^-alpha with relative accuracy eps on
/// [delta, range], from the trapezoidal rule applied to
///
///   r^-alpha = 1/Gamma(alpha/2) * int exp(-r^2 e^t + alpha t / 2) dt
///
/// on nodes t = h n - tau. Throws ValidationError on bad arguments and
/// NumericalError if the certification sample exceeds eps.
KernelExpansion build_power_expansion(double alpha, double delta, double range,
                                      double eps, double tau = 0.0);

/// The production 1/r expansion: 8 combined small-exponent terms followed by
/// trapezoid nodes n = -51..87. Certified to 1e-10 relative on [1e-7, 1e5].
KernelExpansion coulomb_reference_expansion();

/// Exponent grid e^{h l}/4, l = M..N, for exp(-mu r)/(4 pi r).
struct HelmholtzQuadrature {
  int M = -20;
  int N = 120;
  double h = 0.38190954773869346734;

  std::vector<double> exponents() const;
  std::vector<double> weights(double mu) const;
};

/// Bound-state Helmholtz Green's function exp(-mu r)/(4 pi r) as a sum of
/// Gaussians, certified to |G - approx| <= 1e-10 / r on [1e-7, 1e5].
KernelExpansion helmholtz_expansion(double mu,
                                    const HelmholtzQuadrature &q = {});

/// One `weight exponent` line per pair with 17 significant digits.
void write_expansion(std::ostream &os, const KernelExpansion &k);

} // namespace gmhf
