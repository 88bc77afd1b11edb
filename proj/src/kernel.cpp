#include "gmhf/kernel.h"

#include "gmhf/errors.h"

#include <array>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <ostream>

namespace gmhf {

namespace {

constexpr double pi = std::numbers::pi;

// Small-exponent terms of the 1/r expansion obtained by combining the
// trapezoid nodes below n = -51: (exponent, weight).
constexpr std::array<KernelPair, 8> combined_coulomb_terms = {{
    {3.2630674210379e-6, 2.1073876854180e-12},
    {3.1058837221013e-6, 1.8365780986634e-11},
    {2.8014247111005e-6, 4.7777245228151e-11},
    {2.5227064974618e-6, 8.5624630300630e-11},
    {2.7039982943831e-6, 1.3289239111902e-10},
    {3.2761422288967e-6, 2.0054640049463e-10},
    {4.0205002817225e-6, 3.0217586807074e-10},
    {4.9351231646262e-6, 4.5529860118663e-10},
}};

constexpr double coulomb_step = 0.40994422603935795;
constexpr double coulomb_shift = 0.192967891816239;
constexpr int coulomb_first_node = -51;
constexpr int coulomb_last_node = 87;

constexpr double certified_delta = 1e-7;
constexpr double certified_range = 1e5;
constexpr double certified_accuracy = 1e-10;

void check_increasing(const KernelExpansion &k) {
  for (std::size_t i = 0; i < k.pairs.size(); ++i) {
    if (!(k.pairs[i].exponent > 0.0) || !std::isfinite(k.pairs[i].weight))
      throw NumericalError("kernel expansion has an invalid pair");
    if (i > 0 && !(k.pairs[i].exponent > k.pairs[i - 1].exponent))
      throw NumericalError("kernel exponents are not strictly increasing");
  }
}

long double sum_at(const KernelExpansion &k, long double r) {
  const long double r2 = r * r;
  long double sum = 0.0L;
  // Terms are positive-weighted or tiny, so double exponentials summed in
  // long double keep the relative accuracy; terms past exp underflow are
  // skipped.
  for (const auto &p : k.pairs) {
    const double x = static_cast<double>(static_cast<long double>(p.exponent) * r2);
    if (x > 745.0) continue;
    sum += static_cast<long double>(p.weight) * std::exp(-x);
  }
  return sum;
}

} // namespace

double KernelExpansion::evaluate(double r) const {
  return static_cast<double>(sum_at(*this, r));
}

std::vector<double> KernelExpansion::exponents() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto &p : pairs) out.push_back(p.exponent);
  return out;
}

std::vector<double> KernelExpansion::weights() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto &p : pairs) out.push_back(p.weight);
  return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t samples) {
  if (!(lo > 0.0 && hi > lo) || samples < 2)
    throw ValidationError("log_spaced needs 0 < lo < hi and at least 2 samples");
  std::vector<double> out(samples);
  const long double a = std::log(static_cast<long double>(lo));
  const long double b = std::log(static_cast<long double>(hi));
  for (std::size_t i = 0; i < samples; ++i)
    out[i] = static_cast<double>(
        std::exp(a + (b - a) * static_cast<long double>(i) / (samples - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

double max_scaled_error(const KernelExpansion &k,
                        const std::function<double(double)> &kernel,
                        const std::function<double(double)> &scale,
                        std::size_t samples) {
  double worst = 0.0;
  for (double r : log_spaced(k.delta, k.range, samples)) {
    const long double diff = sum_at(k, r) - static_cast<long double>(kernel(r));
    worst = std::max(worst, static_cast<double>(std::abs(diff) * scale(r)));
  }
  return worst;
}

double power_expansion_step(double alpha, double eps) {
  return 2.0 * pi /
         (std::log(3.0) + 0.5 * alpha * std::log(1.0 / std::cos(1.0)) +
          std::log(1.0 / eps));
}

KernelExpansion build_power_expansion(double alpha, double delta, double range,
                                      double eps, double tau) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ValidationError(fmt::format("alpha must be positive, got {}", alpha));
  if (!(delta > 0.0 && delta < range) || !std::isfinite(range))
    throw ValidationError(
        fmt::format("need 0 < delta < R, got delta={} R={}", delta, range));
  if (!(eps > 0.0 && eps <= std::exp(-1.0)))
    throw ValidationError(fmt::format("eps must lie in (0, 1/e], got {}", eps));
  const double h = power_expansion_step(alpha, eps);
  if (!(tau >= 0.0 && tau < h))
    throw ValidationError(fmt::format("shift tau must lie in [0, {}), got {}", h, tau));

  const double half = 0.5 * alpha;
  const double log_prefactor = std::log(h) - std::lgamma(half);
  const double log_cut = std::log(1e-2 * eps);
  const double log_d2 = 2.0 * std::log(delta);
  const double log_r2 = 2.0 * std::log(range);

  // Relative size of node t against r^-alpha is (h/Gamma) u^{alpha/2} e^{-u}
  // with u = e^t r^2; its maximum over [delta, R] sits at u = alpha/2 or at
  // an endpoint.
  auto included = [&](double t) {
    const double log_u = std::clamp(std::log(half), t + log_d2, t + log_r2);
    if (log_u > 700.0) return false;
    return log_prefactor + half * log_u - std::exp(log_u) >= log_cut;
  };

  const double spread = std::abs(log_prefactor) + std::abs(log_cut) + 10.0;
  const double t_lo = -log_r2 - spread / half - 10.0;
  const double t_hi = -log_d2 + std::log(spread + 10.0 * half) + 10.0;
  const auto n_lo = static_cast<long>(std::floor((t_lo + tau) / h));
  const auto n_hi = static_cast<long>(std::ceil((t_hi + tau) / h));
  if (n_hi - n_lo > 1000000)
    throw ValidationError("requested kernel expansion is too large");

  KernelExpansion k;
  k.delta = delta;
  k.range = range;
  k.accuracy = eps;
  for (long n = n_lo; n <= n_hi; ++n) {
    const double t = h * static_cast<double>(n) - tau;
    if (!included(t)) continue;
    k.pairs.push_back({std::exp(log_prefactor + half * t), std::exp(t)});
  }
  check_increasing(k);

  const double err = max_scaled_error(
      k, [alpha](double r) { return std::pow(r, -alpha); },
      [alpha](double r) { return std::pow(r, alpha); });
  if (!(err <= eps))
    throw NumericalError(fmt::format(
        "power expansion certification failed: error {:.3e} exceeds {:.3e}", err, eps));
  return k;
}

KernelExpansion coulomb_reference_expansion() {
  KernelExpansion k;
  k.delta = certified_delta;
  k.range = certified_range;
  k.accuracy = certified_accuracy;
  for (const auto &p : combined_coulomb_terms) k.pairs.push_back(p);
  const double w0 = coulomb_step / std::sqrt(pi);
  for (int n = coulomb_first_node; n <= coulomb_last_node; ++n) {
    const double t = coulomb_step * n - coulomb_shift;
    k.pairs.push_back({w0 * std::exp(0.5 * t), std::exp(t)});
  }
  check_increasing(k);
  const double err = max_scaled_error(
      k, [](double r) { return 1.0 / r; }, [](double r) { return r; });
  if (!(err <= certified_accuracy))
    throw NumericalError(
        fmt::format("Coulomb expansion certification failed: {:.3e}", err));
  return k;
}

std::vector<double> HelmholtzQuadrature::exponents() const {
  std::vector<double> out;
  for (int l = M; l <= N; ++l) out.push_back(0.25 * std::exp(h * l));
  return out;
}

std::vector<double> HelmholtzQuadrature::weights(double mu) const {
  const double scale = std::pow(4.0 * pi, -1.5) * h;
  std::vector<double> out;
  for (int l = M; l <= N; ++l)
    out.push_back(scale * std::exp(-mu * mu * std::exp(-h * l) + 0.5 * h * l));
  return out;
}

KernelExpansion helmholtz_expansion(double mu, const HelmholtzQuadrature &q) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw ValidationError(fmt::format(
        "Helmholtz parameter mu must be positive (orbital energy must be negative), got {}",
        mu));
  KernelExpansion k;
  k.delta = certified_delta;
  k.range = certified_range;
  k.accuracy = certified_accuracy;
  const auto eta = q.exponents();
  const auto w = q.weights(mu);
  for (std::size_t i = 0; i < eta.size(); ++i) k.pairs.push_back({w[i], eta[i]});
  check_increasing(k);
  const double err = max_scaled_error(
      k, [mu](double r) { return std::exp(-mu * r) / (4.0 * pi * r); },
      [](double r) { return r; });
  if (!(err <= certified_accuracy))
    throw NumericalError(fmt::format(
        "Helmholtz expansion certification failed for mu={}: {:.3e}", mu, err));
  return k;
}

void write_expansion(std::ostream &os, const KernelExpansion &k) {
  os << fmt::format("# weight exponent; valid on [{:.17g}, {:.17g}], accuracy {:.3g}\n",
                    k.delta, k.range, k.accuracy);
  for (const auto &p : k.pairs)
    os << fmt::format("{:.17g} {:.17g}\n", p.weight, p.exponent);
}

} // namespace gmhf
