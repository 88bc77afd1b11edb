#include "gmhf/gaussian.h"

#include "gmhf/errors.h"

#include <algorithm>
#include <fmt/format.h>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace gmhf {

namespace {

constexpr double pi = std::numbers::pi;

double clamp_between(double value, double a, double b) {
  return std::clamp(value, std::min(a, b), std::max(a, b));
}

} // namespace

double atom_value(const GaussianAtom &atom, const Vec3 &x) {
  const double d2 = (x - atom.center).squaredNorm();
  return atom_norm(atom.sigma) * std::exp(-d2 / (2.0 * atom.sigma));
}

double evaluate(const GaussianMixture &m, const Vec3 &x) {
  double sum = 0.0;
  for (const auto &t : m.terms) sum += t.coeff * atom_value(t.atom(), x);
  return sum;
}

double overlap(const GaussianAtom &a, const GaussianAtom &b) {
  return detail::atom_overlap<double>(
      a.sigma, b.sigma, detail::squared_distance<double>(a.center, b.center));
}

double overlap(const GaussianTerm &a, const GaussianTerm &b) {
  return overlap(a.atom(), b.atom());
}

double kinetic(const GaussianAtom &a, const GaussianAtom &b) {
  // k = pq/(p+q) with p = 1/(2 sigma_a), q = 1/(2 sigma_b)
  const double k = 1.0 / (2.0 * (a.sigma + b.sigma));
  const double d2 = detail::squared_distance<double>(a.center, b.center);
  return k * (3.0 - 2.0 * k * d2) * overlap(a, b);
}

double kinetic(const GaussianTerm &a, const GaussianTerm &b) {
  return kinetic(a.atom(), b.atom());
}

AtomProduct atom_product(const GaussianAtom &a, const GaussianAtom &b) {
  const double s = a.sigma + b.sigma;
  const double t = a.sigma / s;
  const double d2 = detail::squared_distance<double>(a.center, b.center);
  AtomProduct out;
  out.factor = std::pow(pi * s, -0.75) * std::exp(-d2 / (2.0 * s));
  out.atom.sigma = a.sigma * b.sigma / s;
  for (int i = 0; i < 3; ++i) {
    const double c = a.center[i] + t * (b.center[i] - a.center[i]);
    out.atom.center[i] = clamp_between(c, a.center[i], b.center[i]);
  }
  return out;
}

GaussianTerm product(const GaussianTerm &a, const GaussianTerm &b) {
  const auto p = atom_product(a.atom(), b.atom());
  return {a.coeff * b.coeff * p.factor, p.atom.center, p.atom.sigma};
}

AtomConvolution atom_convolution(double sigma, double weight, double eta) {
  // The atom A exp(-p r^2), p = 1/(2 sigma), convolved with w exp(-eta r^2)
  // is A w (pi/(p+eta))^{3/2} exp(-p eta/(p+eta) r^2). In sigma units the new
  // shape is sigma + 1/(2 eta); with q = 2 eta sigma the factor relative to
  // the normalized output atom is w (2 pi sigma)^{3/2} (q (1+q))^{-3/4}.
  const double q = 2.0 * eta * sigma;
  const double log_factor = 1.5 * std::log(2.0 * pi * sigma) -
                            0.75 * (std::log(q) + std::log1p(q));
  return {weight * std::exp(log_factor), sigma + 0.5 / eta};
}

GaussianTerm convolve_with_radial_gaussian(const GaussianTerm &a,
                                           double weight, double eta) {
  const auto c = atom_convolution(a.sigma, weight, eta);
  return {a.coeff * c.factor, a.center, c.sigma};
}

GaussianMixture mixture_product(const GaussianMixture &a,
                                const GaussianMixture &b) {
  GaussianMixture out;
  out.terms.reserve(a.size() * b.size());
  for (const auto &ta : a.terms)
    for (const auto &tb : b.terms) out.terms.push_back(product(ta, tb));
  return out;
}

double mixture_inner(const GaussianMixture &a, const GaussianMixture &b) {
  long double sum = 0.0L;
  for (const auto &ta : a.terms)
    for (const auto &tb : b.terms)
      sum += static_cast<long double>(ta.coeff * tb.coeff) * overlap(ta, tb);
  return static_cast<double>(sum);
}

double mixture_kinetic(const GaussianMixture &a, const GaussianMixture &b) {
  long double sum = 0.0L;
  for (const auto &ta : a.terms)
    for (const auto &tb : b.terms)
      sum += static_cast<long double>(ta.coeff * tb.coeff) * kinetic(ta, tb);
  return static_cast<double>(sum);
}

double mixture_norm(const GaussianMixture &m) {
  return std::sqrt(std::max(0.0, mixture_inner(m, m)));
}

double mixture_distance(const GaussianMixture &a, const GaussianMixture &b) {
  std::vector<GaussianTerm> all = a.terms;
  for (const auto &t : b.terms) all.push_back({-t.coeff, t.center, t.sigma});
  long double sum = 0.0L;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto &ti = all[i];
    sum += static_cast<long double>(ti.coeff) * ti.coeff;
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const auto &tj = all[j];
      const long double s = detail::atom_overlap<long double>(
          ti.sigma, tj.sigma,
          detail::squared_distance<long double>(ti.center, tj.center));
      sum += 2.0L * static_cast<long double>(ti.coeff) * tj.coeff * s;
    }
  }
  return static_cast<double>(std::sqrt(std::max(0.0L, sum)));
}

GaussianMixture scaled(GaussianMixture m, double factor) {
  for (auto &t : m.terms) t.coeff *= factor;
  return m;
}

GaussianMixture concatenate(const GaussianMixture &a,
                            const GaussianMixture &b) {
  GaussianMixture out = a;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  return out;
}

void drop_small_terms(GaussianMixture &m, double threshold) {
  std::erase_if(m.terms, [threshold](const GaussianTerm &t) {
    return !(std::abs(t.coeff) >= threshold);
  });
}

void validate(const GaussianTerm &t) {
  const bool finite = std::isfinite(t.coeff) && t.center.allFinite() &&
                      std::isfinite(t.sigma);
  if (!finite) throw ValidationError("Gaussian term has non-finite fields");
  if (!(t.sigma > 0.0))
    throw ValidationError(
        fmt::format("Gaussian term has non-positive sigma {}", t.sigma));
}

void write_mixture(std::ostream &os, const GaussianMixture &m) {
  os << "# coeff center_x center_y center_z sigma\n";
  for (const auto &t : m.terms)
    os << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", t.coeff,
                      t.center.x(), t.center.y(), t.center.z(), t.sigma);
}

GaussianMixture read_mixture(std::istream &is) {
  GaussianMixture m;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    GaussianTerm t;
    std::string extra;
    if (!(ls >> t.coeff >> t.center.x() >> t.center.y() >> t.center.z() >>
          t.sigma) ||
        (ls >> extra))
      throw ValidationError(
          fmt::format("mixture line {}: expected 'coeff x y z sigma'", line_no));
    try {
      validate(t);
    } catch (const ValidationError &e) {
      throw ValidationError(fmt::format("mixture line {}: {}", line_no, e.what()));
    }
    m.terms.push_back(t);
  }
  return m;
}

} // namespace gmhf
