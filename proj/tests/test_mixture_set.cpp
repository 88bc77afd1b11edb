#include "gmhf/mixture_set.h"
#include "oracles.h"

#include <catch2/catch_amalgamated.hpp>

using namespace gmhf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("round trip through a set", "[mixture_set]") {
  std::mt19937_64 rng(1);
  const std::vector<GaussianMixture> ms{oracle::random_mixture(rng, 3),
                                        oracle::random_mixture(rng, 4)};
  const auto s = MixtureSet::from_mixtures(ms);
  REQUIRE(s.size() == 7);
  REQUIRE(s.functions() == 2);
  const auto back = s.columns();
  for (std::size_t j = 0; j < 2; ++j) {
    REQUIRE(back[j].size() == ms[j].size());
    for (std::size_t i = 0; i < ms[j].size(); ++i) CHECK(back[j].terms[i].coeff == ms[j].terms[i].coeff);
  }
}

TEST_CASE("pair products reproduce phi_i phi_j pointwise", "[mixture_set]") {
  std::mt19937_64 rng(2);
  const std::vector<GaussianMixture> ms{oracle::random_mixture(rng, 4),
                                        oracle::random_mixture(rng, 3),
                                        oracle::random_mixture(rng, 2)};
  const auto s = MixtureSet::from_mixtures(ms);
  const auto p = pair_products(s);
  CHECK(p.size() == 9 * 10 / 2);
  CHECK(p.functions() == 6);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 10; ++t) {
    const Vec3 x(u(rng), u(rng), u(rng));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) {
        const double expected = evaluate(ms[i], x) * evaluate(ms[j], x);
        CHECK_THAT(evaluate(p.column(pair_index(i, j, 3)), x), WithinAbs(expected, 1e-13));
      }
  }
  CHECK(pair_index(0, 0, 3) == 0);
  CHECK(pair_index(0, 2, 3) == 2);
  CHECK(pair_index(1, 1, 3) == 3);
  CHECK(pair_index(2, 1, 3) == 4);
  CHECK(pair_index(2, 2, 3) == 5);
}

TEST_CASE("products with a potential matrix", "[mixture_set]") {
  std::mt19937_64 rng(3);
  const std::vector<GaussianMixture> phi{oracle::random_mixture(rng, 3),
                                         oracle::random_mixture(rng, 2)};
  const std::vector<GaussianMixture> pot{oracle::random_mixture(rng, 2), oracle::random_mixture(rng, 2),
                                         oracle::random_mixture(rng, 3), oracle::random_mixture(rng, 1)};
  const auto out = multiply_by_potentials(MixtureSet::from_mixtures(phi), MixtureSet::from_mixtures(pot));
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 10; ++t) {
    const Vec3 x(u(rng), u(rng), u(rng));
    for (std::size_t j = 0; j < 2; ++j) {
      double expected = 0.0;
      for (std::size_t i = 0; i < 2; ++i) expected += evaluate(phi[i], x) * evaluate(pot[i * 2 + j], x);
      CHECK_THAT(evaluate(out.column(j), x), WithinAbs(expected, 1e-13));
    }
  }
}

TEST_CASE("per-column convolution weights", "[mixture_set]") {
  std::mt19937_64 rng(4);
  const std::vector<GaussianMixture> ms{oracle::random_mixture(rng, 2), oracle::random_mixture(rng, 2)};
  const std::vector<double> eta{0.3, 2.0};
  Eigen::MatrixXd w(2, 2);
  w << 1.0, -0.5, 0.25, 2.0;
  const auto c = convolve(MixtureSet::from_mixtures(ms), eta, w);
  const Vec3 x(0.3, -0.4, 0.8);
  for (Eigen::Index j = 0; j < 2; ++j) {
    double expected = 0.0;
    for (const auto &t : ms[static_cast<std::size_t>(j)].terms)
      for (Eigen::Index k = 0; k < 2; ++k)
        expected += t.coeff * oracle::convolution(t.center, t.sigma, w(k, j), eta[static_cast<std::size_t>(k)], x);
    CHECK_THAT(evaluate(c.column(static_cast<std::size_t>(j)), x), WithinRel(expected, 1e-10));
  }
}

TEST_CASE("inner and kinetic matrices match mixture integrals", "[mixture_set]") {
  std::mt19937_64 rng(5);
  const std::vector<GaussianMixture> a{oracle::random_mixture(rng, 4), oracle::random_mixture(rng, 3)};
  const std::vector<GaussianMixture> b{oracle::random_mixture(rng, 2), oracle::random_mixture(rng, 5),
                                       oracle::random_mixture(rng, 1)};
  const auto sa = MixtureSet::from_mixtures(a);
  const auto sb = MixtureSet::from_mixtures(b);
  const auto s = inner_matrix(sa, sb);
  const auto t = kinetic_matrix(sa, sb);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK_THAT(s(i, j), WithinAbs(mixture_inner(a[i], b[j]), 1e-14));
      CHECK_THAT(t(i, j), WithinAbs(mixture_kinetic(a[i], b[j]), 1e-14));
    }
}

TEST_CASE("drop_small_rows and transform", "[mixture_set]") {
  MixtureSet s(3, 2);
  s.coeffs << 1e-16, 2e-15, 0.5, 0.0, 1e-15, 0.3;
  drop_small_rows(s);
  REQUIRE(s.size() == 2);
  CHECK(s.coeffs(0, 0) == 0.5);
  Eigen::MatrixXd t(2, 2);
  t << 0, 1, 1, 0;
  const auto r = transform(s, t);
  CHECK(r.coeffs(0, 1) == 0.5);
  CHECK(r.coeffs(1, 0) == 0.3);
}
