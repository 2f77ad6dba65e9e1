#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "srm/error.hpp"
#include "srm/stats.hpp"

using namespace srm;

TEST_CASE("pearson anchors and hand example") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> neg;
  for (double v : a) neg.push_back(-v);
  CHECK(pearson(a, a) == doctest::Approx(1.0));
  CHECK(pearson(a, neg) == doctest::Approx(-1.0));
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 5, 4, 5};
  // Deviations (-2..2) and (-2,0,1,0,1): sxy = 6, sxx = 10, syy = 6.
  CHECK(pearson(x, y) == doctest::Approx(6.0 / std::sqrt(60.0)).epsilon(1e-14));
  CHECK(pearson(x, y) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
  CHECK_THROWS_AS(pearson(std::vector<double>{1.0}, std::vector<double>{2.0}), NumericError);
  CHECK_THROWS_AS(pearson(a, std::vector<double>(5, 3.0)), NumericError);
}

TEST_CASE("property: pearson agrees with the textbook formula") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(30), y(30);
    for (int i = 0; i < 30; ++i) {
      x[i] = z(rng);
      y[i] = 0.4 * x[i] + z(rng);
    }
    CHECK(pearson(x, y) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-10));
  }
}

TEST_CASE("weighted line fit") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const Line l = fit_line(x, y);
  CHECK(l.slope == doctest::Approx(2.0));
  CHECK(l.intercept == doctest::Approx(1.0));
  // Weights only on the first two points.
  const std::vector<double> y2{1, 3, 100, -100}, w{1, 1, 0, 0};
  const Line l2 = fit_line(x, y2, w);
  CHECK(l2.slope == doctest::Approx(2.0));
  CHECK(l2.intercept == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line(std::vector<double>(4, 2.0), y), NumericError);
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(mean(v) == 2.5);
  CHECK(standard_error(v) == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(standard_error(std::vector<double>{3.0}) == 0.0);
}

TEST_CASE("incomplete gamma against closed forms") {
  for (double x : {0.001, 0.1, 0.5, 1.0, 2.0, 3.84, 6.63, 10.83, 20.0, 50.0}) {
    CHECK(chi_squared_sf(x, 1) == doctest::Approx(oracle::chi2_sf_df1(x)).epsilon(1e-10));
    CHECK(chi_squared_sf(x, 2) == doctest::Approx(oracle::chi2_sf_df2(x)).epsilon(1e-10));
  }
  CHECK(chi_squared_sf(0.0, 1) == 1.0);
  // Q(1, x) = exp(-x); Q(3, x) = exp(-x)(1 + x + x^2/2).
  for (double x : {0.2, 1.5, 4.0, 9.0}) {
    CHECK(regularized_gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
    CHECK(regularized_gamma_q(3.0, x) == doctest::Approx(std::exp(-x) * (1 + x + x * x / 2)).epsilon(1e-12));
  }
}

TEST_CASE("two-proportion chi-squared") {
  const ChiSquared equal = two_proportion_chisq(10, 20, 10, 20);
  CHECK(equal.chi2 == 0.0);
  CHECK(equal.p_value == 1.0);

  const ChiSquared r = two_proportion_chisq(30, 100, 50, 100);
  CHECK(std::abs(r.chi2 - 8.333) < 1e-3);
  CHECK(r.chi2 == doctest::Approx(oracle::chi2_2x2(30, 100, 50, 100)).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(oracle::chi2_sf_df1(r.chi2)).epsilon(1e-10));
  CHECK(std::abs(r.p_value - 0.0039) < 1e-4);

  const ChiSquared y = two_proportion_chisq(30, 100, 50, 100, true);
  CHECK(y.chi2 < r.chi2);
  // Yates: (|ad - bc| - N/2)^2 N / (row and column products).
  const double yates = std::pow(std::abs(30.0 * 50 - 70.0 * 50) - 100.0, 2) * 200 / (100.0 * 100 * 80 * 120);
  CHECK(y.chi2 == doctest::Approx(yates).epsilon(1e-12));

  const ChiSquared none = two_proportion_chisq(0, 10, 0, 30);
  CHECK(none.chi2 == 0.0);
  CHECK(none.p_value == 1.0);
  CHECK_THROWS_AS(two_proportion_chisq(5, 0, 1, 3), ConfigError);
  CHECK_THROWS_AS(two_proportion_chisq(5, 4, 1, 3), ConfigError);
}

TEST_CASE("significance calls of the criminal-versus-other experiment") {
  // Proportions saved (criminal, other) with N = 326 per proportion.
  struct Row {
    double criminal, other;
    bool below_001;
  };
  const Row homeless[] = {{0.65, 0.88, true}, {0.68, 0.84, true}, {0.63, 0.79, true},
                          {0.78, 0.89, true}, {0.71, 0.90, true}, {0.69, 0.83, true}};
  const Row old_man[] = {{0.65, 0.87, true}, {0.68, 0.82, true}, {0.63, 0.81, true},
                         {0.78, 0.87, false}, {0.71, 0.88, true}, {0.69, 0.85, true}};
  const Row man[] = {{0.65, 0.89, true}, {0.68, 0.85, true}, {0.63, 0.81, true},
                     {0.78, 0.91, true}, {0.71, 0.89, true}, {0.69, 0.83, true}};
  const long n = 326;
  auto k = [&](double p) { return std::lround(p * n); };
  for (const auto* table : {homeless, old_man, man}) {
    for (int i = 0; i < 6; ++i) {
      const Row& row = table[i];
      const ChiSquared r = two_proportion_chisq(k(row.criminal), n, k(row.other), n);
      CHECK(r.p_value < 0.05);
      CHECK((r.p_value < 0.001) == row.below_001);
    }
  }
  // The one weaker row is reported as p = .002.
  const ChiSquared weak = two_proportion_chisq(k(0.78), n, k(0.87), n);
  CHECK(weak.p_value == doctest::Approx(0.002).epsilon(0.5));
}
