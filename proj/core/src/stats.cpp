#include "srm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "srm/error.hpp"

namespace srm {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw NumericError("correlation inputs differ in length");
  if (a.size() < 2) throw NumericError("correlation needs at least two points");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) throw NumericError("correlation undefined for zero variance");
  return sab / std::sqrt(saa * sbb);
}

Line fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || (!w.empty() && w.size() != x.size())) {
    throw NumericError("line fit inputs differ in length");
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  if (sw <= 0.0) throw NumericError("line fit needs positive total weight");
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-300 * sw) throw NumericError("degenerate regressor: x has no variance");
  Line line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  return line;
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw NumericError("invalid incomplete gamma arguments");
  if (x == 0.0) return 1.0;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;
  if (x < a + 1.0) {
    // P(a, x) by its power series.
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return 1.0 - sum * std::exp(log_prefactor);
  }
  // Q(a, x) by its continued fraction (modified Lentz).
  constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor) * h;
}

double chi_squared_sf(double x, double df) {
  if (df <= 0) throw NumericError("degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

ChiSquared two_proportion_chisq(long k1, long n1, long k2, long n2, bool yates) {
  if (n1 < 1 || n2 < 1 || k1 < 0 || k2 < 0 || k1 > n1 || k2 > n2) {
    throw ConfigError("two_proportion_chisq needs 0 <= k <= n and n >= 1");
  }
  const double n = static_cast<double>(n1 + n2);
  const double pooled = static_cast<double>(k1 + k2) / n;
  if (pooled <= 0.0 || pooled >= 1.0) return {0.0, 1.0};
  // Sum over the 2x2 table of (observed - expected)^2 / expected.
  const double obs[2][2] = {{static_cast<double>(k1), static_cast<double>(n1 - k1)},
                            {static_cast<double>(k2), static_cast<double>(n2 - k2)}};
  const double rows[2] = {static_cast<double>(n1), static_cast<double>(n2)};
  const double cols[2] = {pooled, 1.0 - pooled};
  double chi2 = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double expected = rows[r] * cols[c];
      double diff = std::abs(obs[r][c] - expected);
      if (yates) diff = std::max(0.0, diff - 0.5);
      chi2 += diff * diff / expected;
    }
  }
  return {chi2, chi_squared_sf(chi2, 1.0)};
}

}  // namespace srm
