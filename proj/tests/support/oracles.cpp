#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

double legendre(int l, int m, double x) {
  double pmm = 1.0;
  const double s = std::sqrt((1.0 - x) * (1.0 + x));
  for (int i = 1; i <= m; ++i) pmm *= (2.0 * i - 1.0) * s;
  if (l == m) return pmm;
  double pm1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pm1;
  double pl = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pl = ((2.0 * ll - 1.0) * x * pm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pm1;
    pm1 = pl;
  }
  return pl;
}

double real_sh(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  double ratio = 1.0;  // (l-|m|)!/(l+|m|)!
  for (int k = l - am + 1; k <= l + am; ++k) ratio /= k;
  const double K = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
  const double base = K * legendre(l, am, std::cos(theta));
  if (m > 0) return std::sqrt(2.0) * base * std::cos(am * phi);
  if (m < 0) return std::sqrt(2.0) * base * std::sin(am * phi);
  return base;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<size_t>(n), 0.0);
  w.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<size_t>(i)] = z;
    w[static_cast<size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

std::vector<SphereNode> sphere_nodes(int n_theta, int n_phi) {
  std::vector<double> x, w;
  gauss_legendre(n_theta, x, w);
  std::vector<SphereNode> out;
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j)
      out.push_back({std::acos(x[static_cast<size_t>(i)]), (j + 0.5) * dphi, w[static_cast<size_t>(i)] * dphi});
  return out;
}

std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[pivot * n + c])) pivot = r;
    if (a[pivot * n + c] == 0.0) throw std::runtime_error("singular matrix");
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[pivot * n + k]);
      std::swap(b[c], b[pivot]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

double Wave::value(const std::array<double, 3>& x) const {
  return amplitude * std::sin(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase);
}

double Wave::derivative(const std::array<double, 3>& x, int axis) const {
  return amplitude * k[static_cast<size_t>(axis)] * std::cos(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase);
}

Wave random_wave(std::mt19937_64& rng, double max_k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), {max_k * u(rng), max_k * u(rng), max_k * u(rng)}, std::numbers::pi * u(rng)};
}

double convergence_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
