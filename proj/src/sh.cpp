#include "pnsolver/sh.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "pnsolver/errors.hpp"

namespace pnsolver::sh {

namespace {

void require_index(int l, int m) {
  if (l < 0 || m < -l || m > l)
    throw IndexError("spherical harmonic index out of range: l=" + std::to_string(l) +
                     " m=" + std::to_string(m));
}

// sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!) for 0 <= m <= l.
double normalization(int l, int m) {
  double ratio = 1.0;
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  return std::sqrt((2 * l + 1) / (4.0 * std::numbers::pi) * ratio);
}

double checked_sqrt(double radicand, Coupling kind, int l, int m) {
  if (radicand < 0.0)
    throw DomainError(std::string("coupling ") + to_char(kind) + " has negative radicand at l=" +
                      std::to_string(l) + " m=" + std::to_string(m));
  return std::sqrt(radicand);
}

}  // namespace

std::string to_string(ShIndex index) {
  return "(" + std::to_string(index.l) + "," + std::to_string(index.m) + ")";
}

int flat_index(ShIndex index) {
  require_index(index.l, index.m);
  return index.l * (index.l + 1) + index.m;
}

ShIndex from_flat_index(int flat) {
  if (flat < 0) throw IndexError("negative flat spherical harmonic index");
  int l = static_cast<int>(std::sqrt(static_cast<double>(flat)));
  while (l * l > flat) --l;
  while ((l + 1) * (l + 1) <= flat) ++l;
  return {l, flat - l * (l + 1)};
}

Vec3 direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double assoc_legendre(int l, int m, double x) {
  if (l < 0 || m < 0 || m > l)
    throw DomainError("assoc_legendre requires 0 <= m <= l (l=" + std::to_string(l) +
                      " m=" + std::to_string(m) + ")");
  if (!(std::abs(x) <= 1.0)) throw DomainError("assoc_legendre requires |x| <= 1");
  // libstdc++ follows the no-phase convention as well.
  return std::assoc_legendre(static_cast<unsigned>(l), static_cast<unsigned>(m), x);
}

std::complex<double> complex_sh(int l, int m, double theta, double phi) {
  require_index(l, m);
  if (m < 0) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign * std::conj(complex_sh(l, -m, theta, phi));
  }
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  const double magnitude = sign * normalization(l, m) * assoc_legendre(l, m, std::cos(theta));
  return std::polar(1.0, m * phi) * magnitude;
}

double real_sh(int l, int m, double theta, double phi) {
  require_index(l, m);
  const int am = std::abs(m);
  const double base = normalization(l, am) * assoc_legendre(l, am, std::cos(theta));
  if (m == 0) return base;
  if (m > 0) return std::numbers::sqrt2 * base * std::cos(m * phi);
  return std::numbers::sqrt2 * base * std::sin(am * phi);
}

double real_sh(int l, int m, const Vec3& dir) {
  const double z = std::clamp(dir[2], -1.0, 1.0);
  return real_sh(l, m, std::acos(z), std::atan2(dir[1], dir[0]));
}

char to_char(Coupling kind) { return static_cast<char>('a' + static_cast<int>(kind)); }

double coupling(Coupling kind, int l, int m) {
  const double dl = l;
  const double dm = m;
  switch (kind) {
    case Coupling::a:
      return checked_sqrt((dl - dm + 1) * (dl + dm + 1) / ((2 * dl + 3) * (2 * dl + 1)), kind, l, m);
    case Coupling::b:
      return checked_sqrt((dl - dm) * (dl + dm) / ((2 * dl + 1) * (2 * dl - 1)), kind, l, m);
    case Coupling::c:
      return checked_sqrt((dl + dm + 1) * (dl + dm + 2) / ((2 * dl + 3) * (2 * dl + 1)), kind, l, m);
    case Coupling::d:
      return checked_sqrt((dl - dm) * (dl - dm - 1) / ((2 * dl + 1) * (2 * dl - 1)), kind, l, m);
    case Coupling::e:
      return checked_sqrt((dl - dm + 1) * (dl - dm + 2) / ((2 * dl + 3) * (2 * dl + 1)), kind, l, m);
    case Coupling::f:
      return checked_sqrt((dl + dm) * (dl + dm - 1) / ((2 * dl + 1) * (2 * dl - 1)), kind, l, m);
  }
  throw DomainError("unknown coupling kind");
}

double lambda(int l) {
  if (l < 0) throw IndexError("lambda requires l >= 0");
  return std::sqrt(4.0 * std::numbers::pi / (2 * l + 1));
}

SphereQuadrature::SphereQuadrature(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 1 || n_phi < 1) throw DomainError("quadrature resolution must be positive");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<size_t>(n_theta)),
      &gsl_integration_glfixed_table_free);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  nodes_.reserve(static_cast<size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i) {
    double mu = 0.0;
    double w = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<size_t>(i), &mu, &w, table.get());
    const double theta = std::acos(mu);
    for (int j = 0; j < n_phi; ++j) nodes_.push_back({theta, (j + 0.5) * dphi, w * dphi});
  }
}

std::vector<ShCoefficient> project_function(const SphericalFunction& f, int order,
                                            const SphereQuadrature& quadrature) {
  if (order < 0) throw IndexError("projection order must be >= 0");
  const int count = (order + 1) * (order + 1);
  std::vector<ShCoefficient> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<size_t>(i)] = {from_flat_index(i), 0.0};
  for (const auto& node : quadrature.nodes()) {
    const double value = node.weight * f(node.theta, node.phi);
    if (value == 0.0) continue;
    for (auto& c : out) c.value += value * real_sh(c.index.l, c.index.m, node.theta, node.phi);
  }
  return out;
}

double henyey_greenstein(double g, double cos_angle) {
  const double denom = 1.0 + g * g - 2.0 * g * cos_angle;
  return (1.0 - g * g) / (4.0 * std::numbers::pi * denom * std::sqrt(denom));
}

std::vector<double> henyey_greenstein_coefficients(double g, int order,
                                                   const SphereQuadrature& quadrature) {
  const auto coefficients = project_function(
      [g](double theta, double) { return henyey_greenstein(g, std::cos(theta)); }, order, quadrature);
  std::vector<double> zonal(static_cast<size_t>(order + 1));
  for (int l = 0; l <= order; ++l) zonal[static_cast<size_t>(l)] = coefficients[static_cast<size_t>(flat_index({l, 0}))].value;
  return zonal;
}

}  // namespace pnsolver::sh
