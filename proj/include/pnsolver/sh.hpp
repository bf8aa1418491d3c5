#pragma once

// Spherical-harmonic basis functions and the P_N coupling coefficients.
//
// Conventions used throughout the project:
//   * assoc_legendre() does NOT include the Condon-Shortley phase (-1)^m.
//     The phase lives in complex_sh() instead, so P^{1,1}(x) = +sqrt(1-x^2).
//   * Directions are expressed in a right-handed frame with z up:
//     omega = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)).

#include <array>
#include <compare>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace pnsolver::sh {

/// Band l and order m of a spherical harmonic, |m| <= l.
struct ShIndex {
  int l = 0;
  int m = 0;

  friend constexpr auto operator<=>(const ShIndex&, const ShIndex&) = default;

  constexpr bool valid() const { return l >= 0 && m >= -l && m <= l; }
};

std::string to_string(ShIndex index);

/// l(l+1)+m; bijective over bands 0..N onto 0..(N+1)^2-1.
int flat_index(ShIndex index);
ShIndex from_flat_index(int flat);

using Vec3 = std::array<double, 3>;

Vec3 direction(double theta, double phi);

double assoc_legendre(int l, int m, double x);

std::complex<double> complex_sh(int l, int m, double theta, double phi);

/// Real basis built from the complex one; m<0 carries sin(|m| phi), m>0 cos(m phi).
double real_sh(int l, int m, double theta, double phi);
double real_sh(int l, int m, const Vec3& dir);

enum class Coupling { a, b, c, d, e, f };

char to_char(Coupling kind);

/// Closed-form coupling coefficient. Throws DomainError when the radicand is
/// negative, which means a caller asked for a coupling outside the range any
/// P_N equation references.
double coupling(Coupling kind, int l, int m);

/// sqrt(4 pi / (2l+1)), the eigenvalue of zonal convolution on band l.
double lambda(int l);

/// Product rule: Gauss-Legendre in cos(theta) times uniform trapezoid in phi.
class SphereQuadrature {
 public:
  struct Node {
    double theta;
    double phi;
    double weight;
  };

  explicit SphereQuadrature(int n_theta = 64, int n_phi = 128);

  const std::vector<Node>& nodes() const { return nodes_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }

  template <class F>
  auto integrate(F&& f) const {
    decltype(f(0.0, 0.0)) sum{};
    for (const auto& n : nodes_) sum += n.weight * f(n.theta, n.phi);
    return sum;
  }

 private:
  int n_theta_;
  int n_phi_;
  std::vector<Node> nodes_;
};

struct ShCoefficient {
  ShIndex index;
  double value;
};

using SphericalFunction = std::function<double(double theta, double phi)>;

/// Coefficients of f against every real_sh up to band `order`, in flat-index order.
std::vector<ShCoefficient> project_function(const SphericalFunction& f, int order,
                                            const SphereQuadrature& quadrature = SphereQuadrature());

/// Henyey-Greenstein phase function, normalised to 1 over the sphere.
double henyey_greenstein(double g, double cos_angle);

/// Zonal coefficients p^{l,0}, l = 0..order, of a Henyey-Greenstein lobe around +z.
std::vector<double> henyey_greenstein_coefficients(double g, int order,
                                                   const SphereQuadrature& quadrature = SphereQuadrature());

}  // namespace pnsolver::sh
