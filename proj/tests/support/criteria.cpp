#include "criteria.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "pnsolver/manip.hpp"

namespace criteria {

using pnsolver::ShIndex;
using pnsolver::cas::Bindings;
using pnsolver::cas::DerivativeOrders;
using pnsolver::cas::Expr;
using pnsolver::cas::Kind;

namespace {

using Point = std::array<double, 3>;

int order_total(const DerivativeOrders& o) { return o[0] + o[1] + o[2]; }

int single_axis(const DerivativeOrders& o) {
  for (int a = 0; a < 3; ++a)
    if (o[static_cast<size_t>(a)] == 1) return a;
  return -1;
}

// Analytic value or first derivative of a wave.
double wave_sample(const oracle::Wave& w, const Point& x, const DerivativeOrders& o) {
  if (order_total(o) == 0) return w.value(x);
  if (order_total(o) == 1) return w.derivative(x, single_axis(o));
  throw std::runtime_error("second derivatives not supported by the wave sampler");
}

Point world(const Point& x0, const pnsolver::cas::Position& p, double h) {
  return {x0[0] + 0.5 * h * p[0], x0[1] + 0.5 * h * p[1], x0[2] + 0.5 * h * p[2]};
}

// Positive smooth extinction and scattering fields.
struct Medium {
  oracle::Wave st{0.5, {0.7, -0.4, 0.5}, 0.3};
  oracle::Wave ss{0.3, {-0.3, 0.6, 0.2}, 1.1};
  double sigma_t(const Point& x) const { return 2.0 + st.value(x); }
  double sigma_s(const Point& x) const { return 1.0 + ss.value(x); }
};

Refinement finish(Refinement r) {
  for (std::size_t i = 1; i < r.h.size(); ++i)
    r.pairwise_slopes.push_back(std::log(r.error[i - 1] / r.error[i]) / std::log(r.h[i - 1] / r.h[i]));
  r.fitted_slope = oracle::convergence_slope(r.h, r.error);
  return r;
}

}  // namespace

MomentCheck moment_oracle(int order, int points, std::uint64_t seed) {
  const auto set = pnsolver::build_pn(order, 3, {true, false, false, false});
  std::mt19937_64 rng(seed);
  std::vector<oracle::Wave> waves;
  for (int i = 0; i < set.size(); ++i) waves.push_back(oracle::random_wave(rng));
  const auto nodes = oracle::sphere_nodes(2 * order + 8, 4 * order + 12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  MomentCheck check;
  for (int p = 0; p < points; ++p) {
    const Point x{u(rng), u(rng), u(rng)};
    Bindings b;
    b.sampler = [&](const Expr& leaf, const DerivativeOrders& o) {
      return wave_sample(waves[static_cast<size_t>(set.unknown_index(*leaf.index()))], x, o);
    };
    std::vector<double> built;
    std::vector<double> quad;
    double scale = 0.0;
    for (const auto& eq : set.equations) {
      built.push_back(pnsolver::cas::evaluate(eq.expr, b));
      double q = 0.0;
      for (const auto& n : nodes) {
        const Point w{std::sin(n.theta) * std::cos(n.phi), std::sin(n.theta) * std::sin(n.phi), std::cos(n.theta)};
        double streaming = 0.0;
        for (int i = 0; i < set.size(); ++i) {
          const ShIndex idx = set.unknowns[static_cast<size_t>(i)];
          double directional = 0.0;
          for (int a = 0; a < 3; ++a) directional += w[static_cast<size_t>(a)] * waves[static_cast<size_t>(i)].derivative(x, a);
          streaming += directional * oracle::real_sh(idx.l, idx.m, n.theta, n.phi);
        }
        q += n.weight * oracle::real_sh(eq.index.l, eq.index.m, n.theta, n.phi) * streaming;
      }
      quad.push_back(q);
      scale = std::max(scale, std::abs(q));
    }
    for (std::size_t i = 0; i < built.size(); ++i) {
      check.max_relative_error = std::max(check.max_relative_error, std::abs(built[i] - quad[i]) / scale);
      ++check.comparisons;
    }
  }
  return check;
}

Refinement cda_refinement(int dim, const std::vector<double>& hs) {
  const auto set = pnsolver::build_cda(dim);
  const auto placement = pnsolver::assign_placement(set);
  const auto rows = pnsolver::discretize(set, placement);
  const Medium medium;
  const oracle::Wave u{1.0, {1.3, 0.7, dim == 3 ? 0.9 : 0.0}, 0.4};
  const oracle::Wave q{0.5, {0.4, -0.8, dim == 3 ? 0.6 : 0.0}, 0.2};
  const Point x0{0.31, -0.17, dim == 3 ? 0.23 : 0.0};
  const double lambda0 = std::sqrt(4.0 * std::numbers::pi);
  const double p00 = 0.2;

  // div((1/(3 st)) grad u) - (st - ss lambda0 p00) u + q, with the divergence
  // expanded by hand: (lap u)/(3 st) - (grad st . grad u)/(3 st^2).
  double laplacian = 0.0;
  double cross = 0.0;
  const double phase = u.k[0] * x0[0] + u.k[1] * x0[1] + u.k[2] * x0[2] + u.phase;
  for (int a = 0; a < dim; ++a) {
    laplacian += -u.amplitude * u.k[static_cast<size_t>(a)] * u.k[static_cast<size_t>(a)] * std::sin(phase);
    cross += medium.st.derivative(x0, a) * u.derivative(x0, a);
  }
  const double st = medium.sigma_t(x0);
  const double exact = laplacian / (3.0 * st) - cross / (3.0 * st * st) -
                       (st - medium.sigma_s(x0) * lambda0 * p00) * u.value(x0) + q.value(x0);

  Refinement r;
  for (double h : hs) {
    Bindings b;
    b.symbols["h"] = h;
    b.sampler = [&](const Expr& leaf, const DerivativeOrders&) {
      const Point x = world(x0, *leaf.position(), h);
      if (leaf.is(Kind::unknown)) return u.value(x);
      if (leaf.name() == "sigma_t") return medium.sigma_t(x);
      if (leaf.name() == "sigma_s") return medium.sigma_s(x);
      if (leaf.name() == "p") return p00;
      return q.value(x);
    };
    r.h.push_back(h);
    r.error.push_back(std::abs(pnsolver::cas::evaluate(rows.front().expr, b) - exact));
  }
  return finish(r);
}

Refinement pn_refinement(int order, int dim, const std::vector<double>& hs) {
  const auto set = pnsolver::build_pn(order, dim);
  const auto placement = pnsolver::assign_placement(set);
  const auto rows = pnsolver::discretize(set, placement);
  const Medium medium;
  std::mt19937_64 rng(1234);
  std::vector<oracle::Wave> L;
  std::vector<oracle::Wave> Q;
  for (int i = 0; i < set.size(); ++i) {
    L.push_back(oracle::random_wave(rng, 1.5));
    Q.push_back(oracle::random_wave(rng, 1.5));
    if (dim == 2) L.back().k[2] = Q.back().k[2] = 0.0;
  }
  const std::vector<double> phase{1.0 / std::sqrt(4.0 * std::numbers::pi), 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  const Point x0{0.12, 0.34, dim == 3 ? -0.21 : 0.0};

  auto leaf_value = [&](const Expr& leaf, const Point& x, const DerivativeOrders& o) {
    if (leaf.is(Kind::unknown)) return wave_sample(L[static_cast<size_t>(set.unknown_index(*leaf.index()))], x, o);
    if (order_total(o) != 0) throw std::runtime_error("derivative of a parameter field");
    if (leaf.name() == "sigma_t") return medium.sigma_t(x);
    if (leaf.name() == "sigma_s") return medium.sigma_s(x);
    if (leaf.name() == "p") return phase[static_cast<size_t>(leaf.index()->l)];
    return Q[static_cast<size_t>(set.unknown_index(*leaf.index()))].value(x);
  };

  Refinement r;
  for (double h : hs) {
    double worst = 0.0;
    for (std::size_t e = 0; e < rows.size(); ++e) {
      const Point xr = world(x0, rows[e].at, h);
      Bindings exact_b;
      exact_b.sampler = [&](const Expr& leaf, const DerivativeOrders& o) { return leaf_value(leaf, xr, o); };
      const double exact = pnsolver::cas::evaluate(set.equations[e].expr, exact_b);
      Bindings b;
      b.symbols["h"] = h;
      b.sampler = [&](const Expr& leaf, const DerivativeOrders& o) {
        return leaf_value(leaf, world(x0, *leaf.position(), h), o);
      };
      worst = std::max(worst, std::abs(pnsolver::cas::evaluate(rows[e].expr, b) - exact));
    }
    r.h.push_back(h);
    r.error.push_back(worst);
  }
  return finish(r);
}

}  // namespace criteria
