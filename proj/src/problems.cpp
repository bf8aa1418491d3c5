#include "pnsolver/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pnsolver/errors.hpp"

namespace pnsolver {

namespace {

const double kInvSqrt4Pi = 1.0 / std::sqrt(4.0 * std::numbers::pi);

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

class ValueNoise {
 public:
  ValueNoise(int cells, std::uint64_t seed) : n_(cells + 1), values_(static_cast<size_t>(n_) * n_ * n_) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (auto& v : values_) v = uniform(rng);
  }

  // p in [0,1]^3
  double operator()(const std::array<double, 3>& p) const {
    const int cells = n_ - 1;
    std::array<int, 3> i0{};
    std::array<double, 3> t{};
    for (int k = 0; k < 3; ++k) {
      const double x = std::clamp(p[static_cast<size_t>(k)], 0.0, 1.0) * cells;
      i0[static_cast<size_t>(k)] = std::min(static_cast<int>(x), cells - 1);
      t[static_cast<size_t>(k)] = smoothstep(x - i0[static_cast<size_t>(k)]);
    }
    double value = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
      double w = 1.0;
      std::array<int, 3> c{};
      for (int k = 0; k < 3; ++k) {
        const int bit = corner >> k & 1;
        c[static_cast<size_t>(k)] = i0[static_cast<size_t>(k)] + bit;
        w *= bit ? t[static_cast<size_t>(k)] : 1.0 - t[static_cast<size_t>(k)];
      }
      value += w * values_[(static_cast<size_t>(c[2]) * n_ + c[1]) * n_ + c[0]];
    }
    return value;
  }

 private:
  int n_;
  std::vector<double> values_;
};

}  // namespace

std::string to_string(Boundary bc) { return bc == Boundary::dirichlet ? "dirichlet" : "neumann"; }

Boundary parse_boundary(const std::string& text) {
  if (text == "dirichlet") return Boundary::dirichlet;
  if (text == "neumann") return Boundary::neumann;
  throw ConfigError("boundary must be dirichlet or neumann, got '" + text + "'");
}

std::size_t GridSpec::voxel_count() const {
  return static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
}

std::array<double, 3> GridSpec::centre(int i, int j, int k) const {
  return {origin[0] + (i + 0.5) * h, origin[1] + (j + 0.5) * h, origin[2] + (k + 0.5) * h};
}

std::array<int, 3> GridSpec::centre_voxel() const {
  return {resolution[0] / 2, resolution[1] / 2, dim == 3 ? resolution[2] / 2 : 0};
}

double ProblemSpec::albedo_max() const {
  double a = 0.0;
  for (std::size_t i = 0; i < sigma_t.size(); ++i)
    if (sigma_t[i] > 0.0) a = std::max(a, sigma_s[i] / sigma_t[i]);
  return a;
}

bool checkerboard_absorber(int bx, int by) {
  if (bx < 1 || bx > 5 || by < 1 || by > 5) return false;
  if (bx == 3 && by == 3) return false;
  return (bx + by) % 2 == 0;
}

ProblemSpec make_checkerboard(int resolution) {
  if (resolution < 7) throw ConfigError("checkerboard resolution must be >= 7");
  ProblemSpec spec;
  spec.name = "checkerboard";
  spec.grid.dim = 2;
  spec.grid.resolution = {resolution, resolution, 1};
  spec.grid.h = 7.0 / resolution;
  spec.grid.origin = {0.0, 0.0, -0.5 * spec.grid.h};
  const std::size_t n = spec.grid.voxel_count();
  spec.sigma_t.assign(n, 1.0);
  spec.sigma_s.assign(n, 1.0);
  std::vector<double> q(n, 0.0);
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i) {
      const auto c = spec.grid.centre(i, j, 0);
      const int bx = static_cast<int>(std::floor(c[0]));
      const int by = static_cast<int>(std::floor(c[1]));
      const std::size_t v = spec.grid.voxel(i, j, 0);
      if (checkerboard_absorber(bx, by)) {
        spec.sigma_t[v] = 10.0;
        spec.sigma_s[v] = 0.0;
      }
      if (bx == 3 && by == 3) q[v] = kInvSqrt4Pi;
    }
  spec.emission[{0, 0}] = std::move(q);
  spec.bc = Boundary::dirichlet;
  return spec;
}

ProblemSpec make_pointsource(const PointSourceParams& params) {
  if (params.resolution < 8) throw ConfigError("point source resolution must be >= 8");
  if (!(params.sigma_t > 0.0) || params.albedo < 0.0 || params.albedo > 1.0 || !(params.half_extent > 0.0))
    throw ConfigError("invalid point source parameters");
  ProblemSpec spec;
  spec.name = "pointsource";
  spec.grid.dim = 3;
  spec.grid.resolution = {params.resolution, params.resolution, params.resolution};
  spec.grid.h = 2.0 * params.half_extent / params.resolution;
  spec.grid.origin = {-params.half_extent, -params.half_extent, -params.half_extent};
  const std::size_t n = spec.grid.voxel_count();
  spec.sigma_t.assign(n, params.sigma_t);
  spec.sigma_s.assign(n, params.albedo * params.sigma_t);
  std::vector<double> q(n, 0.0);
  const auto c = spec.grid.centre_voxel();
  const double h = spec.grid.h;
  q[spec.grid.voxel(c[0], c[1], c[2])] = kInvSqrt4Pi / (h * h * h);
  spec.emission[{0, 0}] = std::move(q);
  spec.bc = Boundary::dirichlet;
  return spec;
}

ProblemSpec make_heterogeneous(const HeterogeneousParams& params) {
  if (params.resolution < 4) throw ConfigError("heterogeneous resolution must be >= 4");
  if (params.vacuum_fraction < 0.0 || params.vacuum_fraction >= 1.0) throw ConfigError("vacuum fraction must be in [0,1)");
  ProblemSpec spec;
  spec.name = "heterogeneous";
  spec.grid.dim = 3;
  const int r = params.resolution;
  spec.grid.resolution = {r, r, r};
  spec.grid.h = 1.0 / r;
  spec.grid.origin = {0.0, 0.0, 0.0};
  const std::size_t n = spec.grid.voxel_count();

  const ValueNoise noise(params.lattice, params.seed);
  std::vector<double> density(n);
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) density[spec.grid.voxel(i, j, k)] = noise(spec.grid.centre(i, j, k));

  std::vector<double> sorted = density;
  const auto cut = static_cast<std::ptrdiff_t>(params.vacuum_fraction * static_cast<double>(n));
  std::nth_element(sorted.begin(), sorted.begin() + cut, sorted.end());
  const double threshold = sorted[static_cast<size_t>(cut)];
  const double top = *std::max_element(density.begin(), density.end());

  spec.sigma_t.resize(n);
  spec.sigma_s.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const double t = top > threshold ? (density[v] - threshold) / (top - threshold) : 0.0;
    spec.sigma_t[v] = density[v] < threshold ? 0.0 : params.sigma_max * std::clamp(t, 0.0, 1.0);
    spec.sigma_s[v] = params.albedo * spec.sigma_t[v];
  }

  // Beam travelling along -z from the top face; optical depth to each voxel centre.
  std::vector<double> q(n, 0.0);
  const double h = spec.grid.h;
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      double depth = 0.0;
      for (int k = r - 1; k >= 0; --k) {
        const std::size_t v = spec.grid.voxel(i, j, k);
        const double half = 0.5 * spec.sigma_t[v] * h;
        q[v] = spec.sigma_s[v] * std::exp(-(depth + half)) * kInvSqrt4Pi;
        depth += 2.0 * half;
      }
    }
  spec.emission[{0, 0}] = std::move(q);
  spec.bc = Boundary::dirichlet;
  return spec;
}

ProblemSpec floor_sigma_t(const ProblemSpec& spec, double tau) {
  if (!(tau > 0.0)) throw ConfigError("sigma_t floor must be positive");
  ProblemSpec out = spec;
  for (auto& s : out.sigma_t) s = std::max(s, tau);
  out.floor = std::max(spec.floor, tau);
  return out;
}

void check_admissible(const ProblemSpec& spec) {
  const std::size_t n = spec.grid.voxel_count();
  if (spec.sigma_t.size() != n || spec.sigma_s.size() != n) throw AdmissionError("field size does not match the grid");
  std::size_t vacuum = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const double st = spec.sigma_t[v];
    const double ss = spec.sigma_s[v];
    if (!std::isfinite(st) || !std::isfinite(ss)) throw AdmissionError("non-finite extinction or scattering");
    if (ss < 0.0 || ss > st) throw AdmissionError("sigma_s outside [0, sigma_t] at voxel " + std::to_string(v));
    if (!(st > 0.0)) ++vacuum;
  }
  for (const auto& [index, q] : spec.emission) {
    if (q.size() != n) throw AdmissionError("emission size does not match the grid");
    for (double x : q)
      if (!std::isfinite(x)) throw AdmissionError("non-finite emission");
  }
  if (vacuum > 0)
    throw AdmissionError(std::to_string(vacuum) +
                         " vacuum voxels (sigma_t = 0) make the system singular; set a sigma_t floor");
}

double vacuum_fraction(const ProblemSpec& spec) {
  if (spec.sigma_t.empty()) return 0.0;
  const auto vacuum = std::count_if(spec.sigma_t.begin(), spec.sigma_t.end(), [](double s) { return !(s > 0.0); });
  return static_cast<double>(vacuum) / static_cast<double>(spec.sigma_t.size());
}

McResult mc_fluence_oracle(double sigma_t, double albedo, const std::vector<double>& edges, std::uint64_t paths,
                           std::uint64_t seed) {
  if (!(sigma_t > 0.0) || albedo < 0.0 || albedo > 1.0) throw ConfigError("invalid medium for the MC oracle");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) || edges.front() < 0.0)
    throw ConfigError("shell edges must be ascending, non-negative, at least two");
  if (paths < 2) throw ConfigError("MC oracle needs at least two paths");

  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (paths + kChunk - 1) / kChunk;
  const std::size_t shells = edges.size() - 1;
  std::vector<std::vector<double>> tally(chunks, std::vector<double>(shells, 0.0));
  std::vector<double> absorbed(chunks, 0.0);
  std::vector<std::uint64_t> counts(chunks, 0);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
    const std::uint64_t end = std::min(paths, begin + kChunk);
    auto& t = tally[static_cast<size_t>(c)];
    double& a = absorbed[static_cast<size_t>(c)];
    for (std::uint64_t p = begin; p < end; ++p) {
      std::array<double, 3> x{0.0, 0.0, 0.0};
      double w = 1.0;
      while (w > 0.0) {
        const double mu = 2.0 * uniform(rng) - 1.0;
        const double phi = 2.0 * std::numbers::pi * uniform(rng);
        const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        const double dist = -std::log1p(-uniform(rng)) / sigma_t;
        x[0] += dist * s * std::cos(phi);
        x[1] += dist * s * std::sin(phi);
        x[2] += dist * mu;
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        const auto it = std::upper_bound(edges.begin(), edges.end(), r);
        if (it != edges.begin() && it != edges.end()) t[static_cast<size_t>(it - edges.begin() - 1)] += w / sigma_t;
        a += w * (1.0 - albedo);
        w *= albedo;
        if (w > 0.0 && w < 0.1) {
          if (uniform(rng) < 0.5)
            w *= 2.0;
          else
            w = 0.0;
        }
      }
    }
    counts[static_cast<size_t>(c)] = end - begin;
  }

  McResult result;
  result.paths = paths;
  const double n = static_cast<double>(paths);
  std::vector<double> volume(shells);
  for (std::size_t s = 0; s < shells; ++s)
    volume[s] = 4.0 / 3.0 * std::numbers::pi * (std::pow(edges[s + 1], 3) - std::pow(edges[s], 3));

  // Batch statistics over chunks: per-chunk means weighted by path count.
  auto batch = [&](auto value_of) {
    double total = 0.0;
    for (std::uint64_t c = 0; c < chunks; ++c) total += value_of(c);
    const double mean = total / n;
    double var = 0.0;
    double weight = 0.0;
    for (std::uint64_t c = 0; c < chunks; ++c) {
      const double m = static_cast<double>(counts[c]);
      const double d = value_of(c) / m - mean;
      var += m * d * d;
      weight += m;
    }
    const double se = chunks > 1 ? std::sqrt(var / weight / static_cast<double>(chunks - 1)) : 0.0;
    return std::pair{mean, se};
  };

  for (std::size_t s = 0; s < shells; ++s) {
    const auto [mean, se] = batch([&](std::uint64_t c) { return tally[c][s]; });
    result.shells.push_back({edges[s], edges[s + 1], mean / volume[s], se / volume[s]});
  }
  const auto [mean, se] = batch([&](std::uint64_t c) { return absorbed[c]; });
  result.absorbed = mean;
  result.absorbed_std_error = se;
  return result;
}

}  // namespace pnsolver
