#pragma once

// Benchmark problem setups and the Monte Carlo reference oracle.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pnsolver/sh.hpp"

namespace pnsolver {

using sh::ShIndex;

enum class Boundary { dirichlet, neumann };

std::string to_string(Boundary bc);
Boundary parse_boundary(const std::string& text);

/// Regular voxel grid. In 2D resolution[2] == 1. Voxel (i,j,k) has its centre
/// at origin + (i+0.5, j+0.5, k+0.5) * h.
struct GridSpec {
  int dim = 3;
  std::array<int, 3> resolution{1, 1, 1};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  double h = 1.0;

  std::size_t voxel_count() const;
  std::size_t voxel(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * resolution[1] + j) * resolution[0] + i;
  }
  std::array<double, 3> centre(int i, int j, int k) const;
  /// Index of the voxel nearest the domain centre along each axis (floor(res/2)).
  std::array<int, 3> centre_voxel() const;
};

struct ProblemSpec {
  std::string name;
  GridSpec grid;
  std::vector<double> sigma_t;  // per voxel, x fastest
  std::vector<double> sigma_s;
  double phase_g = 0.0;  // Henyey-Greenstein asymmetry of the zonal phase function
  std::map<ShIndex, std::vector<double>> emission;  // Q^{l,m} per voxel; absent means 0
  Boundary bc = Boundary::dirichlet;
  double floor = 0.0;  // sigma_t floor already applied

  double albedo_max() const;
};

/// 7x7 lattice, 71x71 voxels: absorbing blocks (sigma_t 10, sigma_s 0) in a
/// checkerboard over the inner 5x5 blocks, scattering (sigma_t = sigma_s = 1)
/// elsewhere, unit isotropic source in the central block.
ProblemSpec make_checkerboard(int resolution = 71);

/// True if block (bx,by) of the 7x7 lattice is absorbing.
bool checkerboard_absorber(int bx, int by);

struct PointSourceParams {
  int resolution = 80;
  double sigma_t = 8.0;
  double albedo = 0.9;
  double half_extent = 2.0;  // domain is [-half_extent, half_extent]^3
};

/// Homogeneous cube with a unit isotropic point emitter deposited in the
/// centre voxel, Q00 = 1 / (h^3 sqrt(4 pi)).
ProblemSpec make_pointsource(const PointSourceParams& params = {});

struct HeterogeneousParams {
  int resolution = 32;
  std::uint64_t seed = 1;
  double sigma_max = 20.0;
  double albedo = 0.9;
  double vacuum_fraction = 0.2;  // share of voxels with sigma_t = 0
  int lattice = 5;               // value-noise lattice cells per axis
};

/// Value-noise density on the unit cube with vacuum pockets; a collimated
/// beam entering through z = 1 is single-scattered into Q00.
ProblemSpec make_heterogeneous(const HeterogeneousParams& params = {});

/// sigma_t' = max(sigma_t, tau); sigma_s unchanged.
ProblemSpec floor_sigma_t(const ProblemSpec& spec, double tau);

/// Throws AdmissionError unless sigma_t > 0, 0 <= sigma_s <= sigma_t and all
/// fields are finite.
void check_admissible(const ProblemSpec& spec);

double vacuum_fraction(const ProblemSpec& spec);

struct ShellEstimate {
  double r_inner;
  double r_outer;
  double fluence;  // shell-averaged
  double std_error;
};

struct McResult {
  std::vector<ShellEstimate> shells;
  double absorbed;  // total absorbed power, source power 1
  double absorbed_std_error;
  std::uint64_t paths;
};

/// Isotropic unit point source in an infinite homogeneous medium; implicit
/// capture with Russian roulette and a collision estimator binned into the
/// shells [edges[i], edges[i+1]). Deterministic for a given seed regardless of
/// thread count.
McResult mc_fluence_oracle(double sigma_t, double albedo, const std::vector<double>& edges,
                           std::uint64_t paths, std::uint64_t seed);

}  // namespace pnsolver
