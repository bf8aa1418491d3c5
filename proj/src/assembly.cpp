#include "pnsolver/assembly.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "pnsolver/errors.hpp"

namespace pnsolver {

namespace {

struct ResolvedKey {
  const std::vector<double>* values = nullptr;  // per voxel; null means `constant`
  double constant = 0.0;
  VoxelOffset offset{};
};

std::vector<ResolvedKey> resolve_keys(const StencilProgram& program, const ProblemSpec& problem) {
  int max_l = 0;
  for (const auto& key : program.field_keys)
    if (key.name == "p" && key.index) max_l = std::max(max_l, key.index->l);
  const std::vector<double> phase = sh::henyey_greenstein_coefficients(problem.phase_g, max_l);

  std::vector<ResolvedKey> out;
  for (const auto& key : program.field_keys) {
    ResolvedKey r;
    r.offset = key.offset;
    if (key.name == "sigma_t" && !key.index) {
      r.values = &problem.sigma_t;
    } else if (key.name == "sigma_s" && !key.index) {
      r.values = &problem.sigma_s;
    } else if (key.name == "p" && key.index) {
      r.constant = key.index->m == 0 ? phase[static_cast<size_t>(key.index->l)] : 0.0;
    } else if (key.name == "Q" && key.index) {
      const auto it = problem.emission.find(*key.index);
      if (it != problem.emission.end()) r.values = &it->second;
    } else {
      throw ConfigError("stencil references unknown parameter field " + to_string(key));
    }
    out.push_back(r);
  }
  return out;
}

int clamp_axis(int x, int n) { return std::clamp(x, 0, n - 1); }

void gather(const std::vector<ResolvedKey>& keys, const GridSpec& grid, int i, int j, int k,
            std::span<double> slots) {
  const auto& res = grid.resolution;
  for (std::size_t s = 0; s < keys.size(); ++s) {
    const ResolvedKey& key = keys[s];
    if (!key.values) {
      slots[s] = key.constant;
      continue;
    }
    const int x = clamp_axis(i + key.offset[0], res[0]);
    const int y = clamp_axis(j + key.offset[1], res[1]);
    const int z = clamp_axis(k + key.offset[2], res[2]);
    slots[s] = (*key.values)[grid.voxel(x, y, z)];
  }
  slots[keys.size()] = grid.h;
}

}  // namespace

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p)
      s += val[p] * x[static_cast<size_t>(col[p])];
    y[static_cast<size_t>(r)] = s;
  }
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(static_cast<size_t>(cols) + 1, 0);
  for (int c : col) ++t.row_ptr[static_cast<size_t>(c) + 1];
  std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
  t.col.resize(col.size());
  t.val.resize(val.size());
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int r = 0; r < rows; ++r)
    for (std::size_t p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p) {
      const std::size_t q = next[static_cast<size_t>(col[p])]++;
      t.col[q] = r;
      t.val[q] = val[p];
    }
  return t;
}

double CsrMatrix::at(int r, int c) const {
  for (std::size_t p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p)
    if (col[p] == c) return val[p];
  return 0.0;
}

void gather_slots(const StencilProgram& program, const ProblemSpec& problem, int i, int j, int k,
                  std::span<double> slots) {
  gather(resolve_keys(program, problem), problem.grid, i, j, k, slots);
}

SparseSystem assemble(const StencilProgram& program, const ProblemSpec& problem) {
  return assemble(program, problem, problem.bc);
}

SparseSystem assemble(const StencilProgram& program, const ProblemSpec& problem, Boundary bc) {
  const GridSpec& grid = problem.grid;
  if (grid.dim != program.dim)
    throw ConfigError("problem is " + std::to_string(grid.dim) + "D but the stencil is " + std::to_string(program.dim) + "D");
  const std::vector<ResolvedKey> keys = resolve_keys(program, problem);
  const int U = static_cast<int>(program.unknowns.size());
  const std::size_t voxels = grid.voxel_count();
  const std::size_t total_rows = voxels * static_cast<std::size_t>(U);
  if (total_rows > static_cast<std::size_t>(std::numeric_limits<int>::max()))
    throw ConfigError("system too large");

  std::size_t per_voxel = 0;
  std::vector<std::size_t> row_base(static_cast<size_t>(U));
  for (int u = 0; u < U; ++u) {
    row_base[static_cast<size_t>(u)] = per_voxel;
    per_voxel += program.rows[static_cast<size_t>(u)].entries.size();
  }
  std::vector<int> cols(voxels * per_voxel, -1);
  std::vector<double> vals(voxels * per_voxel, 0.0);
  SparseSystem sys;
  sys.grid = grid;
  sys.unknowns_per_voxel = U;
  sys.Q.assign(total_rows, 0.0);

  const auto& res = grid.resolution;
#pragma omp parallel
  {
    std::vector<double> slots(static_cast<size_t>(program.slot_count()));
    std::vector<double> coefficients;
    std::vector<double> stack;
#pragma omp for schedule(static)
    for (std::int64_t vi = 0; vi < static_cast<std::int64_t>(voxels); ++vi) {
      const std::size_t v = static_cast<std::size_t>(vi);
      const int i = static_cast<int>(v % static_cast<size_t>(res[0]));
      const int j = static_cast<int>(v / static_cast<size_t>(res[0]) % static_cast<size_t>(res[1]));
      const int k = static_cast<int>(v / (static_cast<size_t>(res[0]) * static_cast<size_t>(res[1])));
      gather(keys, grid, i, j, k, slots);
      for (int u = 0; u < U; ++u) {
        const StencilRow& row = program.rows[static_cast<size_t>(u)];
        coefficients.resize(row.entries.size());
        double rhs = 0.0;
        evaluate_row(row, slots, coefficients, rhs, stack);
        sys.Q[v * static_cast<size_t>(U) + static_cast<size_t>(u)] = rhs;
        const std::size_t base = v * per_voxel + row_base[static_cast<size_t>(u)];
        for (std::size_t e = 0; e < row.entries.size(); ++e) {
          const StencilEntry& entry = row.entries[e];
          std::array<int, 3> t{i + entry.voxel_offset[0], j + entry.voxel_offset[1], k + entry.voxel_offset[2]};
          bool inside = true;
          for (int a = 0; a < 3; ++a) inside = inside && t[static_cast<size_t>(a)] >= 0 && t[static_cast<size_t>(a)] < res[static_cast<size_t>(a)];
          if (!inside) {
            if (bc == Boundary::dirichlet) continue;
            for (int a = 0; a < 3; ++a) t[static_cast<size_t>(a)] = clamp_axis(t[static_cast<size_t>(a)], res[static_cast<size_t>(a)]);
          }
          cols[base + e] = static_cast<int>(grid.voxel(t[0], t[1], t[2]) * static_cast<size_t>(U)) + entry.target_unknown;
          vals[base + e] = coefficients[e];
        }
      }
    }
  }

  // Compact into CSR; duplicates (Neumann redirects) merge in stencil order.
  CsrMatrix& A = sys.A;
  A.rows = A.cols = static_cast<int>(total_rows);
  A.row_ptr.assign(total_rows + 1, 0);
  A.col.reserve(cols.size());
  A.val.reserve(vals.size());
  std::vector<std::pair<int, double>> buffer;
  for (std::size_t v = 0; v < voxels; ++v)
    for (int u = 0; u < U; ++u) {
      const std::size_t base = v * per_voxel + row_base[static_cast<size_t>(u)];
      const std::size_t count = program.rows[static_cast<size_t>(u)].entries.size();
      buffer.clear();
      for (std::size_t e = 0; e < count; ++e)
        if (cols[base + e] >= 0) buffer.emplace_back(cols[base + e], vals[base + e]);
      std::stable_sort(buffer.begin(), buffer.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t p = 0; p < buffer.size(); ++p) {
        if (p > 0 && buffer[p].first == buffer[p - 1].first) {
          A.val.back() += buffer[p].second;
          continue;
        }
        A.col.push_back(buffer[p].first);
        A.val.push_back(buffer[p].second);
      }
      A.row_ptr[v * static_cast<size_t>(U) + static_cast<size_t>(u) + 1] = A.val.size();
    }
  sys.At = A.transpose();
  return sys;
}

}  // namespace pnsolver
