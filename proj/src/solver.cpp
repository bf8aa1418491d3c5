#include "pnsolver/solver.hpp"

#include <chrono>
#include <cmath>

#include "pnsolver/errors.hpp"

namespace pnsolver {

namespace {

constexpr std::size_t kChunk = 8192;

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[static_cast<size_t>(i)] += a * x[static_cast<size_t>(i)];
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const std::size_t begin = static_cast<size_t>(c) * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += a[i] * b[i];
    partial[static_cast<size_t>(c)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double primal_residual(const SparseSystem& sys, std::span<const double> u) {
  std::vector<double> r(sys.Q.size());
  sys.A.multiply(u, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = sys.Q[i] - r[i];
  const double q = norm(sys.Q);
  return q > 0.0 ? norm(r) / q : norm(r);
}

SolveReport solve_normal_cg(const SparseSystem& sys, std::vector<double>& u, const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = static_cast<std::size_t>(sys.A.cols);
  const std::size_t m = static_cast<std::size_t>(sys.A.rows);
  u.assign(n, 0.0);

  std::vector<double> diag(n, 1.0);
  if (options.jacobi) {
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t p = sys.At.row_ptr[c]; p < sys.At.row_ptr[c + 1]; ++p) s += sys.At.val[p] * sys.At.val[p];
      diag[c] = s > 0.0 ? 1.0 / s : 1.0;
    }
  }

  std::vector<double> r(sys.Q);  // Q - A u
  std::vector<double> s(n);      // A^T r
  std::vector<double> z(n);
  std::vector<double> p(n);
  std::vector<double> w(m);
  sys.At.multiply(r, s);

  SolveReport report;
  const double s0 = norm(s);
  const double q0 = norm(sys.Q);
  const auto relative = [](double v, double ref) { return ref > 0.0 ? v / ref : v; };
  double normal = relative(s0, s0);
  double primal = relative(q0, q0);
  report.normal_history.push_back(s0 > 0.0 ? 1.0 : 0.0);
  report.primal_history.push_back(q0 > 0.0 ? 1.0 : 0.0);
  const auto done = [&](double nr, double pr) {
    return nr <= options.tol && (options.primal_tol <= 0.0 || pr <= options.primal_tol);
  };

  if (s0 == 0.0) {
    normal = 0.0;
    primal = relative(norm(r), q0);
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = diag[i] * s[i];
  p = z;
  double gamma = dot(s, z);
  int it = 0;
  while (s0 > 0.0 && !done(normal, primal) && it < options.max_iter) {
    sys.A.multiply(p, w);
    const double ww = dot(w, w);
    if (!(ww > 0.0)) break;
    const double alpha = gamma / ww;
    axpy(alpha, p, u);
    axpy(-alpha, w, r);
    sys.At.multiply(r, s);
    ++it;
    normal = norm(s) / s0;
    primal = relative(norm(r), q0);
    report.normal_history.push_back(normal);
    report.primal_history.push_back(primal);
    if (!std::isfinite(normal)) break;
    for (std::size_t i = 0; i < n; ++i) z[i] = diag[i] * s[i];
    const double gamma_next = dot(s, z);
    const double beta = gamma_next / gamma;
    gamma = gamma_next;
    const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i) p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
  }

  report.iterations = it;
  report.normal_residual = normal;
  report.primal_residual = primal_residual(sys, u);
  report.converged = std::isfinite(normal) && done(normal, report.primal_residual);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace pnsolver
