#include "pnsolver/field.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pnsolver/errors.hpp"
#include "pnsolver/render.hpp"

namespace pnsolver {

namespace {

double parse_double(std::string_view text) {
  double value = 0.0;
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError("bad number '" + std::string(text) + "'");
  return value;
}

}  // namespace

SolutionField make_staggered_field(const StencilProgram& program, const GridSpec& grid, std::vector<double> values) {
  SolutionField f;
  f.grid = grid;
  f.order = program.order;
  f.unknowns = program.unknowns;
  if (values.size() != grid.voxel_count() * f.unknowns.size()) throw Error("solution size does not match grid");
  f.values = std::move(values);
  f.placement = program.placement;
  f.collocated = false;
  return f;
}

SolutionField unstagger(const SolutionField& staggered, Boundary bc) {
  if (staggered.collocated) return staggered;
  SolutionField out = staggered;
  out.collocated = true;
  const auto& res = staggered.grid.resolution;
  const int U = staggered.unknown_count();
  for (int u = 0; u < U; ++u) {
    const Position& o = staggered.placement.offset(staggered.unknowns[static_cast<size_t>(u)]);
    std::vector<int> axes;
    for (int a = 0; a < 3; ++a)
      if (o[static_cast<size_t>(a)] != 0) axes.push_back(a);
    if (axes.empty()) continue;
    const int n = static_cast<int>(axes.size());
    const double weight = 1.0 / (1 << n);
    for (int k = 0; k < res[2]; ++k)
      for (int j = 0; j < res[1]; ++j)
        for (int i = 0; i < res[0]; ++i) {
          double sum = 0.0;
          for (int mask = 0; mask < (1 << n); ++mask) {
            std::array<int, 3> s{i, j, k};
            bool inside = true;
            for (int b = 0; b < n; ++b) {
              auto& c = s[static_cast<size_t>(axes[static_cast<size_t>(b)])];
              if (mask >> b & 1) c -= 1;
              if (c < 0) {
                inside = false;
                c = 0;
              }
            }
            if (!inside && bc == Boundary::dirichlet) continue;
            sum += staggered.at(staggered.grid.voxel(s[0], s[1], s[2]), u);
          }
          out.at(out.grid.voxel(i, j, k), u) = weight * sum;
        }
  }
  return out;
}

double reconstruct_radiance(const SolutionField& field, const std::array<double, 3>& x, const sh::Vec3& dir) {
  if (!field.collocated) throw Error("reconstruct_radiance needs a collocated field");
  const GridSpec& g = field.grid;
  std::array<int, 3> i0{};
  std::array<double, 3> t{};
  for (int a = 0; a < g.dim; ++a) {
    const auto A = static_cast<size_t>(a);
    const double lo = g.origin[A];
    const double hi = lo + g.resolution[A] * g.h;
    if (!(x[A] >= lo && x[A] <= hi)) throw DomainError("position outside the domain");
    // continuous voxel-centre coordinate, clamped to the outermost centres
    const double c = std::clamp((x[A] - lo) / g.h - 0.5, 0.0, static_cast<double>(g.resolution[A] - 1));
    i0[A] = std::min(static_cast<int>(c), std::max(g.resolution[A] - 2, 0));
    t[A] = c - i0[A];
  }
  const int U = field.unknown_count();
  std::vector<double> coefficient(static_cast<size_t>(U), 0.0);
  const int corners = 1 << g.dim;
  for (int corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    std::array<int, 3> v{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
      const auto A = static_cast<size_t>(a);
      const int bit = corner >> a & 1;
      v[A] = std::min(i0[A] + bit, g.resolution[A] - 1);
      w *= bit ? t[A] : 1.0 - t[A];
    }
    if (w == 0.0) continue;
    const std::size_t voxel = g.voxel(v[0], v[1], v[2]);
    for (int u = 0; u < U; ++u) coefficient[static_cast<size_t>(u)] += w * field.at(voxel, u);
  }
  double radiance = 0.0;
  for (int u = 0; u < U; ++u) {
    const ShIndex idx = field.unknowns[static_cast<size_t>(u)];
    radiance += coefficient[static_cast<size_t>(u)] * sh::real_sh(idx.l, idx.m, dir);
  }
  return radiance;
}

std::vector<double> fluence(const SolutionField& field) {
  const double s = std::sqrt(4.0 * std::numbers::pi);
  std::vector<double> out(field.grid.voxel_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = s * field.at(v, 0);
  return out;
}

std::vector<ProfilePoint> line_profile(const SolutionField& field) {
  const auto c = field.grid.centre_voxel();
  const double s = std::sqrt(4.0 * std::numbers::pi);
  std::vector<ProfilePoint> out;
  for (int i = c[0]; i < field.grid.resolution[0]; ++i)
    out.push_back({(i - c[0]) * field.grid.h, s * field.at(field.grid.voxel(i, c[1], c[2]), 0), -1.0});
  return out;
}

void write_field(const std::string& path, const SolutionField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  const auto& r = field.grid.resolution;
  const auto& o = field.grid.origin;
  os << "PNFLD1\n"
     << "dim " << field.grid.dim << "\n"
     << "resolution " << r[0] << " " << r[1] << " " << r[2] << "\n"
     << "unknowns " << field.unknown_count() << "\n"
     << "order " << field.order << "\n"
     << "little_endian " << (std::endian::native == std::endian::little ? 1 : 0) << "\n"
     << "spacing " << cas::format_number(field.grid.h) << "\n"
     << "origin " << cas::format_number(o[0]) << " " << cas::format_number(o[1]) << " " << cas::format_number(o[2])
     << "\n"
     << "data\n";
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!os) throw Error("failed writing " + path);
}

SolutionField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(is, line) || line != "PNFLD1") throw ParseError(path + ": not a PNFLD1 file");
  SolutionField f;
  f.collocated = true;
  int unknowns = -1;
  int little = -1;
  bool have_dim = false, have_res = false, have_order = false;
  while (std::getline(is, line) && line != "data") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dim") {
      ls >> f.grid.dim;
      have_dim = true;
    } else if (key == "resolution") {
      ls >> f.grid.resolution[0] >> f.grid.resolution[1] >> f.grid.resolution[2];
      have_res = true;
    } else if (key == "unknowns") {
      ls >> unknowns;
    } else if (key == "order") {
      ls >> f.order;
      have_order = true;
    } else if (key == "little_endian") {
      ls >> little;
    } else if (key == "spacing") {
      std::string v;
      ls >> v;
      f.grid.h = parse_double(v);
    } else if (key == "origin") {
      for (auto& c : f.grid.origin) {
        std::string v;
        ls >> v;
        c = parse_double(v);
      }
    } else {
      throw ParseError(path + ": unknown header line '" + line + "'");
    }
    if (ls.fail()) throw ParseError(path + ": malformed header line '" + line + "'");
  }
  if (!have_dim || !have_res || !have_order || unknowns < 1 || little < 0) throw ParseError(path + ": incomplete header");
  if ((little == 1) != (std::endian::native == std::endian::little)) throw ParseError(path + ": byte order mismatch");
  for (int i = 0; i < unknowns; ++i) f.unknowns.push_back(sh_from_flat(i, f.grid.dim));
  f.values.resize(f.grid.voxel_count() * static_cast<size_t>(unknowns));
  is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (is.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double)))
    throw ParseError(path + ": truncated data");
  return f;
}

void write_profile_csv(const std::string& path, const std::vector<ProfilePoint>& profile) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  const bool with_error = !profile.empty() && profile.front().std_error >= 0.0;
  os << (with_error ? "r,value,stderr\n" : "r,value\n");
  for (const auto& p : profile) {
    os << cas::format_number(p.r) << "," << cas::format_number(p.value);
    if (with_error) os << "," << cas::format_number(p.std_error);
    os << "\n";
  }
}

std::vector<ProfilePoint> read_profile_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path + ": empty profile");
  const bool with_error = line == "r,value,stderr";
  if (!with_error && line != "r,value") throw ParseError(path + ": unexpected header '" + line + "'");
  std::vector<ProfilePoint> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != (with_error ? 3u : 2u)) throw ParseError(path + ": bad row '" + line + "'");
    ProfilePoint p{parse_double(cells[0]), parse_double(cells[1]), with_error ? parse_double(cells[2]) : -1.0};
    out.push_back(p);
  }
  return out;
}

double interpolate_profile(const std::vector<ProfilePoint>& profile, double r) {
  if (profile.empty()) throw DomainError("empty profile");
  if (r < profile.front().r || r > profile.back().r) throw DomainError("r outside the tabulated profile");
  const auto it = std::lower_bound(profile.begin(), profile.end(), r,
                                   [](const ProfilePoint& p, double x) { return p.r < x; });
  if (it->r == r || it == profile.begin()) return it->value;
  const auto& a = *(it - 1);
  const auto& b = *it;
  const double t = (r - a.r) / (b.r - a.r);
  return a.value + t * (b.value - a.value);
}

}  // namespace pnsolver
