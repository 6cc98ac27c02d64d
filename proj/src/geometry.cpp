#include "nodal_lab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nodal {

Manifold Manifold::circle() { return {ManifoldKind::Circle, 1}; }

Manifold Manifold::torus(int dim) {
  if (dim != 2 && dim != 3) throw InvalidArgument("flat torus dimension must be 2 or 3");
  return {ManifoldKind::FlatTorus, dim};
}

Manifold Manifold::sphere() { return {ManifoldKind::Sphere2, 2}; }

Manifold Manifold::parse(std::string_view name) {
  if (name == "circle") return circle();
  if (name == "torus2") return torus(2);
  if (name == "torus3") return torus(3);
  if (name == "sphere") return sphere();
  throw InvalidArgument("unknown manifold '" + std::string(name) + "'");
}

double Manifold::volume() const {
  switch (kind_) {
    case ManifoldKind::Circle:
      return kTwoPi;
    case ManifoldKind::FlatTorus:
      return std::pow(kTwoPi, dim_);
    case ManifoldKind::Sphere2:
      return 4.0 * kPi;
  }
  return 0.0;
}

std::string Manifold::name() const {
  switch (kind_) {
    case ManifoldKind::Circle:
      return "circle";
    case ManifoldKind::FlatTorus:
      return "torus" + std::to_string(dim_);
    case ManifoldKind::Sphere2:
      return "sphere";
  }
  return "?";
}

QuadratureGrid build_grid(const Manifold& manifold, int resolution) {
  if (resolution < 4) throw InvalidArgument("build_grid: resolution must be >= 4");
  QuadratureGrid grid{manifold, resolution, {}, {}};
  const double h = kTwoPi / resolution;
  switch (manifold.kind()) {
    case ManifoldKind::Circle:
      for (int i = 0; i < resolution; ++i) {
        grid.nodes.push_back({i * h, 0.0, 0.0});
        grid.weights.push_back(h);
      }
      break;
    case ManifoldKind::FlatTorus: {
      const int n = manifold.dim();
      const double w = std::pow(h, n);
      const int nz = n == 3 ? resolution : 1;
      for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j)
          for (int l = 0; l < nz; ++l) {
            grid.nodes.push_back({i * h, j * h, n == 3 ? l * h : 0.0});
            grid.weights.push_back(w);
          }
      break;
    }
    case ManifoldKind::Sphere2: {
      const GaussRule rule = gauss_legendre(resolution);
      const int n_lon = 2 * resolution;
      const double h_lon = kTwoPi / n_lon;
      // Nodes ordered by increasing colatitude.
      for (int i = resolution - 1; i >= 0; --i) {
        const double theta = std::acos(rule.nodes[i]);
        for (int j = 0; j < n_lon; ++j) {
          grid.nodes.push_back({theta, j * h_lon, 0.0});
          grid.weights.push_back(rule.weights[i] * h_lon);
        }
      }
      break;
    }
  }
  return grid;
}

double integrate(const QuadratureGrid& grid, std::span<const double> samples) {
  if (samples.size() != grid.nodes.size())
    throw InvalidArgument("integrate: sample count does not match node count");
  std::vector<double> terms(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) terms[i] = grid.weights[i] * samples[i];
  return pairwise_sum(terms);
}

double integrate(const QuadratureGrid& grid, const std::function<double(const Point&)>& fn) {
  std::vector<double> samples(grid.nodes.size());
  parallel_blocks(samples.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) samples[i] = fn(grid.nodes[i]);
  });
  return integrate(grid, samples);
}

namespace {

constexpr int kPieceOrder = 6;

const GaussRule& piece_rule() {
  static const GaussRule rule = gauss_legendre(kPieceOrder);
  return rule;
}

// Integrates over [a, a + n*h] along one chart line. `at(t)` maps the line
// parameter to a chart point, `weight(t)` is the volume density along the line.
void integrate_line(double a, double h, int n, const std::function<Point(double)>& at,
                    const std::function<double(double)>& density, const VectorIntegrand& integrand,
                    std::size_t n_components, const std::function<double(const Point&)>& split,
                    double level, std::span<double> result) {
  const GaussRule& rule = piece_rule();
  std::vector<double> s(n + 1);
  for (int i = 0; i <= n; ++i) s[i] = split(at(a + i * h)) - level;

  std::vector<double> contrib(static_cast<std::size_t>(n) * n_components, 0.0);
  std::vector<double> buf(n_components);
  auto add_piece = [&](double u, double v, std::size_t slot) {
    if (!(v > u)) return;
    const double mid = 0.5 * (u + v);
    const double half = 0.5 * (v - u);
    for (int q = 0; q < kPieceOrder; ++q) {
      const double t = mid + half * rule.nodes[q];
      std::fill(buf.begin(), buf.end(), 0.0);
      integrand(at(t), buf);
      const double w = half * rule.weights[q] * density(t);
      for (std::size_t k = 0; k < n_components; ++k) contrib[slot * n_components + k] += w * buf[k];
    }
  };

  for (int i = 0; i < n; ++i) {
    const double u = a + i * h;
    const double v = u + h;
    if ((s[i] < 0.0 && s[i + 1] > 0.0) || (s[i] > 0.0 && s[i + 1] < 0.0)) {
      const double r = bracketed_root([&](double t) { return split(at(t)) - level; }, u, v, s[i],
                                      s[i + 1]);
      add_piece(u, r, i);
      add_piece(r, v, i);
    } else {
      add_piece(u, v, i);
    }
  }
  std::vector<double> column(n);
  for (std::size_t k = 0; k < n_components; ++k) {
    for (int i = 0; i < n; ++i) column[i] = contrib[static_cast<std::size_t>(i) * n_components + k];
    result[k] = pairwise_sum(column);
  }
}

}  // namespace

std::vector<double> integrate_split(const Manifold& manifold, int resolution,
                                    const VectorIntegrand& integrand, std::size_t n_components,
                                    const std::function<double(const Point&)>& split, double level) {
  if (resolution < 4) throw InvalidArgument("integrate_split: resolution must be >= 4");
  const double h = kTwoPi / resolution;
  std::size_t n_lines = 1;
  double outer_weight = 1.0;
  double line_start = 0.0;
  double line_step = h;
  std::function<double(double)> density = [](double) { return 1.0; };
  std::function<Point(std::size_t, double)> at;

  switch (manifold.kind()) {
    case ManifoldKind::Circle:
      at = [](std::size_t, double t) { return Point{t, 0.0, 0.0}; };
      break;
    case ManifoldKind::FlatTorus:
      if (manifold.dim() == 2) {
        n_lines = resolution;
        outer_weight = h;
        at = [h](std::size_t line, double t) { return Point{t, line * h, 0.0}; };
      } else {
        n_lines = static_cast<std::size_t>(resolution) * resolution;
        outer_weight = h * h;
        const std::size_t res = resolution;
        at = [h, res](std::size_t line, double t) {
          return Point{t, static_cast<double>(line / res) * h, static_cast<double>(line % res) * h};
        };
      }
      break;
    case ManifoldKind::Sphere2: {
      n_lines = 2 * static_cast<std::size_t>(resolution);
      const double h_lon = kTwoPi / n_lines;
      outer_weight = h_lon;
      line_step = kPi / resolution;
      density = [](double theta) { return std::sin(theta); };
      at = [h_lon](std::size_t line, double t) { return Point{t, line * h_lon, 0.0}; };
      break;
    }
  }

  std::vector<double> per_line(n_lines * n_components);
  parallel_blocks(n_lines, [&](std::size_t begin, std::size_t end) {
    for (std::size_t line = begin; line < end; ++line) {
      integrate_line(line_start, line_step, resolution,
                     [&](double t) { return at(line, t); }, density, integrand, n_components, split,
                     level, std::span<double>(per_line).subspan(line * n_components, n_components));
    }
  });

  std::vector<double> result(n_components);
  std::vector<double> column(n_lines);
  for (std::size_t k = 0; k < n_components; ++k) {
    for (std::size_t line = 0; line < n_lines; ++line) column[line] = per_line[line * n_components + k];
    result[k] = outer_weight * pairwise_sum(column);
  }
  return result;
}

double integrate_split(const Manifold& manifold, int resolution,
                       const std::function<double(const Point&)>& integrand,
                       const std::function<double(const Point&)>& split, double level) {
  return integrate_split(
      manifold, resolution,
      [&](const Point& p, std::span<double> out) { out[0] = integrand(p); }, 1, split, level)[0];
}

double integrate_line_split(double a, double b, int n_intervals,
                            const std::function<double(double)>& integrand,
                            const std::function<double(double)>& split, double level) {
  if (n_intervals < 1) throw InvalidArgument("integrate_line_split: need at least one interval");
  double result = 0.0;
  integrate_line(
      a, (b - a) / n_intervals, n_intervals, [](double t) { return Point{t, 0.0, 0.0}; },
      [](double) { return 1.0; },
      [&](const Point& p, std::span<double> out) { out[0] = integrand(p[0]); }, 1,
      [&](const Point& p) { return split(p[0]); }, level, std::span<double>(&result, 1));
  return result;
}

Point periodic_delta(const Manifold& manifold, const Point& p, const Point& q) {
  Point d{};
  for (int i = 0; i < manifold.dim(); ++i) d[i] = wrap_to_pi(q[i] - p[i]);
  return d;
}

std::array<double, 3> sphere_embed(const Point& p) {
  const double st = std::sin(p[0]);
  return {st * std::cos(p[1]), st * std::sin(p[1]), std::cos(p[0])};
}

double segment_length(const Manifold& manifold, const Point& p, const Point& q) {
  if (manifold.kind() == ManifoldKind::Sphere2) {
    const auto a = sphere_embed(p);
    const auto b = sphere_embed(q);
    return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  }
  const Point d = periodic_delta(manifold, p, q);
  return std::hypot(d[0], d[1], d[2]);
}

double triangle_area(const Manifold& manifold, const Point& a, const Point& b, const Point& c) {
  if (manifold.kind() != ManifoldKind::FlatTorus || manifold.dim() != 3)
    throw InvalidArgument("triangle_area: only defined on T^3");
  const Point u = periodic_delta(manifold, a, b);
  const Point v = periodic_delta(manifold, a, c);
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  return 0.5 * std::hypot(cx, cy, cz);
}

}  // namespace nodal
