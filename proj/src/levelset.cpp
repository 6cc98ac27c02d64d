#include "nodal_lab/levelset.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <string>

#include "mc_table.hpp"

namespace nodal {

void ExtractionConfig::validate() const {
  if (resolution < 8) throw InvalidArgument("extraction resolution must be >= 8");
  if (newton_steps < 0) throw InvalidArgument("newton_steps must be >= 0");
  if (!(newton_tol >= 0.0)) throw InvalidArgument("newton_tol must be >= 0");
}

namespace {

constexpr int kMaxSubdivisionDepth = 4;

// Chart sampling lattice. Periodic axes wrap; on the sphere the colatitude axis
// runs over pi*i/res for i = 1..res-1, so the caps below pi/res are excluded.
struct SampleLattice {
  Manifold manifold = Manifold::circle();
  std::vector<std::vector<double>> axes;
  std::vector<bool> periodic;
  std::vector<double> values;

  std::size_t size(int axis) const { return axes[axis].size(); }

  // Coordinate of index i along `axis`; i == size wraps to the first node
  // shifted by one period so cells stay unwrapped.
  double coord(int axis, std::size_t i) const {
    const std::size_t n = size(axis);
    if (i < n) return axes[axis][i];
    return axes[axis][i - n] + kTwoPi;
  }
  std::size_t wrap(int axis, std::size_t i) const { return i < size(axis) ? i : i - size(axis); }

  double value(std::size_t i, std::size_t j = 0, std::size_t l = 0) const {
    const std::size_t n1 = axes.size() > 1 ? size(1) : 1;
    const std::size_t n2 = axes.size() > 2 ? size(2) : 1;
    i = wrap(0, i);
    if (axes.size() > 1) j = wrap(1, j);
    if (axes.size() > 2) l = wrap(2, l);
    return values[(i * n1 + j) * n2 + l];
  }

  std::size_t cells(int axis) const { return periodic[axis] ? size(axis) : size(axis) - 1; }
};

SampleLattice sample_lattice(const ScalarField& field, int res) {
  SampleLattice lat;
  lat.manifold = field.manifold();
  const double h = kTwoPi / res;
  auto uniform = [](int n, double step, int first) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = (first + i) * step;
    return v;
  };
  switch (lat.manifold.kind()) {
    case ManifoldKind::Circle:
    case ManifoldKind::FlatTorus:
      for (int a = 0; a < lat.manifold.dim(); ++a) {
        lat.axes.push_back(uniform(res, h, 0));
        lat.periodic.push_back(true);
      }
      break;
    case ManifoldKind::Sphere2:
      lat.axes.push_back(uniform(res - 1, kPi / res, 1));
      lat.periodic.push_back(false);
      lat.axes.push_back(uniform(2 * res, kPi / res, 0));
      lat.periodic.push_back(true);
      break;
  }
  field.sample_tensor(lat.axes, lat.values);
  for (double v : lat.values)
    if (!std::isfinite(v)) throw NumericalError("extract: non-finite field sample");
  return lat;
}

struct Counters {
  std::int64_t ambiguous = 0;
  std::int64_t decider = 0;
  std::int64_t newton_fallbacks = 0;
};

class CellWorker {
 public:
  CellWorker(const ScalarField& field, double level, const ExtractionConfig& config,
             Counters& counters, std::vector<Point>& vertices, std::vector<double>& grad_norms)
      : field_(field), level_(level), config_(config), counters_(counters), vertices_(vertices),
        grad_norms_(grad_norms) {}

  bool inside(double v) const { return v >= level_; }

  struct Vertex {
    Point p;
    double grad_norm;
  };

  // Vertices on the axis-0 edges of one cell row, keyed by column; neighbouring
  // cells then share them bit for bit.
  struct RowCache {
    std::vector<std::optional<Vertex>> edges;
    void reset(std::size_t n) { edges.assign(n, std::nullopt); }
  };

  void emit(const Vertex& v) {
    vertices_.push_back(v.p);
    grad_norms_.push_back(v.grad_norm);
  }
  void emit(const Point& p) { emit(Vertex{p, field_.gradient(p).norm}); }

  // Point on the level set near the crossing of edge a-b: linear interpolation,
  // then safeguarded Newton steps along the chart gradient. If the residual is
  // still above 1e-10 (1 + |c|), the bracketed root on the edge is used.
  Point edge_vertex(const Point& a, double va, const Point& b, double vb) {
    const double c = level_;
    const double t0 = (c - va) / (vb - va);
    Point p;
    for (int i = 0; i < 3; ++i) p[i] = a[i] + t0 * (b[i] - a[i]);
    double r = field_.value(p) - c;
    for (int step = 0; step < config_.newton_steps && std::abs(r) > config_.newton_tol; ++step) {
      const Gradient g = field_.gradient(p);
      const double gg = g.partials[0] * g.partials[0] + g.partials[1] * g.partials[1] +
                        g.partials[2] * g.partials[2];
      if (!(gg > 0.0)) break;
      std::array<double, 3> d;
      for (int i = 0; i < 3; ++i) d[i] = -r * g.partials[i] / gg;
      bool accepted = false;
      for (int halving = 0; halving < 30; ++halving) {
        Point q;
        for (int i = 0; i < 3; ++i) q[i] = p[i] + d[i];
        const double rq = field_.value(q) - c;
        if (std::abs(rq) < std::abs(r)) {
          p = q;
          r = rq;
          accepted = true;
          break;
        }
        for (double& di : d) di *= 0.5;
      }
      if (!accepted) break;
    }
    if (std::abs(r) > 1e-10 * (1.0 + std::abs(c))) {
      auto along = [&](double t) {
        Point q;
        for (int i = 0; i < 3; ++i) q[i] = a[i] + t * (b[i] - a[i]);
        return q;
      };
      const double t = bracketed_root([&](double s) { return field_.value(along(s)) - c; }, 0.0,
                                      1.0, va - c, vb - c);
      const Point q = along(t);
      const double rq = field_.value(q) - c;
      if (std::abs(rq) < std::abs(r)) {
        p = q;
        ++counters_.newton_fallbacks;
      }
    }
    return p;
  }

  Point midpoint(const Point& a, const Point& b) const {
    return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
  }

  // Corners in order (0,0), (1,0), (1,1), (0,1).
  void square(const std::array<Point, 4>& p, const std::array<double, 4>& v, int depth,
              RowCache* cache = nullptr, std::size_t column = 0) {
    static constexpr int kEdges[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    // Endpoints in lattice order, so that each edge is evaluated the same way
    // from both neighbouring cells.
    static constexpr int kCanonical[4][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3}};
    std::array<bool, 4> in;
    for (int k = 0; k < 4; ++k) in[k] = inside(v[k]);
    int crossings[4];
    int n = 0;
    for (int e = 0; e < 4; ++e)
      if (in[kEdges[e][0]] != in[kEdges[e][1]]) crossings[n++] = e;
    if (n == 0) return;
    auto vertex = [&](int e) {
      std::optional<Vertex>* slot = nullptr;
      if (cache && (e == 0 || e == 2)) {
        slot = &cache->edges[column + (e == 2 ? 1 : 0)];
        if (slot->has_value()) return **slot;
      }
      const int a = kCanonical[e][0];
      const int b = kCanonical[e][1];
      const Point q = edge_vertex(p[a], v[a], p[b], v[b]);
      const Vertex out{q, field_.gradient(q).norm};
      if (slot) *slot = out;
      return out;
    };
    if (n == 2) {
      emit(vertex(crossings[0]));
      emit(vertex(crossings[1]));
      return;
    }
    // Saddle: corners 0 and 2 on one side, 1 and 3 on the other.
    if (depth == 0) ++counters_.ambiguous;
    if (config_.ambiguity_policy == AmbiguityPolicy::Subdivide && depth < kMaxSubdivisionDepth) {
      const Point m01 = midpoint(p[0], p[1]);
      const Point m12 = midpoint(p[1], p[2]);
      const Point m23 = midpoint(p[2], p[3]);
      const Point m30 = midpoint(p[3], p[0]);
      const Point ctr = midpoint(p[0], p[2]);
      const double v01 = field_.value(m01);
      const double v12 = field_.value(m12);
      const double v23 = field_.value(m23);
      const double v30 = field_.value(m30);
      const double vc = field_.value(ctr);
      square({p[0], m01, ctr, m30}, {v[0], v01, vc, v30}, depth + 1);
      square({m01, p[1], m12, ctr}, {v01, v[1], v12, vc}, depth + 1);
      square({ctr, m12, p[2], m23}, {vc, v12, v[2], v23}, depth + 1);
      square({m30, ctr, m23, p[3]}, {v30, vc, v23, v[3]}, depth + 1);
      return;
    }
    ++counters_.decider;
    const bool center_in = inside(0.25 * (v[0] + v[1] + v[2] + v[3]));
    // If the center joins corners 0 and 2, the curves wrap around corners 1 and 3.
    const bool wrap_odd = (center_in == in[0]);
    if (wrap_odd) {
      emit(vertex(0));
      emit(vertex(1));
      emit(vertex(2));
      emit(vertex(3));
    } else {
      emit(vertex(3));
      emit(vertex(0));
      emit(vertex(1));
      emit(vertex(2));
    }
  }

  // Corners in the Bourke order: (000) (100) (110) (010) (001) (101) (111) (011).
  void cube(const std::array<Point, 8>& p, const std::array<double, 8>& v, int depth) {
    static constexpr int kEdges[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                          {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
    static constexpr int kFaces[6][4] = {{0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4},
                                         {3, 2, 6, 7}, {0, 3, 7, 4}, {1, 2, 6, 5}};
    int index = 0;
    for (int k = 0; k < 8; ++k)
      if (!inside(v[k])) index |= 1 << k;
    if (index == 0 || index == 255) return;

    bool ambiguous = false;
    for (const auto& f : kFaces) {
      const bool a = inside(v[f[0]]);
      const bool b = inside(v[f[1]]);
      const bool c = inside(v[f[2]]);
      const bool d = inside(v[f[3]]);
      if (a == c && b == d && a != b) ambiguous = true;
    }
    if (ambiguous) {
      if (depth == 0) ++counters_.ambiguous;
      if (config_.ambiguity_policy == AmbiguityPolicy::Subdivide && depth < kMaxSubdivisionDepth) {
        subdivide_cube(p, v, depth);
        return;
      }
      ++counters_.decider;
    }

    std::array<Point, 12> edge_points;
    std::array<bool, 12> have{};
    const auto& row = detail::kMarchingCubesTriangles[index];
    for (int t = 0; row[t] != -1; t += 3) {
      for (int s = 0; s < 3; ++s) {
        const int e = row[t + s];
        if (!have[e]) {
          const int a = kEdges[e][0];
          const int b = kEdges[e][1];
          edge_points[e] = edge_vertex(p[a], v[a], p[b], v[b]);
          have[e] = true;
        }
        emit(edge_points[e]);
      }
    }
  }

 private:
  void subdivide_cube(const std::array<Point, 8>& p, const std::array<double, 8>& v, int depth) {
    // 3x3x3 lattice over the cell; corners reuse the known samples.
    static constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                          {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    Point lattice[3][3][3];
    double values[3][3][3];
    const Point& o = p[0];
    const Point& far = p[6];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) {
          lattice[i][j][l] = {o[0] + 0.5 * i * (far[0] - o[0]), o[1] + 0.5 * j * (far[1] - o[1]),
                              o[2] + 0.5 * l * (far[2] - o[2])};
          values[i][j][l] = std::nan("");
        }
    for (int k = 0; k < 8; ++k)
      values[2 * kCorner[k][0]][2 * kCorner[k][1]][2 * kCorner[k][2]] = v[k];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
          if (std::isnan(values[i][j][l])) values[i][j][l] = field_.value(lattice[i][j][l]);
    for (int si = 0; si < 2; ++si)
      for (int sj = 0; sj < 2; ++sj)
        for (int sl = 0; sl < 2; ++sl) {
          std::array<Point, 8> cp;
          std::array<double, 8> cv;
          for (int k = 0; k < 8; ++k) {
            const int i = si + kCorner[k][0];
            const int j = sj + kCorner[k][1];
            const int l = sl + kCorner[k][2];
            cp[k] = lattice[i][j][l];
            cv[k] = values[i][j][l];
          }
          cube(cp, cv, depth + 1);
        }
  }

  const ScalarField& field_;
  double level_;
  const ExtractionConfig& config_;
  Counters& counters_;
  std::vector<Point>& vertices_;
  std::vector<double>& grad_norms_;
};

LevelSetMesh extract_from_lattice(const ScalarField& field, const SampleLattice& lat, double level,
                                  const ExtractionConfig& config) {
  LevelSetMesh mesh;
  mesh.manifold = field.manifold();
  mesh.level = level;
  mesh.resolution = config.resolution;
  if (mesh.manifold.kind() == ManifoldKind::Sphere2) mesh.pole_cap = kPi / config.resolution;

  const std::size_t n_blocks = lat.cells(0);
  std::vector<std::vector<Point>> block_vertices(n_blocks);
  std::vector<std::vector<double>> block_grads(n_blocks);
  std::vector<Counters> block_counters(n_blocks);
  const int dim = mesh.manifold.dim();

  parallel_blocks(n_blocks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CellWorker worker(field, level, config, block_counters[i], block_vertices[i], block_grads[i]);
      if (dim == 1) {
        const double va = lat.value(i);
        const double vb = lat.value(i + 1);
        if (worker.inside(va) != worker.inside(vb)) {
          const Point a{lat.coord(0, i), 0.0, 0.0};
          const Point b{lat.coord(0, i + 1), 0.0, 0.0};
          worker.emit(worker.edge_vertex(a, va, b, vb));
        }
      } else if (dim == 2) {
        CellWorker::RowCache cache;
        cache.reset(lat.cells(1) + 1);
        for (std::size_t j = 0; j < lat.cells(1); ++j) {
          const std::array<Point, 4> p{Point{lat.coord(0, i), lat.coord(1, j), 0.0},
                                       Point{lat.coord(0, i + 1), lat.coord(1, j), 0.0},
                                       Point{lat.coord(0, i + 1), lat.coord(1, j + 1), 0.0},
                                       Point{lat.coord(0, i), lat.coord(1, j + 1), 0.0}};
          const std::array<double, 4> v{lat.value(i, j), lat.value(i + 1, j),
                                        lat.value(i + 1, j + 1), lat.value(i, j + 1)};
          worker.square(p, v, 0, &cache, j);
        }
      } else {
        for (std::size_t j = 0; j < lat.cells(1); ++j)
          for (std::size_t l = 0; l < lat.cells(2); ++l) {
            static constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                                  {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
            std::array<Point, 8> p;
            std::array<double, 8> v;
            for (int k = 0; k < 8; ++k) {
              const std::size_t ii = i + kCorner[k][0];
              const std::size_t jj = j + kCorner[k][1];
              const std::size_t ll = l + kCorner[k][2];
              p[k] = {lat.coord(0, ii), lat.coord(1, jj), lat.coord(2, ll)};
              v[k] = lat.value(ii, jj, ll);
            }
            worker.cube(p, v, 0);
          }
      }
    }
  });

  for (std::size_t b = 0; b < n_blocks; ++b) {
    mesh.vertices.insert(mesh.vertices.end(), block_vertices[b].begin(), block_vertices[b].end());
    mesh.grad_norms.insert(mesh.grad_norms.end(), block_grads[b].begin(), block_grads[b].end());
    mesh.ambiguous_cells += block_counters[b].ambiguous;
    mesh.decider_fallbacks += block_counters[b].decider;
    mesh.newton_fallbacks += block_counters[b].newton_fallbacks;
  }
  return mesh;
}

}  // namespace

LevelSetMesh extract(const ScalarField& field, double level, const ExtractionConfig& config) {
  const double levels[] = {level};
  return std::move(extract_levels(field, levels, config).front());
}

std::vector<LevelSetMesh> extract_levels(const ScalarField& field, std::span<const double> levels,
                                         const ExtractionConfig& config) {
  config.validate();
  for (double c : levels)
    if (!std::isfinite(c)) throw InvalidArgument("extract: level must be finite");
  const SampleLattice lat = sample_lattice(field, config.resolution);
  std::vector<LevelSetMesh> meshes;
  meshes.reserve(levels.size());
  for (double c : levels) meshes.push_back(extract_from_lattice(field, lat, c, config));
  return meshes;
}

std::vector<double> element_measures(const LevelSetMesh& mesh) {
  const std::size_t n = mesh.element_count();
  std::vector<double> m(n);
  switch (mesh.element_dim()) {
    case 0:
      std::fill(m.begin(), m.end(), 1.0);
      break;
    case 1:
      for (std::size_t e = 0; e < n; ++e)
        m[e] = segment_length(mesh.manifold, mesh.vertices[2 * e], mesh.vertices[2 * e + 1]);
      break;
    default:
      for (std::size_t e = 0; e < n; ++e)
        m[e] = triangle_area(mesh.manifold, mesh.vertices[3 * e], mesh.vertices[3 * e + 1],
                             mesh.vertices[3 * e + 2]);
      break;
  }
  return m;
}

double hausdorff_measure(const LevelSetMesh& mesh) {
  const auto m = element_measures(mesh);
  const double total = pairwise_sum(m);
  return total < 1e-12 ? 0.0 : total;
}

double surface_integral(const LevelSetMesh& mesh,
                        const std::function<double(const Point&, std::size_t)>& g) {
  const auto measures = element_measures(mesh);
  const int stride = mesh.stride();
  std::vector<double> terms(measures.size());
  for (std::size_t e = 0; e < measures.size(); ++e) {
    double avg = 0.0;
    for (int s = 0; s < stride; ++s) {
      const std::size_t vi = e * stride + s;
      avg += g(mesh.vertices[vi], vi);
    }
    terms[e] = avg / stride * measures[e];
  }
  return pairwise_sum(terms);
}

double surface_integral(const LevelSetMesh& mesh, const std::function<double(const Point&)>& g) {
  return surface_integral(mesh, [&](const Point& p, std::size_t) { return g(p); });
}

double weighted_gradient_integral(const LevelSetMesh& mesh, const TestFunction& f) {
  return surface_integral(
      mesh, [&](const Point& p, std::size_t i) { return f.value(p) * mesh.grad_norms[i]; });
}

double weighted_gradient_integral(const LevelSetMesh& mesh, double constant_f) {
  return surface_integral(
      mesh, [&](const Point&, std::size_t i) { return constant_f * mesh.grad_norms[i]; });
}

}  // namespace nodal
