#include "nodal_lab/asymptotics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace nodal {

ScanFamily parse_family(std::string_view name) {
  if (name == "torus-axis") return ScanFamily::TorusAxis;
  if (name == "torus-diagonal") return ScanFamily::TorusDiagonal;
  if (name == "zonal") return ScanFamily::Zonal;
  if (name == "sectoral") return ScanFamily::Sectoral;
  if (name == "circle") return ScanFamily::Circle;
  throw InvalidArgument("unknown family '" + std::string(name) + "'");
}

std::string family_name(ScanFamily family) {
  switch (family) {
    case ScanFamily::TorusAxis:
      return "torus-axis";
    case ScanFamily::TorusDiagonal:
      return "torus-diagonal";
    case ScanFamily::Zonal:
      return "zonal";
    case ScanFamily::Sectoral:
      return "sectoral";
    case ScanFamily::Circle:
      return "circle";
  }
  return "?";
}

Manifold family_manifold(ScanFamily family) {
  switch (family) {
    case ScanFamily::TorusAxis:
    case ScanFamily::TorusDiagonal:
      return Manifold::torus(2);
    case ScanFamily::Zonal:
    case ScanFamily::Sectoral:
      return Manifold::sphere();
    case ScanFamily::Circle:
      return Manifold::circle();
  }
  return Manifold::circle();
}

EigenMode family_mode(ScanFamily family, int index) {
  switch (family) {
    case ScanFamily::TorusAxis:
      return torus_mode(2, {index, 0});
    case ScanFamily::TorusDiagonal:
      return torus_mode(2, {index, index + 1});
    case ScanFamily::Zonal:
      return zonal_harmonic(index);
    case ScanFamily::Sectoral:
      return sectoral_harmonic(index);
    case ScanFamily::Circle:
      return circle_mode(index);
  }
  throw InvalidArgument("family_mode: unknown family");
}

namespace {

int parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("invalid integer '" + std::string(s) + "' in range");
  return v;
}

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

IndexRange IndexRange::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 2 || parts.size() > 3)
    throw InvalidArgument("range must be first:last[:step]");
  IndexRange r{parse_int(parts[0]), parse_int(parts[1]), parts.size() == 3 ? parse_int(parts[2]) : 1};
  if (r.first < 1) throw InvalidArgument("range first index must be >= 1");
  if (r.step < 1) throw InvalidArgument("range step must be >= 1");
  if (r.last < r.first) throw InvalidArgument("range last must be >= first");
  return r;
}

std::vector<int> IndexRange::values() const {
  std::vector<int> v;
  for (int i = first; i <= last; i += step) v.push_back(i);
  return v;
}

std::string IndexRange::to_string() const {
  return std::to_string(first) + ":" + std::to_string(last) + ":" + std::to_string(step);
}

namespace {

// Tensor axes of the volume grid: uniform on circle/torus, Gauss colatitudes
// (ascending) and 2*res longitudes on the sphere.
std::vector<std::vector<double>> grid_axes(const Manifold& m, int res) {
  std::vector<std::vector<double>> axes;
  auto uniform = [](int n, double step) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = i * step;
    return v;
  };
  if (m.kind() == ManifoldKind::Sphere2) {
    const GaussRule rule = gauss_legendre(res);
    std::vector<double> thetas(res);
    for (int i = 0; i < res; ++i) thetas[i] = std::acos(rule.nodes[res - 1 - i]);
    axes.push_back(std::move(thetas));
    axes.push_back(uniform(2 * res, kPi / res));
  } else {
    for (int a = 0; a < m.dim(); ++a) axes.push_back(uniform(res, kTwoPi / res));
  }
  return axes;
}

double abs_pow(double v, double p) {
  const double a = std::abs(v);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

// int |phi|^p dV for every p in one pass.
std::vector<double> lp_integrals(const EigenMode& mode, std::span<const double> ps, int res) {
  std::vector<double> out(ps.size());
  if (const auto profiles = mode.separable_profiles()) {
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const double p = ps[k];
      const double theta_part = integrate_line_split(
          0.0, kPi, res,
          [&](double t) { return abs_pow(profiles->colatitude(t).value, p) * std::sin(t); },
          [&](double t) { return profiles->colatitude(t).value; }, 0.0);
      const double phi_part = integrate_line_split(
          0.0, kTwoPi, 2 * res, [&](double s) { return abs_pow(profiles->longitude(s).value, p); },
          [&](double s) { return profiles->longitude(s).value; }, 0.0);
      out[k] = theta_part * phi_part;
    }
    return out;
  }
  return integrate_split(
      mode.manifold(), res,
      [&](const Point& x, std::span<double> o) {
        const double v = mode.value(x);
        for (std::size_t k = 0; k < ps.size(); ++k) o[k] = abs_pow(v, ps[k]);
      },
      ps.size(), [&](const Point& x) { return mode.value(x); }, 0.0);
}

// Maximizes fn near `start` by shrinking local lattices.
Point polish_max(const std::function<double(const Point&)>& fn, const Manifold& m, Point start,
                 double half_width) {
  const int dim = m.dim();
  constexpr int kSide = 11;
  Point best = start;
  double best_v = fn(start);
  for (int pass = 0; pass < 6; ++pass) {
    const Point centre = best;
    const int n1 = dim > 1 ? kSide : 1;
    const int n2 = dim > 2 ? kSide : 1;
    for (int i = 0; i < kSide; ++i)
      for (int j = 0; j < n1; ++j)
        for (int l = 0; l < n2; ++l) {
          const int idx[3] = {i, j, l};
          Point q = centre;
          for (int a = 0; a < dim; ++a)
            q[a] = centre[a] + half_width * (2.0 * idx[a] / (kSide - 1) - 1.0);
          if (m.kind() == ManifoldKind::Sphere2) q[0] = std::clamp(q[0], 0.0, kPi);
          const double v = fn(q);
          if (v > best_v) {
            best_v = v;
            best = q;
          }
        }
    half_width *= 0.25;
  }
  return best;
}

double grid_step(const Manifold& m, int res) {
  return m.kind() == ManifoldKind::Sphere2 ? kPi / res : kTwoPi / res;
}

double refined_sup(const EigenMode& mode, int res) {
  const auto axes = grid_axes(mode.manifold(), res);
  std::vector<double> samples;
  mode.sample_tensor(axes, samples);
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (std::abs(samples[i]) > std::abs(samples[best])) best = i;
  Point start{};
  std::size_t rem = best;
  for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
    start[a] = axes[a][rem % axes[a].size()];
    rem /= axes[a].size();
  }
  const Point p = polish_max([&](const Point& q) { return std::abs(mode.value(q)); },
                             mode.manifold(), start, grid_step(mode.manifold(), res));
  return std::max(std::abs(mode.value(p)), std::abs(samples[best]));
}

GradSup grad_sup_at(const EigenMode& mode, int res, const LevelSetMesh* nodal) {
  const Manifold& m = mode.manifold();
  const auto axes = grid_axes(m, res);
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  std::vector<double> g(total);
  if (const auto profiles = mode.separable_profiles()) {
    const auto& th = axes[0];
    const auto& ph = axes[1];
    std::vector<ProfileValue> rows(th.size()), cols(ph.size());
    std::vector<double> inv_sin(th.size());
    parallel_blocks(th.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        rows[i] = profiles->colatitude(th[i]);
        inv_sin[i] = 1.0 / std::sin(th[i]);
      }
    });
    for (std::size_t j = 0; j < ph.size(); ++j) cols[j] = profiles->longitude(ph[j]);
    for (std::size_t i = 0; i < th.size(); ++i)
      for (std::size_t j = 0; j < ph.size(); ++j)
        g[i * ph.size() + j] = std::hypot(rows[i].derivative * cols[j].value,
                                          rows[i].value * cols[j].derivative * inv_sin[i]);
  } else {
    std::vector<std::size_t> sizes;
    for (const auto& a : axes) sizes.push_back(a.size());
    parallel_blocks(total, [&](std::size_t b, std::size_t e) {
      for (std::size_t idx = b; idx < e; ++idx) {
        Point p{};
        std::size_t rem = idx;
        for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
          p[a] = axes[a][rem % sizes[a]];
          rem /= sizes[a];
        }
        g[idx] = mode.gradient(p).norm;
      }
    });
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
  Point start{};
  std::size_t rem = best;
  for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
    start[a] = axes[a][rem % axes[a].size()];
    rem /= axes[a].size();
  }
  const Point p = polish_max([&](const Point& q) { return mode.gradient(q).norm; }, m, start,
                             grid_step(m, res));
  GradSup out;
  out.global = std::max(g[best], mode.gradient(p).norm);
  if (nodal) {
    double s = 0.0;
    for (double v : nodal->grad_norms) s = std::max(s, v);
    out.nodal = s;
    out.global = std::max(out.global, s);
  }
  return out;
}

void require_grid_matches(const EigenMode& mode, const QuadratureGrid& grid) {
  if (!(mode.manifold() == grid.manifold)) throw InvalidArgument("grid and mode manifolds differ");
}

int row_resolution(int base, double lambda) {
  int r = std::max(base, 8 * static_cast<int>(std::ceil(lambda)));
  return r + (r % 2);
}

double median3(std::span<const double> v) {
  std::vector<double> head(v.begin(), v.begin() + std::min<std::size_t>(3, v.size()));
  std::sort(head.begin(), head.end());
  const std::size_t n = head.size();
  return n % 2 ? head[n / 2] : 0.5 * (head[n / 2 - 1] + head[n / 2]);
}

}  // namespace

double lp_norm(const EigenMode& mode, double p, const QuadratureGrid& grid) {
  require_grid_matches(mode, grid);
  if (std::isinf(p) && p > 0) return refined_sup(mode, grid.resolution);
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1 or infinity");
  const double ps[] = {p};
  return std::pow(lp_integrals(mode, ps, grid.resolution)[0], 1.0 / p);
}

GradSup grad_sup(const EigenMode& mode, const QuadratureGrid& grid, const LevelSetMesh* nodal) {
  require_grid_matches(mode, grid);
  return grad_sup_at(mode, grid.resolution, nodal);
}

std::vector<NormRecord> scan_family(ScanFamily family, const IndexRange& range,
                                    const ScanConfig& config) {
  const auto indices = range.values();
  if (indices.size() < 5) throw InvalidArgument("scan_family: range must contain >= 5 indices");
  const Manifold m = family_manifold(family);
  std::vector<double> ps = config.p_values;
  if (ps.empty()) {
    ps = {1.0, 2.0, 4.0, 6.0};
    if (m.dim() > 1) {
      const double crit = 2.0 * (m.dim() + 1) / (m.dim() - 1);
      if (std::find(ps.begin(), ps.end(), crit) == ps.end()) ps.push_back(crit);
    }
  }
  for (double p : ps)
    if (!(p >= 1.0) || std::isinf(p)) throw InvalidArgument("scan_family: p values must be finite and >= 1");
  // l1 and l2 are always needed.
  std::vector<double> all_ps{1.0, 2.0};
  for (double p : ps)
    if (p != 1.0 && p != 2.0) all_ps.push_back(p);

  std::vector<NormRecord> table;
  for (int index : indices) {
    const EigenMode mode = family_mode(family, index);
    NormRecord rec;
    rec.mode = mode.describe();
    rec.index = index;
    rec.lambda = mode.lambda();
    rec.resolution = row_resolution(config.resolution, rec.lambda);

    const auto integrals = lp_integrals(mode, all_ps, rec.resolution);
    rec.l1 = integrals[0];
    rec.l2 = std::sqrt(integrals[1]);
    for (double p : ps) {
      const std::size_t k = static_cast<std::size_t>(
          std::find(all_ps.begin(), all_ps.end(), p) - all_ps.begin());
      rec.lp.push_back({p, std::pow(integrals[k], 1.0 / p)});
    }
    rec.sup = refined_sup(mode, rec.resolution);

    ExtractionConfig ec = config.extraction;
    ec.resolution = rec.resolution;
    const LevelSetMesh mesh = extract(mode, 0.0, ec);
    rec.nodal_measure = hausdorff_measure(mesh);
    rec.weighted_nodal_integral = weighted_gradient_integral(mesh, 1.0);
    const GradSup gs = grad_sup_at(mode, rec.resolution, &mesh);
    rec.grad_sup = gs.global;
    rec.grad_sup_nodal = gs.nodal;
    rec.flagged = mesh.decider_fallbacks > 0 || mesh.newton_fallbacks > 0;
    table.push_back(std::move(rec));
  }
  return table;
}

double record_column(const NormRecord& r, std::string_view column) {
  if (column == "index") return r.index;
  if (column == "lambda") return r.lambda;
  if (column == "l1") return r.l1;
  if (column == "l2") return r.l2;
  if (column == "sup") return r.sup;
  if (column == "grad_sup") return r.grad_sup;
  if (column == "grad_sup_nodal") return r.grad_sup_nodal;
  if (column == "nodal_measure") return r.nodal_measure;
  if (column == "weighted_nodal_integral") return r.weighted_nodal_integral;
  if (column == "weighted_over_lambda_sq") return r.weighted_nodal_integral / (r.lambda * r.lambda);
  if (column.starts_with("lp_")) {
    for (const auto& v : r.lp)
      if ("lp_" + format_p(v.p) == column) return v.value;
  }
  throw InvalidArgument("unknown column '" + std::string(column) + "'");
}

ExponentFit fit_exponent(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit_exponent: column lengths differ");
  const std::size_t n = x.size();
  if (n < 5) throw InvalidArgument("fit_exponent: need at least 5 rows");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw InvalidArgument("fit_exponent: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = pairwise_sum(lx) / n;
  const double my = pairwise_sum(ly) / n;
  std::vector<double> sxx(n), sxy(n);
  for (std::size_t i = 0; i < n; ++i) {
    sxx[i] = (lx[i] - mx) * (lx[i] - mx);
    sxy[i] = (lx[i] - mx) * (ly[i] - my);
  }
  const double Sxx = pairwise_sum(sxx);
  if (!(Sxx > 0.0)) throw InvalidArgument("fit_exponent: x values must not all coincide");
  ExponentFit fit;
  fit.n_points = static_cast<int>(n);
  fit.slope = pairwise_sum(sxy) / Sxx;
  fit.intercept = my - fit.slope * mx;
  std::vector<double> res2(n), tot2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    res2[i] = e * e;
    tot2[i] = (ly[i] - my) * (ly[i] - my);
  }
  const double ssr = pairwise_sum(res2);
  const double sst = pairwise_sum(tot2);
  fit.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / Sxx);
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return fit;
}

ExponentFit fit_exponent(const std::vector<NormRecord>& table, std::string_view x_column,
                         std::string_view y_column) {
  std::vector<double> x, y;
  for (const auto& r : table) {
    x.push_back(record_column(r, x_column));
    y.push_back(record_column(r, y_column));
  }
  ExponentFit fit = fit_exponent(x, y);
  fit.x_column = x_column;
  fit.y_column = y_column;
  return fit;
}

BoundReport verify_bounds(const std::vector<NormRecord>& table, const Manifold& manifold) {
  if (table.empty()) throw InvalidArgument("verify_bounds: empty table");
  const double n = manifold.dim();
  const double vol_sqrt = std::sqrt(manifold.volume());
  BoundReport out;
  auto make = [&](std::string name, auto ratio) {
    RatioCheck c;
    c.name = std::move(name);
    for (const auto& r : table) c.values.push_back(ratio(r));
    c.min = *std::min_element(c.values.begin(), c.values.end());
    c.max = *std::max_element(c.values.begin(), c.values.end());
    c.reference = median3(c.values);
    return c;
  };
  RatioCheck l1 = make("l1_ratio", [&](const NormRecord& r) {
    return r.l1 * std::pow(r.lambda, (n - 1.0) / 4.0);
  });
  l1.threshold = 0.5 * l1.reference;
  l1.pass = l1.min >= l1.threshold && l1.min > 0.0;

  RatioCheck grad = make("grad_ratio", [&](const NormRecord& r) {
    return r.grad_sup * std::pow(r.lambda, -(n + 1.0) / 2.0);
  });
  grad.threshold = 2.0 * grad.reference;
  grad.pass = grad.max <= grad.threshold;

  RatioCheck measure = make("measure_ratio", [&](const NormRecord& r) {
    return r.nodal_measure * std::pow(r.lambda, -(7.0 / 4.0 - 3.0 * n / 4.0));
  });
  measure.threshold = 0.5 * measure.reference;
  measure.pass = measure.min >= measure.threshold && measure.min > 0.0;

  RatioCheck weighted = make("weighted_ratio", [&](const NormRecord& r) {
    return r.weighted_nodal_integral / (r.lambda * r.lambda);
  });
  weighted.threshold = vol_sqrt;
  weighted.pass = weighted.min > 0.0 && weighted.max <= vol_sqrt * (1.0 + 1e-9);

  out.ratios = {l1, grad, measure, weighted};
  out.pass = std::all_of(out.ratios.begin(), out.ratios.end(),
                         [](const RatioCheck& c) { return c.pass; });
  return out;
}

}  // namespace nodal
