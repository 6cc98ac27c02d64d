#include "nodal_lab/spectra.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace nodal {

namespace {

constexpr double kPoleEps = 1e-9;
constexpr int kMaxSectoralDegree = 500;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double metric_norm(const Manifold& manifold, const Point& p, const std::array<double, 3>& d) {
  if (manifold.kind() == ManifoldKind::Sphere2) {
    const double s = std::sin(p[0]);
    if (std::abs(s) < kPoleEps) return std::abs(d[0]);
    return std::hypot(d[0], d[1] / s);
  }
  return std::hypot(d[0], d[1], d[2]);
}

double torus_amplitude(int dim) { return std::sqrt(2.0 / std::pow(kTwoPi, dim)); }

double sectoral_norm_const(int degree) {
  // int_0^pi sin^{2N+1} = 2 * 4^N (N!)^2 / (2N+1)!, and int cos^2(N phi) = pi.
  const double n = degree;
  const double log_i = std::log(2.0) + n * std::log(4.0) + 2.0 * std::lgamma(n + 1.0) -
                       std::lgamma(2.0 * n + 2.0);
  return std::exp(-0.5 * (std::log(kPi) + log_i));
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

namespace {

// 1/(n+1) for the three-term recurrence; the division dominates its cost at
// high degree.
constexpr int kReciprocalTable = 4096;
const std::array<double, kReciprocalTable>& reciprocals() {
  static const auto table = [] {
    std::array<double, kReciprocalTable> t{};
    for (int n = 0; n < kReciprocalTable; ++n) t[n] = 1.0 / (n + 1.0);
    return t;
  }();
  return table;
}

inline double inv_succ(int n) {
  return n < kReciprocalTable ? reciprocals()[n] : 1.0 / (n + 1.0);
}

}  // namespace

double legendre_p(int degree, double x) {
  if (degree == 0) return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (int n = 1; n < degree; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) * inv_succ(n);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

ProfileValue legendre(int degree, double theta) {
  const double x = std::cos(theta);
  const double s = std::sin(theta);
  if (degree == 0) return {1.0, 0.0};
  double p_prev = 1.0;  // P_{n-1}
  double p = x;         // P_n
  double dp_prev = 0.0;  // P'_{n-1}
  double dp = 1.0;       // P'_n
  for (int n = 1; n < degree; ++n) {
    const double p_next = ((2.0 * n + 1.0) * x * p - n * p_prev) * inv_succ(n);
    const double dp_next = dp_prev + (2.0 * n + 1.0) * p;
    p_prev = p;
    p = p_next;
    dp_prev = dp;
    dp = dp_next;
  }
  // (1 - x^2) P_N' = N (P_{N-1} - x P_N); near the poles that difference cancels,
  // so the derivative recurrence P'_{n+1} = P'_{n-1} + (2n+1) P_n is used there.
  double dtheta;
  if (std::abs(s) >= 0.25) {
    dtheta = -degree * (p_prev - x * p) / s;
  } else {
    dtheta = -s * dp;
  }
  return {p, dtheta};
}

void ScalarField::sample_tensor(std::span<const std::vector<double>> axes,
                                std::vector<double>& out) const {
  const std::size_t n0 = axes.size() > 0 ? axes[0].size() : 1;
  const std::size_t n1 = axes.size() > 1 ? axes[1].size() : 1;
  const std::size_t n2 = axes.size() > 2 ? axes[2].size() : 1;
  out.assign(n0 * n1 * n2, 0.0);
  parallel_blocks(n0, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < n1; ++j)
        for (std::size_t l = 0; l < n2; ++l) {
          Point p{axes[0][i], axes.size() > 1 ? axes[1][j] : 0.0, axes.size() > 2 ? axes[2][l] : 0.0};
          out[(i * n1 + j) * n2 + l] = value(p);
        }
  });
}

EigenMode torus_mode(int dim, std::vector<int> k, double phase) {
  const Manifold m = Manifold::torus(dim);
  if (static_cast<int>(k.size()) != dim)
    throw InvalidArgument("torus_mode: frequency vector length must equal the dimension");
  long long k2 = 0;
  for (int ki : k) k2 += static_cast<long long>(ki) * ki;
  if (k2 == 0) throw InvalidArgument("torus_mode: k = 0 (constant function) is excluded");
  return EigenMode(m, TorusPlaneWave{std::move(k), phase}, static_cast<double>(k2),
                   torus_amplitude(dim));
}

EigenMode circle_mode(int k, double phase) {
  if (k < 1) throw InvalidArgument("circle_mode: k must be >= 1");
  return EigenMode(Manifold::circle(), CircleMode{k, phase}, static_cast<double>(k) * k,
                   1.0 / std::sqrt(kPi));
}

EigenMode zonal_harmonic(int degree) {
  if (degree < 1) throw InvalidArgument("zonal_harmonic: degree must be >= 1");
  const double n = degree;
  return EigenMode(Manifold::sphere(), Zonal{degree}, n * (n + 1.0),
                   std::sqrt((2.0 * n + 1.0) / (4.0 * kPi)));
}

EigenMode sectoral_harmonic(int degree) {
  if (degree < 1) throw InvalidArgument("sectoral_harmonic: degree must be >= 1");
  if (degree > kMaxSectoralDegree)
    throw InvalidArgument("sectoral_harmonic: degree above 500 is not supported");
  const double n = degree;
  return EigenMode(Manifold::sphere(), Sectoral{degree}, n * (n + 1.0),
                   sectoral_norm_const(degree));
}

double EigenMode::value(const Point& p) const {
  const double a = sign_ * norm_const_;
  return std::visit(
      Overloaded{
          [&](const TorusPlaneWave& w) {
            double t = w.phase;
            for (std::size_t i = 0; i < w.k.size(); ++i) t += w.k[i] * p[i];
            return a * std::sin(t);
          },
          [&](const CircleMode& c) { return a * std::sin(c.k * p[0] + c.phase); },
          [&](const Zonal& z) { return a * legendre_p(z.degree, std::cos(p[0])); },
          [&](const Sectoral& s) {
            return a * std::pow(std::sin(p[0]), s.degree) * std::cos(s.degree * p[1]);
          },
      },
      family_);
}

Gradient EigenMode::gradient(const Point& p) const {
  const double a = sign_ * norm_const_;
  Gradient g;
  std::visit(Overloaded{
                 [&](const TorusPlaneWave& w) {
                   double t = w.phase;
                   for (std::size_t i = 0; i < w.k.size(); ++i) t += w.k[i] * p[i];
                   const double c = a * std::cos(t);
                   for (std::size_t i = 0; i < w.k.size(); ++i) g.partials[i] = c * w.k[i];
                   g.norm = std::abs(c) * std::sqrt(eigenvalue_);
                 },
                 [&](const CircleMode& c) {
                   g.partials[0] = a * c.k * std::cos(c.k * p[0] + c.phase);
                   g.norm = std::abs(g.partials[0]);
                 },
                 [&](const Zonal& z) {
                   if (std::abs(std::sin(p[0])) < kPoleEps) {
                     g.norm = 0.0;
                     return;
                   }
                   g.partials[0] = a * legendre(z.degree, p[0]).derivative;
                   g.norm = std::abs(g.partials[0]);
                 },
                 [&](const Sectoral& s) {
                   const int n = s.degree;
                   const double st = std::sin(p[0]);
                   const double ct = std::cos(p[0]);
                   const double cn = std::cos(n * p[1]);
                   const double sn = std::sin(n * p[1]);
                   const double s_nm1 = std::pow(st, n - 1);
                   g.partials[0] = a * n * s_nm1 * ct * cn;
                   g.partials[1] = -a * n * s_nm1 * st * sn;
                   if (std::abs(st) < kPoleEps) {
                     g.norm = n == 1 ? std::abs(a) : 0.0;
                     return;
                   }
                   g.norm = std::abs(a) * n * std::abs(s_nm1) * std::hypot(ct * cn, sn);
                 },
             },
             family_);
  return g;
}

std::optional<SeparableProfiles> EigenMode::separable_profiles() const {
  const double a = sign_ * norm_const_;
  if (const auto* z = std::get_if<Zonal>(&family_)) {
    const int n = z->degree;
    return SeparableProfiles{
        [a, n](double theta) {
          const ProfileValue l = legendre(n, theta);
          return ProfileValue{a * l.value, a * l.derivative};
        },
        [](double) { return ProfileValue{1.0, 0.0}; }};
  }
  if (const auto* s = std::get_if<Sectoral>(&family_)) {
    const int n = s->degree;
    return SeparableProfiles{
        [a, n](double theta) {
          const double st = std::sin(theta);
          const double s_nm1 = std::pow(st, n - 1);
          return ProfileValue{a * s_nm1 * st, a * n * s_nm1 * std::cos(theta)};
        },
        [n](double phi) { return ProfileValue{std::cos(n * phi), -n * std::sin(n * phi)}; }};
  }
  return std::nullopt;
}

void EigenMode::sample_tensor(std::span<const std::vector<double>> axes,
                              std::vector<double>& out) const {
  const auto profiles = separable_profiles();
  if (!profiles || axes.size() != 2) {
    ScalarField::sample_tensor(axes, out);
    return;
  }
  const auto& thetas = axes[0];
  const auto& phis = axes[1];
  std::vector<double> row(thetas.size());
  std::vector<double> col(phis.size());
  parallel_blocks(thetas.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) row[i] = profiles->colatitude(thetas[i]).value;
  });
  for (std::size_t j = 0; j < phis.size(); ++j) col[j] = profiles->longitude(phis[j]).value;
  out.resize(thetas.size() * phis.size());
  for (std::size_t i = 0; i < thetas.size(); ++i)
    for (std::size_t j = 0; j < phis.size(); ++j) out[i * phis.size() + j] = row[i] * col[j];
}

double EigenMode::sup_abs() const { return norm_const_; }

std::pair<double, double> EigenMode::value_range() const {
  double lo = -norm_const_;
  double hi = norm_const_;
  if (const auto* z = std::get_if<Zonal>(&family_); z && z->degree % 2 == 0) {
    // Even P_N is symmetric; its minimum lies in the interior of [0, 1].
    const int n = z->degree;
    const int samples = 64 * n + 256;
    double best_x = 0.0;
    double best = legendre_p(n, 0.0);
    for (int i = 1; i <= samples; ++i) {
      const double x = static_cast<double>(i) / samples;
      const double v = legendre_p(n, x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    double a = std::max(0.0, best_x - 1.0 / samples);
    double b = std::min(1.0, best_x + 1.0 / samples);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
      const double x1 = b - g * (b - a);
      const double x2 = a + g * (b - a);
      if (legendre_p(n, x1) < legendre_p(n, x2))
        b = x2;
      else
        a = x1;
    }
    best = std::min(best, legendre_p(n, 0.5 * (a + b)));
    lo = norm_const_ * best;
  }
  if (sign_ < 0) return {-hi, -lo};
  return {lo, hi};
}

EigenMode EigenMode::negated() const {
  EigenMode m = *this;
  m.sign_ = -sign_;
  return m;
}

std::string EigenMode::describe() const {
  std::string s = sign_ < 0 ? "-" : "";
  std::visit(Overloaded{
                 [&](const TorusPlaneWave& w) {
                   s += "k=";
                   for (std::size_t i = 0; i < w.k.size(); ++i) {
                     if (i) s += ",";
                     s += std::to_string(w.k[i]);
                   }
                   if (w.phase != 0.0) s += "@" + format_double(w.phase);
                 },
                 [&](const CircleMode& c) {
                   s += "k=" + std::to_string(c.k);
                   if (c.phase != 0.0) s += "@" + format_double(c.phase);
                 },
                 [&](const Zonal& z) { s += "zonal:" + std::to_string(z.degree); },
                 [&](const Sectoral& t) { s += "sectoral:" + std::to_string(t.degree); },
             },
             family_);
  return s;
}

namespace {

int parse_int(std::string_view text, std::string_view context) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw InvalidArgument("invalid integer '" + std::string(text) + "' in " + std::string(context));
  return value;
}

double parse_double(std::string_view text, std::string_view context) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw InvalidArgument("invalid number '" + s + "' in " + std::string(context));
  return v;
}

}  // namespace

EigenMode parse_mode(std::string_view spec) {
  const std::string context = "mode spec '" + std::string(spec) + "'";
  bool negate = false;
  if (!spec.empty() && spec.front() == '-') {
    negate = true;
    spec.remove_prefix(1);
  }
  auto finish = [&](EigenMode m) { return negate ? m.negated() : m; };
  if (spec.starts_with("zonal:")) return finish(zonal_harmonic(parse_int(spec.substr(6), context)));
  if (spec.starts_with("sectoral:"))
    return finish(sectoral_harmonic(parse_int(spec.substr(9), context)));
  if (spec.starts_with("k=")) {
    std::string_view body = spec.substr(2);
    double phase = 0.0;
    if (const auto at = body.find('@'); at != std::string_view::npos) {
      phase = parse_double(body.substr(at + 1), context);
      body = body.substr(0, at);
    }
    std::vector<int> k;
    while (true) {
      const auto comma = body.find(',');
      k.push_back(parse_int(body.substr(0, comma), context));
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    if (k.size() == 1) return finish(circle_mode(k[0], phase));
    if (const int dim = static_cast<int>(k.size()); dim == 2 || dim == 3)
      return finish(torus_mode(dim, std::move(k), phase));
    throw InvalidArgument("frequency vector must have 1, 2 or 3 entries in " + context);
  }
  throw InvalidArgument("unrecognized " + context);
}

TestFunction::TestFunction(Manifold manifold, ValueFn value, GradientFn gradient,
                           ValueFn laplacian, std::string description, HelmholtzFn helmholtz)
    : manifold_(manifold), value_(std::move(value)), gradient_(std::move(gradient)),
      laplacian_(std::move(laplacian)), description_(std::move(description)),
      helmholtz_(std::move(helmholtz)) {}

TestFunction TestFunction::constant(const Manifold& manifold, double c) {
  return TestFunction(
      manifold, [c](const Point&) { return c; }, [](const Point&) { return Gradient{}; },
      [](const Point&) { return 0.0; }, format_double(c),
      [c](const Point&, double lambda_sq) { return lambda_sq * c; });
}

double TestFunction::helmholtz(const Point& p, double lambda_sq) const {
  if (helmholtz_) return helmholtz_(p, lambda_sq);
  return laplacian_(p) + lambda_sq * value_(p);
}

ModeExpansion& ModeExpansion::add(double coefficient, const EigenMode& mode) {
  if (!(mode.manifold() == manifold_))
    throw InvalidArgument("ModeExpansion: all terms must live on the same manifold");
  terms_.push_back({coefficient, mode});
  return *this;
}

TestFunction ModeExpansion::to_function() const {
  const auto terms = terms_;
  const double c0 = constant_;
  const Manifold m = manifold_;
  std::string desc;
  if (terms.empty()) {
    desc = format_double(c0);
  } else if (terms.size() == 1 && c0 == 0.0 && terms[0].coefficient == 1.0) {
    desc = "mode:" + terms[0].mode.describe();
  } else {
    std::ostringstream os;
    if (c0 != 0.0) os << format_double(c0);
    for (const auto& t : terms) {
      if (os.tellp() > 0) os << "+";
      os << format_double(t.coefficient) << "*" << t.mode.describe();
    }
    desc = os.str();
  }
  return TestFunction(
      m,
      [terms, c0](const Point& p) {
        double v = c0;
        for (const auto& t : terms) v += t.coefficient * t.mode.value(p);
        return v;
      },
      [terms, m](const Point& p) {
        Gradient g;
        for (const auto& t : terms) {
          const Gradient gt = t.mode.gradient(p);
          for (int i = 0; i < 3; ++i) g.partials[i] += t.coefficient * gt.partials[i];
        }
        g.norm = metric_norm(m, p, g.partials);
        return g;
      },
      [terms](const Point& p) {
        double v = 0.0;
        for (const auto& t : terms) v -= t.coefficient * t.mode.eigenvalue() * t.mode.value(p);
        return v;
      },
      desc,
      [terms, c0](const Point& p, double lambda_sq) {
        double v = lambda_sq * c0;
        for (const auto& t : terms)
          v += t.coefficient * (lambda_sq - t.mode.eigenvalue()) * t.mode.value(p);
        return v;
      });
}

HelmholtzImage apply_helmholtz(const ModeExpansion& expansion, double lambda_ref_sq) {
  return {expansion.to_function(), lambda_ref_sq};
}

TestFunction bump_test_function(const Manifold& manifold, const Point& center, double radius) {
  if (manifold.kind() != ManifoldKind::FlatTorus)
    throw InvalidArgument("bump_test_function: flat torus only");
  if (!(radius > 0.0 && radius < kPi))
    throw InvalidArgument("bump_test_function: radius must lie in (0, pi)");
  const int n = manifold.dim();
  const double r2inv = 1.0 / (radius * radius);
  auto offset = [manifold, center](const Point& p) { return periodic_delta(manifold, center, p); };
  std::ostringstream desc;
  desc << "bump:";
  for (int i = 0; i < n; ++i) desc << (i ? "," : "") << format_double(center[i]);
  desc << ":" << format_double(radius);
  return TestFunction(
      manifold,
      [offset, r2inv](const Point& p) {
        const Point d = offset(p);
        const double s = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * r2inv;
        if (s >= 1.0) return 0.0;
        const double u = 1.0 - s;
        return u * u * u;
      },
      [offset, r2inv](const Point& p) {
        Gradient g;
        const Point d = offset(p);
        const double s = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * r2inv;
        if (s >= 1.0) return g;
        const double u = 1.0 - s;
        for (int i = 0; i < 3; ++i) g.partials[i] = -6.0 * u * u * d[i] * r2inv;
        g.norm = std::hypot(g.partials[0], g.partials[1], g.partials[2]);
        return g;
      },
      [offset, r2inv, n](const Point& p) {
        const Point d = offset(p);
        const double s = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * r2inv;
        if (s >= 1.0) return 0.0;
        const double u = 1.0 - s;
        return -6.0 * u * (n * u - 4.0 * s) * r2inv;
      },
      desc.str());
}

}  // namespace nodal
