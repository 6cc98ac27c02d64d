#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nodal {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Chart coordinates. Unused trailing components are zero: circle uses x[0],
/// T^2 uses x[0..1], T^3 all three, S^2 uses (colatitude, longitude).
using Point = std::array<double, 3>;

/// Precondition or configuration violation (bad resolution, wrong manifold, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite samples or a computation that cannot produce a meaningful value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pairwise (cascade) summation with a fixed reduction tree, so the result
/// depends only on the input order and never on thread count.
double pairwise_sum(std::span<const double> values);

/// Caps the number of worker threads used by the library; 0 restores the default
/// (hardware concurrency).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(begin, end) over [0, n) split into contiguous blocks. Blocks are
/// independent; callers write into preallocated per-index slots and reduce in
/// index order afterwards.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int order);

/// Root of fn on [a, b] given a sign change (fa * fb <= 0). Illinois variant of
/// regula falsi with a bisection guard; converges to a bracket of width ~1e-15.
double bracketed_root(const std::function<double(double)>& fn, double a, double b, double fa,
                      double fb);

/// Wraps an angle into (-pi, pi].
double wrap_to_pi(double angle);

}  // namespace nodal
