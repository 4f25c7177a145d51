#pragma once

// Deterministic derivative-free 1-D searches shared by the rate and
// optimizer modules.

#include <cmath>
#include <cstddef>
#include <vector>

namespace qkdlab::search {

struct Point {
  double x = 0.0;
  double value = 0.0;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {lo};
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t count) {
  auto exponents = linspace(std::log10(lo), std::log10(hi), count);
  for (auto& e : exponents) e = std::pow(10.0, e);
  if (!exponents.empty()) {
    exponents.front() = lo;
    exponents.back() = hi;
  }
  return exponents;
}

// Minimum of f on [a, b]; the result is the best point evaluated.
template <class F>
Point golden_section_minimize(F&& f, double a, double b, double tol, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  Point best = fc <= fd ? Point{c, fc} : Point{d, fd};
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      if (fc < best.value) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      if (fd < best.value) best = {d, fd};
    }
  }
  return best;
}

// Coarse grid (first minimum wins ties) refined by golden section on the
// bracket formed by the neighbouring grid points.
template <class F>
Point grid_then_golden_minimize(F&& f, const std::vector<double>& grid, double tol) {
  Point best{grid.front(), f(grid.front())};
  std::size_t best_index = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < best.value) {
      best = {grid[i], v};
      best_index = i;
    }
  }
  if (grid.size() < 2) return best;
  const double lo = grid[best_index == 0 ? 0 : best_index - 1];
  const double hi = grid[best_index + 1 == grid.size() ? best_index : best_index + 1];
  const Point refined = golden_section_minimize(f, lo, hi, tol);
  return refined.value < best.value ? refined : best;
}

}  // namespace qkdlab::search
