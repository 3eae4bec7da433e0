#pragma once

// Limited-memory BFGS with Armijo backtracking. Objectives are smooth squared
// hinge penalties, so a plain two-loop recursion is enough.

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "relembed/linalg.hpp"

namespace relembed::detail {

/// Returns f(x) and writes the gradient into g (already sized like x).
using Objective = std::function<double(const Vector& x, Vector& g)>;

struct LbfgsOptions {
  int max_iterations = 500;
  std::size_t memory = 8;
  /// Stop once f(x) <= target.
  double target = 0.0;
  double gradient_tolerance = 1e-12;
  /// Every `stall_window` iterations, stop unless f dropped by at least this
  /// fraction since the previous check. 0 disables the check.
  double stall_fraction = 0.0;
  int stall_window = 50;
};

struct LbfgsResult {
  double value = 0.0;
  int iterations = 0;
};

inline LbfgsResult lbfgs_minimize(const Objective& f, Vector& x, const LbfgsOptions& opt = {}) {
  const std::size_t n = x.size();
  Vector g(n), g_new(n), x_new(n), dir(n);
  double fx = f(x, g);
  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  LbfgsResult res{fx, 0};
  double checkpoint = fx;
  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it;
    if (fx <= opt.target) break;
    if (opt.stall_fraction > 0.0 && it > 0 && it % opt.stall_window == 0) {
      if (fx > (1.0 - opt.stall_fraction) * checkpoint) break;
      checkpoint = fx;
    }
    if (squared_norm(g) <= opt.gradient_tolerance * opt.gradient_tolerance) break;

    // Two-loop recursion.
    dir = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * y_hist[k][i];
    }
    if (!s_hist.empty()) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / squared_norm(y_hist.back());
      for (auto& d : dir) d *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[k] - beta) * s_hist[k][i];
    }
    for (auto& d : dir) d = -d;

    double slope = dot(g, dir);
    if (slope >= 0.0) {
      // Curvature history went bad; fall back to steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = -squared_norm(g);
    }

    double step = s_hist.empty() ? 1.0 / std::max(1.0, std::sqrt(-slope)) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = f(x_new, g_new);
      if (f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Vector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-16 * std::sqrt(squared_norm(s) * squared_norm(y))) {
      if (s_hist.size() == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    res.iterations = it + 1;
  }
  res.value = fx;
  return res;
}

}  // namespace relembed::detail
