#pragma once

#include <algorithm>
#include <functional>
#include <vector>

namespace pairsim {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Standard Nelder-Mead simplex minimizer. Accepted steps never increase
// the best vertex value.
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double initial_step = 0.1, int max_iter = 5000,
    double tol = 1e-8) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += (x0[i] != 0.0 ? initial_step * std::abs(x0[i]) : initial_step);
  }
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  NelderMeadResult res;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<std::size_t> order(n + 1);
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];

    if (std::abs(vals[worst] - vals[best]) <=
        tol * (std::abs(vals[best]) + tol)) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / n;
    }
    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d)
        p[d] = centroid[d] + t * (centroid[d] - pts[worst][d]);
      return p;
    };

    auto reflect = blend(1.0);
    const double fr = f(reflect);
    if (fr < vals[order[0]]) {
      auto expand = blend(2.0);
      const double fe = f(expand);
      if (fe < fr) {
        pts[worst] = expand;
        vals[worst] = fe;
      } else {
        pts[worst] = reflect;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = reflect;
      vals[worst] = fr;
    } else {
      auto contract = blend(fr < vals[worst] ? 0.5 : -0.5);
      const double fc = f(contract);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = contract;
        vals[worst] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d)
            pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
          vals[i] = f(pts[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (vals[i] < vals[best]) best = i;
  res.x = pts[best];
  res.value = vals[best];
  res.iterations = it;
  return res;
}

}  // namespace pairsim
