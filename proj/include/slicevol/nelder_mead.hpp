#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "slicevol/error.hpp"

namespace slicevol {

struct NelderMeadOptions {
  double xatol = 1e-4;        // max vertex distance from best, per coordinate
  double fatol = 1e-6;        // max function spread across the simplex
  int max_iters = 500;
  double initial_step = 0.25; // offset of the initial simplex per coordinate
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex with the standard reflection/expansion/contraction/shrink
// coefficients. Callers fit positive parameters by optimizing in log space.
template <class F>
NelderMeadResult nelder_mead(F&& f, const std::vector<double>& x0,
                             const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw Error(Errc::domain_error, "nelder_mead: empty start point");

  std::vector<std::vector<double>> verts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += opt.initial_step;
  std::vector<double> fvals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fvals[i] = f(verts[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    std::vector<std::vector<double>> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      v2[k] = verts[idx[k]];
      f2[k] = fvals[idx[k]];
    }
    verts.swap(v2);
    fvals.swap(f2);
  };

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  NelderMeadResult result;
  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    order();

    double diam = 0.0;
    double fspread = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t i = 0; i < n; ++i)
        diam = std::max(diam, std::fabs(verts[k][i] - verts[0][i]));
      fspread = std::max(fspread, std::fabs(fvals[k] - fvals[0]));
    }
    if (diam < opt.xatol && fspread < opt.fatol) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += verts[k][i] / n;

    auto along = [&](double coeff) {
      std::vector<double> pt(n);
      for (std::size_t i = 0; i < n; ++i) pt[i] = centroid[i] + coeff * (centroid[i] - verts[n][i]);
      return pt;
    };

    const std::vector<double> xr = along(kReflect);
    const double fr = f(xr);
    if (fr < fvals[0]) {
      const std::vector<double> xe = along(kExpand);
      const double fe = f(xe);
      if (fe < fr) {
        verts[n] = xe;
        fvals[n] = fe;
      } else {
        verts[n] = xr;
        fvals[n] = fr;
      }
    } else if (fr < fvals[n - 1]) {
      verts[n] = xr;
      fvals[n] = fr;
    } else {
      const bool outside = fr < fvals[n];
      const std::vector<double> xc =
          outside ? along(kContract)
                  : along(-kContract);
      const double fc = f(xc);
      if (fc < std::min(fr, fvals[n])) {
        verts[n] = xc;
        fvals[n] = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          for (std::size_t i = 0; i < n; ++i)
            verts[k][i] = verts[0][i] + kShrink * (verts[k][i] - verts[0][i]);
          fvals[k] = f(verts[k]);
        }
      }
    }
  }

  order();
  result.x = verts[0];
  result.fx = fvals[0];
  result.iterations = iter;
  return result;
}

}  // namespace slicevol
