#pragma once

#include <cmath>
#include <functional>

#include "dot/error.hpp"

namespace dot {

struct RootOptions {
  double f_tol = 1e-12;       // stop when |f(v)| <= f_tol
  double initial_step = 1.0;  // first bracket expansion step
  int max_doublings = 200;
  int max_iters = 200;
};

// Root of a continuous nondecreasing f with f(-inf) < 0 < f(+inf): geometric
// bracket expansion around the warm start, then bisection with Newton steps
// whenever the derivative is positive and the step stays inside the bracket.
// fprime may be null (pure bisection).
inline double find_monotone_root(const std::function<double(double)>& f,
                                 const std::function<double(double)>& fprime, double warm_start,
                                 const RootOptions& opts = {}) {
  double lo = warm_start, hi = warm_start;
  double flo = f(lo), fhi = flo;
  if (std::isnan(flo)) throw numeric_error("root: f(warm start) is NaN");

  double step = opts.initial_step;
  int doublings = 0;
  if (flo > 0.0) {
    // expand downwards until f(lo) <= 0
    while (flo > 0.0) {
      if (++doublings > opts.max_doublings)
        throw numeric_error("root: bracket expansion exceeded doubling limit");
      hi = lo;
      fhi = flo;
      lo -= step;
      step *= 2.0;
      flo = f(lo);
    }
  } else {
    while (fhi < 0.0) {
      if (++doublings > opts.max_doublings)
        throw numeric_error("root: bracket expansion exceeded doubling limit");
      lo = hi;
      flo = fhi;
      hi += step;
      step *= 2.0;
      fhi = f(hi);
    }
  }
  if (std::abs(flo) <= opts.f_tol) return lo;
  if (std::abs(fhi) <= opts.f_tol) return hi;

  double v = 0.5 * (lo + hi);
  for (int it = 0; it < opts.max_iters; ++it) {
    double fv = f(v);
    if (std::abs(fv) <= opts.f_tol) return v;
    if (fv < 0.0)
      lo = v;
    else
      hi = v;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(v))) return v;

    double next = 0.0;
    bool used_newton = false;
    if (fprime) {
      const double d = fprime(v);
      if (d > 0.0) {
        next = v - fv / d;
        if (next > lo && next < hi) used_newton = true;
      }
    }
    v = used_newton ? next : 0.5 * (lo + hi);
  }
  return v;
}

}  // namespace dot
