#pragma once

#include <cmath>
#include <vector>

#include "dot/coupling.hpp"
#include "dot/divergence.hpp"
#include "dot/error.hpp"
#include "dot/exact_ot.hpp"
#include "dot/measure.hpp"
#include "dot/numerics.hpp"

namespace dot {

struct ShadowResult {
  Coupling shadow;             // coupling of the target tuple
  double transport_cost = 0.0; // realized W_p displacement of pi (x) K
  double divergence_before = 0.0;  // D_phi(pi, P)
  double divergence_after = 0.0;   // D_phi(shadow, P~)
};

// Shadow of pi under target marginals: push each axis through the kernel
// K_i(x_i) = theta_i(x_i, .) / mu_i(x_i) built from W_p-optimal plans
// theta_i between mu_i and mu~_i.  The result lies in Pi(mu~) and its
// divergence never exceeds that of pi (data-processing inequality).
inline ShadowResult shadow(const Coupling& pi, const MarginalTuple& target, double p,
                           const DivergenceSpec& divergence,
                           std::size_t wasserstein_max_side = 500) {
  const MarginalTuple& source = pi.marginals();
  if (source.count() != target.count()) throw config_error("shadow: tuples differ in N");
  const std::size_t n = source.count();

  // per-axis kernels from optimal plans
  std::vector<TransportPlan> plans(n);
  for (std::size_t i = 0; i < n; ++i)
    plans[i] = wasserstein(source.marginal(i), target.marginal(i), p, wasserstein_max_side).plan;

  // mode-wise contraction of the mass tensor with each kernel
  std::vector<double> mass = pi.mass();
  std::vector<std::size_t> dims = source.shape().dims();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t n_old = dims[i];
    const std::size_t n_new = target.marginal(i).size();
    std::size_t stride = 1;
    for (std::size_t j = i + 1; j < n; ++j) stride *= dims[j];
    std::size_t outer = 1;
    for (std::size_t j = 0; j < i; ++j) outer *= dims[j];

    std::vector<double> next(outer * n_new * stride, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t a = 0; a < n_old; ++a) {
        const double wa = source.marginal(i).weight(a);
        for (std::size_t b = 0; b < n_new; ++b) {
          const double k = plans[i].at(a, b) / wa;
          if (k == 0.0) continue;
          const std::size_t src = (o * n_old + a) * stride;
          const std::size_t dst = (o * n_new + b) * stride;
          for (std::size_t s = 0; s < stride; ++s) next[dst + s] += k * mass[src + s];
        }
      }
    }
    mass = std::move(next);
    dims[i] = n_new;
  }

  ShadowResult out;
  out.shadow = Coupling(target, std::move(mass));

  // realized displacement: sum_i sum_a pi_i(a) E_{K_i(a)}[d^p]
  const double metric_p = p;
  KahanSum disp;
  for (std::size_t i = 0; i < n; ++i) {
    const auto pi_marginal = pi.tensor_marginal(i);
    for (std::size_t a = 0; a < pi_marginal.size(); ++a) {
      const double wa = source.marginal(i).weight(a);
      KahanSum e;
      for (std::size_t b = 0; b < target.marginal(i).size(); ++b) {
        const double k = plans[i].at(a, b) / wa;
        if (k == 0.0) continue;
        e.add(k * std::pow(euclidean_dist(source.marginal(i).point(a), target.marginal(i).point(b)),
                           metric_p));
      }
      disp.add(pi_marginal[a] * e.value());
    }
  }
  out.transport_cost = std::pow(std::max(0.0, disp.value()), 1.0 / p);

  // divergences against the respective product measures
  auto dphi = [&](const Coupling& c) {
    const std::vector<double> pw = c.marginals().product_weights();
    KahanSum s;
    for (std::size_t f = 0; f < pw.size(); ++f) s.add(divergence.phi(c.density()[f]) * pw[f]);
    return s.value();
  };
  out.divergence_before = dphi(pi);
  out.divergence_after = dphi(out.shadow);
  return out;
}

}  // namespace dot
