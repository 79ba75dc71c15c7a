#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "dot/error.hpp"

namespace dot {

enum class DivergenceKind { Entropic, Alpha, PolyDual };

// A generator / conjugate pair.  phi is strictly convex on [0, inf) with
// phi(1) = 0 and superlinear growth; psi(y) = sup_{x>=0} (x*y - phi(x)).
//
// Closed forms, with b = a/(a-1) the conjugate exponent of a:
//   Entropic    phi(x) = x log x
//               psi(y) = exp(y-1)
//   Alpha(a)    phi(x) = (x^a - a(x-1) - 1) / (a(a-1)),  1 < a <= 2
//               psi(y) = ((1 + (a-1) y)_+^b - 1) / a
//               psi'(y) = (1 + (a-1) y)_+^(b-1)
//   PolyDual(b) phi(x) = c_b (x^(b/(b-1)) - 1),  c_b = (1 - 1/b) b^(-1/(b-1))
//               psi(y) = (y_+)^b + c_b,   psi'(y) = b (y_+)^(b-1)
//
// PolyDual is the family whose conjugate of eps*phi is (y_+)^b / eps^(b-1),
// which is what the epsilon-sweep diagnostic evaluates explicitly; the "+ c_b"
// shift is forced by the phi(1) = 0 normalization and drops out of densities.
class DivergenceSpec {
public:
  static DivergenceSpec entropic() {
    DivergenceSpec d;
    d.kind_ = DivergenceKind::Entropic;
    d.lambda1_ = 0.0;
    d.lambda2_ = 1.0;
    d.x0_ = 1.0;  // psi'(y) = e^(y-1) equals 1 at y = 1
    d.delta_ = 1.0;
    return d;
  }

  // 1 < alpha <= 2; alpha = 2 is the chi-square divergence.
  static DivergenceSpec alpha(double a) {
    if (!(a > 1.0 && a <= 2.0))
      throw config_error("alpha divergence requires 1 < alpha <= 2, got " + std::to_string(a));
    DivergenceSpec d;
    d.kind_ = DivergenceKind::Alpha;
    d.alpha_ = a;
    d.beta_ = a / (a - 1.0);
    d.lambda1_ = a - 1.0;
    d.lambda2_ = 2.0 - a;
    d.x0_ = 0.0;  // psi'(0) = 1
    d.delta_ = 0.5 / (a - 1.0);  // psi strictly convex on (-1/(a-1), inf)
    return d;
  }

  static DivergenceSpec poly_dual(int beta) {
    if (beta < 2) throw config_error("poly_beta requires an integer beta >= 2");
    DivergenceSpec d;
    d.kind_ = DivergenceKind::PolyDual;
    d.beta_ = static_cast<double>(beta);
    d.alpha_ = d.beta_ / (d.beta_ - 1.0);
    d.poly_shift_ = (1.0 - 1.0 / d.beta_) * std::pow(d.beta_, -1.0 / (d.beta_ - 1.0));
    d.x0_ = std::pow(1.0 / d.beta_, 1.0 / (d.beta_ - 1.0));  // b x0^(b-1) = 1
    d.delta_ = 0.5 * d.x0_;
    if (beta == 2) {
      d.lambda1_ = 2.0;  // 1/phi'' = 2 exactly
      d.lambda2_ = 0.0;
    } else {
      d.lambda1_ = -1.0;  // no certificate
      d.lambda2_ = -1.0;
    }
    return d;
  }

  DivergenceKind kind() const { return kind_; }
  double alpha_value() const { return alpha_; }
  double beta_value() const { return beta_; }
  double x0() const { return x0_; }
  double delta() const { return delta_; }

  std::string name() const {
    switch (kind_) {
      case DivergenceKind::Entropic: return "entropic";
      case DivergenceKind::Alpha: return "alpha(" + std::to_string(alpha_) + ")";
      case DivergenceKind::PolyDual: return "poly_dual(" + std::to_string(static_cast<int>(beta_)) + ")";
    }
    return "?";
  }

  double phi(double x) const {
    if (x < 0.0) throw std::domain_error("phi: negative argument");
    switch (kind_) {
      case DivergenceKind::Entropic:
        return x == 0.0 ? 0.0 : x * std::log(x);  // 0 log 0 := 0
      case DivergenceKind::Alpha: {
        if (x == 1.0) return 0.0;
        return (std::pow(x, alpha_) - alpha_ * (x - 1.0) - 1.0) / (alpha_ * (alpha_ - 1.0));
      }
      case DivergenceKind::PolyDual: {
        if (x == 1.0) return 0.0;
        const double ap = beta_ / (beta_ - 1.0);
        return poly_shift_ * (std::pow(x, ap) - 1.0);
      }
    }
    return 0.0;
  }

  double phi_second(double x) const {
    if (x <= 0.0) throw std::domain_error("phi_second: argument must be positive");
    switch (kind_) {
      case DivergenceKind::Entropic: return 1.0 / x;
      case DivergenceKind::Alpha: return std::pow(x, alpha_ - 2.0);
      case DivergenceKind::PolyDual: {
        const double ap = beta_ / (beta_ - 1.0);
        return poly_shift_ * ap * (ap - 1.0) * std::pow(x, ap - 2.0);
      }
    }
    return 0.0;
  }

  double psi(double y) const {
    switch (kind_) {
      case DivergenceKind::Entropic: return std::exp(y - 1.0);
      case DivergenceKind::Alpha: {
        const double t = 1.0 + (alpha_ - 1.0) * y;
        if (t <= 0.0) return -1.0 / alpha_;
        return (std::pow(t, beta_) - 1.0) / alpha_;
      }
      case DivergenceKind::PolyDual:
        return y <= 0.0 ? poly_shift_ : std::pow(y, beta_) + poly_shift_;
    }
    return 0.0;
  }

  // psi' is nonnegative and nondecreasing; it is the density map of the
  // optimal coupling and is exactly zero below the kink for the sparse kinds.
  double psi_prime(double y) const {
    switch (kind_) {
      case DivergenceKind::Entropic: return std::exp(y - 1.0);
      case DivergenceKind::Alpha: {
        const double t = 1.0 + (alpha_ - 1.0) * y;
        if (t <= 0.0) return 0.0;
        return std::pow(t, beta_ - 1.0);
      }
      case DivergenceKind::PolyDual:
        return y <= 0.0 ? 0.0 : beta_ * std::pow(y, beta_ - 1.0);
    }
    return 0.0;
  }

  double psi_second(double y) const {
    switch (kind_) {
      case DivergenceKind::Entropic: return std::exp(y - 1.0);
      case DivergenceKind::Alpha: {
        const double t = 1.0 + (alpha_ - 1.0) * y;
        if (t <= 0.0) return 0.0;
        if (beta_ == 2.0) return 1.0;
        return std::pow(t, beta_ - 2.0);
      }
      case DivergenceKind::PolyDual:
        if (y <= 0.0) return 0.0;
        return beta_ * (beta_ - 1.0) * std::pow(y, beta_ - 2.0);
    }
    return 0.0;
  }

  bool has_convexity_certificate() const { return lambda1_ >= 0.0 && lambda2_ >= 0.0; }

  // (lambda1, lambda2) with 1/phi''(x) <= lambda1 + lambda2 x on (0, inf).
  std::pair<double, double> convexity_params() const {
    if (!has_convexity_certificate())
      throw config_error("no (lambda1, lambda2) certificate for " + name());
    return {lambda1_, lambda2_};
  }

  // Inverse of psi' at 1; the solver's cold-start potential level.
  double psi_prime_inverse_of_one() const { return x0_; }

  // Appendix parameterization: conjugate of eps*phi for the PolyDual kind,
  // psi_eps(y) = (y_+)^b / eps^(b-1) up to the phi(1)=0 shift.
  double poly_dual_eps_psi_prime(double eps, double y) const {
    if (kind_ != DivergenceKind::PolyDual)
      throw config_error("poly_dual_eps_psi_prime requires the poly_dual kind");
    if (y <= 0.0) return 0.0;
    return beta_ * std::pow(y, beta_ - 1.0) / std::pow(eps, beta_ - 1.0);
  }

private:
  DivergenceKind kind_ = DivergenceKind::Entropic;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double poly_shift_ = 0.0;  // c_b
  double lambda1_ = 0.0;
  double lambda2_ = 0.0;
  double x0_ = 0.0;
  double delta_ = 0.0;
};

}  // namespace dot
