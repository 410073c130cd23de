#pragma once

// Convergence-theory calculator for block EM: the h-family of functions,
// the three sufficient conditions, and the finite-sample error bound.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "netdenoise/errors.hpp"

namespace netdenoise::theory {

inline void require_open_half(double x, const char* name) {
  if (!(x > 0.0 && x < 0.5)) throw ConfigError(std::string(name) + " must lie in (0, 1/2)");
}

/// h(x) = log(2-2x) / (log(2-2x) - log(2x)), increasing on (0, 1/2) with
/// h(x) >= x.
inline double h(double x) {
  require_open_half(x, "x");
  const double a = std::log(2.0 - 2.0 * x);
  return a / (a - std::log(2.0 * x));
}

/// Inverse of h by bisection on (0, 1/2).
inline double h_inv(double y, double tol = 1e-12) {
  require_open_half(y, "y");
  double lo = 0.0, hi = 0.5;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// phi(x) = x - h^{-1}(x/2 + h(x)/2) >= 0.
inline double phi(double x) { return x - h_inv(0.5 * x + 0.5 * h(x)); }

/// varphi(x, y) = (x - h(x))^2 (y - h(y))^2.
inline double varphi(double x, double y) {
  const double a = x - h(x), b = y - h(y);
  return a * a * b * b;
}

/// H(x, y) = log((1-x)/y) / (log((1-x)/y) + log((1-y)/x)); H(x, 1/2) = h(x).
inline double H(double x, double y) {
  if (!(x > 0.0 && x <= 0.5 && y > 0.0 && y <= 0.5)) throw ConfigError("H needs x, y in (0, 1/2]");
  const double a = std::log((1.0 - x) / y);
  return a / (a + std::log((1.0 - y) / x));
}

/// Membership of (p2, q2) in the contraction neighborhood U_eps(p, q):
/// each coordinate strictly between h^{-1}(eps h(x) + (1-eps) x) and 1/2.
inline bool in_neighborhood(double p, double q, double eps, double p2, double q2) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("eps must lie in [0, 1)");
  const double lp = h_inv(eps * h(p) + (1.0 - eps) * p);
  const double lq = h_inv(eps * h(q) + (1.0 - eps) * q);
  return p2 > lp && p2 < 0.5 && q2 > lq && q2 < 0.5;
}

struct BoundInputs {
  double delta = 0.1;
  double w = 0.5, p = 0.25, q = 0.25;
  double N = 10;
  double n_k = 100, n_l = 100;
  double gamma = 0.0;      ///< label error
  double r = 1.0;          ///< tail parameter, probability 1 - exp(-r)
  double t = 0.0;          ///< EM iterations
  double init_dist = 0.0;  ///< ||theta^0 - theta||
  double C = 1.0;          ///< the unspecified absolute constant

  void validate() const {
    if (!(delta > 0.0 && delta < 0.25)) throw ConfigError("delta must lie in (0, 1/4)");
    require_open_half(p, "p");
    require_open_half(q, "q");
    if (!(w > 0.0 && w < 1.0)) throw ConfigError("w must lie in (0, 1)");
    if (!(N >= 1 && n_k >= 1 && n_l >= 1)) throw ConfigError("N, n_k, n_l must be positive");
    if (!(gamma >= 0.0 && r > 0.0 && t >= 0.0 && init_dist >= 0.0 && C > 0.0))
      throw ConfigError("gamma, t, init_dist must be >= 0 and r, C > 0");
  }

  /// delta <= p, q <= 1/2 - delta and delta <= w <= 1 - delta.
  bool in_region() const {
    return p >= delta && p <= 0.5 - delta && q >= delta && q <= 0.5 - delta && w >= delta &&
           w <= 1.0 - delta;
  }
};

struct Condition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  double margin = 0.0;  ///< lhs - rhs for ">=" conditions, rhs - lhs for "<="
};

struct ConditionReport {
  bool in_region = false;
  std::vector<Condition> conditions;

  bool all_pass() const {
    return in_region && std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
  }
};

inline ConditionReport check_conditions(const BoundInputs& in) {
  in.validate();
  const double d = in.delta;
  const double fp = phi(in.p), fq = phi(in.q), vpq = varphi(in.p, in.q);
  ConditionReport rep;
  rep.in_region = in.in_region();

  const double n_req = in.C / (d * d) *
                       std::max({std::log(1.0 / (d * fp)), std::log(1.0 / (d * fq)), std::log(1.0 / d) / vpq});
  rep.conditions.push_back({"sample_count", in.N, n_req, in.N >= n_req, in.N - n_req});

  const double block = in.n_k * in.n_l;
  const double b_req = in.C * in.r * in.r * in.N / (d * d * d) *
                       std::max({1.0 / (d * d), 1.0 / (fp * fp), 1.0 / (fq * fq)});
  rep.conditions.push_back({"block_size", block, b_req, block >= b_req, block - b_req});

  const double g2 = in.gamma * in.gamma;
  const double g_max = d / in.C * std::max({d, fp, fq});
  rep.conditions.push_back({"label_error", g2, g_max, g2 <= g_max, g_max - g2});
  return rep;
}

struct BoundReport {
  double bound = 0.0;
  double contraction = 0.0;  ///< exp(-t [N delta varphi - log(N / delta^4)]) ||theta^0 - theta||
  double label_term = 0.0;   ///< gamma^2 / delta
  double stat_term = 0.0;    ///< r Phi / delta
  double Phi = 0.0;
  double Phi_sqrt_branch = 0.0;
  double Phi_exp_branch = 0.0;
};

inline BoundReport theorem1_bound(const BoundInputs& in) {
  in.validate();
  const double d = in.delta;
  const double vpq = varphi(in.p, in.q);
  const double block = in.n_k * in.n_l;
  BoundReport b;
  const double rate = in.N * d * vpq - std::log(in.N / std::pow(d, 4));
  b.contraction = std::exp(-in.t * rate) * in.init_dist;
  b.label_term = in.gamma * in.gamma / d;
  const double lg = std::log(1.0 / d - 1.0);
  b.Phi_sqrt_branch = lg * lg * std::sqrt(in.N / block);
  b.Phi_exp_branch = std::pow(1.0 + d, -in.N * vpq) / d + 1.0 / std::sqrt(d * block);
  b.Phi = std::min(b.Phi_sqrt_branch, b.Phi_exp_branch);
  b.stat_term = in.r * b.Phi / d;
  b.bound = b.contraction + b.label_term + b.stat_term;
  return b;
}

}  // namespace netdenoise::theory
