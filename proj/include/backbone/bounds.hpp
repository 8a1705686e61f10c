#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "backbone/stats.hpp"
#include "backbone/types.hpp"

namespace backbone {

enum class Model { Sync, Delay, MsgLoss };

inline Model model_from_name(const std::string& name) {
  if (name == "sync") return Model::Sync;
  if (name == "delay") return Model::Delay;
  if (name == "msgloss") return Model::MsgLoss;
  throw config_error("unknown model: " + name);
}

inline std::string model_name(Model m) {
  switch (m) {
    case Model::Sync: return "sync";
    case Model::Delay: return "delay";
    case Model::MsgLoss: return "msgloss";
  }
  return "sync";
}

/// The model instantiation implied by (delta, B): delay needs delta >= 1,
/// message loss is B=0, otherwise the synchronous model.
inline Model classify_model(const ModelParams& p) {
  if (p.delta_net > 0) return Model::Delay;
  if (!p.b_flag) return Model::MsgLoss;
  return Model::Sync;
}

struct ExpectedCounts {
  double e_n_alert = 0.0;
  double e_n_sleepy = 0.0;
  double e_n_star_alert = 0.0;
};

inline ExpectedCounts expected_counts(int n, int t, double s) {
  if (t < 0 || t >= n) throw config_error("require 0 <= t < n");
  if (s < 0.0 || s > 1.0) throw config_error("require s in [0,1]");
  double h = static_cast<double>(n - t);
  return {(1.0 - s) * h, s * h, (1.0 - s) * (1.0 - s) * h};
}

/// a/(1+a) <= E[X_i] <= a with a = pq * E[n_alert].
inline std::pair<double, double> ex_bounds(double p, int q, double e_n_alert) {
  if (p <= 0.0 || p >= 1.0) throw config_error("require p in (0,1)");
  if (q < 1) throw config_error("require q >= 1");
  if (e_n_alert < 0.0) throw config_error("require e_n_alert >= 0");
  double a = p * q * e_n_alert;
  return {a / (1.0 + a), a};
}

/// Exact E[X_i]: the chance at least one of the n-t honest parties is awake
/// and finds a PoW, each party alert w.p. `alert_prob` with q tries at p.
inline double ex_exact_generic(double p, int q, int honest, double alert_prob) {
  double fail_q = std::pow(1.0 - p, q);
  double per_party_quiet = (1.0 - alert_prob) + alert_prob * fail_q;
  return 1.0 - std::pow(per_party_quiet, honest);
}

inline double ex_exact(const ModelParams& mp) {
  return ex_exact_generic(mp.p, mp.q, mp.n - mp.t, 1.0 - mp.s);
}

/// Exact E[X*_i]: only parties alert in both round i and i+1 count, so the
/// per-party alert probability is (1-s)^2.
inline double ex_star_exact(const ModelParams& mp) {
  return ex_exact_generic(mp.p, mp.q, mp.n - mp.t, (1.0 - mp.s) * (1.0 - mp.s));
}

/// E[pq k (1-p)^{q(k-1)}] over k ~ Binom(honest, alert_prob).
inline double ey_exact_generic(double p, int q, int honest, double alert_prob) {
  double total = 0.0;
  for (int k = 1; k <= honest; ++k)
    total += binom_pmf(honest, alert_prob, k) * p * q * k *
             std::pow(1.0 - p, static_cast<double>(q) * (k - 1));
  return total;
}

inline double ey_exact(const ModelParams& mp) {
  return ey_exact_generic(mp.p, mp.q, mp.n - mp.t, 1.0 - mp.s);
}

inline double ey_star_exact(const ModelParams& mp) {
  return ey_exact_generic(mp.p, mp.q, mp.n - mp.t, (1.0 - mp.s) * (1.0 - mp.s));
}

inline double ez_exact(const ModelParams& mp) {
  return static_cast<double>(mp.q) * mp.p * mp.t;
}

/// Delta-isolated expectations: E[X'] = E[X](1-E[X])^{Delta-1},
/// E[Y'] = E[X](1-E[X])^{2 Delta - 1}.
inline double ex_iso(double ex, int delta) {
  return ex * std::pow(1.0 - ex, delta - 1);
}
inline double ey_iso(double ex, int delta) {
  return ex * std::pow(1.0 - ex, 2 * delta - 1);
}

/// Delay-model delta convention: the stated bound uses E[X_i]; the numeric
/// evaluation in the source analysis substitutes E[X'_i]. Default reproduces
/// the published numbers.
enum class DelayDeltaConvention { Strict, Isolated };

/// Minimum admissible advantage delta per model. `eta_kappa = 0` is the
/// infinity sentinel and drops the 4*Delta/(eta*kappa) term.
inline double delta_min(Model model, double ex, double ex_star, double epsilon,
                        int delta_net, long long eta_kappa,
                        DelayDeltaConvention conv = DelayDeltaConvention::Isolated) {
  switch (model) {
    case Model::Sync:
      return 2.0 * ex + 2.0 * epsilon;
    case Model::Delay: {
      if (delta_net < 1) throw config_error("delay model requires delta >= 1");
      double base = (conv == DelayDeltaConvention::Isolated) ? ex_iso(ex, delta_net) : ex;
      double tail = eta_kappa == kEtaKappaInfinite
                        ? 0.0
                        : 4.0 * delta_net / static_cast<double>(eta_kappa);
      return 2.0 * delta_net * base + 4.0 * epsilon + tail;
    }
    case Model::MsgLoss:
      return 3.0 * epsilon + 2.0 * ex_star;
  }
  throw config_error("bad model");
}

struct SMaxResult {
  double value = 0.0;
  bool satisfiable = true;   // false: no s in [0,1] satisfies the assumption
  double printed_formula = 0.0;  // msgloss only: published closed-form value
  double residual = 0.0;     // msgloss only: defining-equation residual at value
};

/// Maximum sleep probability under the model's honest-majority assumption.
/// Sync/delay: the linear formula clamped to [0,1]. MsgLoss: the root of
/// c(1-d)(1-s)^2 - s(1-s) - t/(n-t) = 0 found by bisection; the published
/// closed form is reported alongside for comparison.
inline SMaxResult s_max(Model model, double c, double delta, int t, int n) {
  if (c <= 0.0 || c > 1.0) throw config_error("require c in (0,1]");
  if (delta <= 0.0 || delta >= 1.0) throw config_error("require delta in (0,1)");
  if (t < 0 || t >= n) throw config_error("require 0 <= t < n");
  double tf = static_cast<double>(t) / (n - t);
  double a = c * (1.0 - delta);
  SMaxResult r;
  if (model != Model::MsgLoss) {
    double v = 1.0 - tf / a;
    r.value = std::min(1.0, std::max(0.0, v));
    r.satisfiable = v >= 0.0;
    if (!r.satisfiable) r.value = 0.0;
    return r;
  }
  // f(s) = a(1-s)^2 - s(1-s) - tf; decreasing on [0,1]; f(1) = -tf <= 0.
  auto f = [&](double s) { return a * (1.0 - s) * (1.0 - s) - s * (1.0 - s) - tf; };
  if (f(0.0) < 0.0) {
    r.satisfiable = false;
    r.value = 0.0;
  } else {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      double mid = 0.5 * (lo + hi);
      (f(mid) >= 0.0 ? lo : hi) = mid;
    }
    r.value = 0.5 * (lo + hi);
    r.residual = f(r.value);
  }
  r.printed_formula =
      (2.0 * a - std::sqrt(1.0 + 4.0 * (1.0 + a * tf))) / (2.0 * (1.0 + a));
  return r;
}

/// Fraction of blocks an alert party may lose from its local chain per round
/// window, bounded by s/(1-s).
inline double phi_bound(double s) {
  if (s < 0.0 || s >= 1.0) throw config_error("phi bound requires s in [0,1)");
  return s / (1.0 - s);
}

/// t/n at equality of the majority assumption with s = 0: c(1-d)/(1+c(1-d)).
inline double max_adv_fraction(double c, double delta) {
  if (c <= 0.0 || c > 1.0) throw config_error("require c in (0,1]");
  if (delta <= 0.0 || delta >= 1.0) throw config_error("require delta in (0,1)");
  double a = c * (1.0 - delta);
  return a / (1.0 + a);
}

struct RelationExpectations {
  double ex = 0.0;        // E[X_i]
  double ey = 0.0;        // E[Y_i]
  double ey_lower = 0.0;  // E[X](1 - E[X]) family bound
  double ez = 0.0;        // E[Z_i]
  double ex_iso = 0.0;    // E[X'_i] (delay model)
  double ey_iso = 0.0;    // E[Y'_i] (delay model)
  double ex_star = 0.0;   // E[X*_i] (msgloss model)
  double ey_star = 0.0;   // E[Y*_i] (msgloss model)
  double sigma = 0.0;        // (1-eps)(1-E[X])
  double sigma_prime = 0.0;  // (1-eps)(1-E[X])^Delta
  double sigma_star = 0.0;   // (1-eps)(1-E[X*])
};

inline RelationExpectations relation_expectations(const ModelParams& mp) {
  RelationExpectations r;
  r.ex = ex_exact(mp);
  r.ey = ey_exact(mp);
  r.ey_lower = r.ex * (1.0 - r.ex);
  r.ez = ez_exact(mp);
  int d = std::max(1, mp.delta_net);
  r.ex_iso = ex_iso(r.ex, d);
  r.ey_iso = ey_iso(r.ex, d);
  r.ex_star = ex_star_exact(mp);
  r.ey_star = ey_star_exact(mp);
  double e = mp.epsilon;
  r.sigma = (1.0 - e) * (1.0 - r.ex);
  r.sigma_prime = (1.0 - e) * std::pow(1.0 - r.ex, d);
  r.sigma_star = (1.0 - e) * (1.0 - r.ex_star);
  return r;
}

struct BoundsReport {
  Model model = Model::Sync;
  ExpectedCounts counts;
  double ex_lower = 0.0, ex_upper = 0.0;
  double ex = 0.0, ey = 0.0, ey_lower = 0.0, ez = 0.0;
  double ex_iso = 0.0, ey_iso = 0.0;
  double ex_star = 0.0, ey_star = 0.0;
  double delta_min = 0.0;
  SMaxResult s_max;
  double phi_max = 0.0;
  double sigma = 0.0, sigma_prime = 0.0, sigma_star = 0.0;
  bool majority_ok = false;
  bool two_ex_ok = true;  // 2 E[X_i] <= 1, assumed throughout the analysis
  double max_adv_fraction = 0.0;
};

inline BoundsReport bounds_report(const ModelParams& mp,
                                  DelayDeltaConvention conv = DelayDeltaConvention::Isolated) {
  mp.validate();
  BoundsReport r;
  r.model = classify_model(mp);
  r.counts = expected_counts(mp.n, mp.t, mp.s);
  std::tie(r.ex_lower, r.ex_upper) = ex_bounds(mp.p, mp.q, r.counts.e_n_alert);
  auto rel = relation_expectations(mp);
  r.ex = rel.ex;
  r.ey = rel.ey;
  r.ey_lower = rel.ey_lower;
  r.ez = rel.ez;
  r.ex_iso = rel.ex_iso;
  r.ey_iso = rel.ey_iso;
  r.ex_star = rel.ex_star;
  r.ey_star = rel.ey_star;
  r.sigma = rel.sigma;
  r.sigma_prime = rel.sigma_prime;
  r.sigma_star = rel.sigma_star;
  r.delta_min = delta_min(r.model, r.ex, r.ex_star, mp.epsilon, mp.delta_net,
                          mp.eta_kappa, conv);
  r.two_ex_ok = 2.0 * r.ex <= 1.0;
  r.phi_max = mp.s < 1.0 ? phi_bound(mp.s) : std::numeric_limits<double>::infinity();
  double d = std::min(0.999999999, std::max(r.delta_min, 1e-12));
  r.s_max = s_max(r.model, mp.c, d, mp.t, mp.n);
  r.majority_ok = r.s_max.satisfiable && mp.s <= r.s_max.value + 1e-12;
  r.max_adv_fraction = max_adv_fraction(mp.c, d);
  return r;
}

struct Figure1Point {
  Model model;
  double t_fraction;  // t / n
  double s_max;
};

/// One Figure-1 style series: for each t in the grid, compute the model's
/// delta_min at that t (s = 0 baseline expectations scaled by alert count are
/// fixed via `mp` with t substituted) and then s_max at that delta.
inline std::vector<Figure1Point> figure1_dataset(Model model, ModelParams mp,
                                                 const std::vector<int>& t_grid,
                                                 DelayDeltaConvention conv = DelayDeltaConvention::Isolated) {
  std::vector<Figure1Point> out;
  out.reserve(t_grid.size());
  for (int t : t_grid) {
    if (t < 0 || t >= mp.n) throw config_error("t grid point out of range");
    ModelParams pt = mp;
    pt.t = t;
    double ex = ex_exact(pt);
    double exs = ex_star_exact(pt);
    double dm = delta_min(model, ex, exs, pt.epsilon, pt.delta_net, pt.eta_kappa, conv);
    double d = std::min(0.999999999, std::max(dm, 1e-12));
    auto sm = s_max(model, pt.c, d, t, pt.n);
    out.push_back({model, static_cast<double>(t) / pt.n, sm.value});
  }
  return out;
}

}  // namespace backbone
