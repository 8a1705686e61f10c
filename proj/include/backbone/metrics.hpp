#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "backbone/bounds.hpp"
#include "backbone/chain.hpp"
#include "backbone/types.hpp"
#include "backbone/view.hpp"

namespace backbone {

/// Per-round random variables. x/y: (unique) successful round; z: number of
/// adversarial PoW successes; x_iso/y_iso: Delta-isolated variants;
/// x_star/y_star: restricted to miners whose head lay in C_i, the set of
/// longest chains at the start of round i; x_tilde: successes off C_i.
/// n_in_ci counts all honest parties with head in C_i, n_star_alert only the
/// alert ones.
struct RoundIndicators {
  std::uint8_t x = 0, y = 0;
  std::uint16_t z = 0;
  std::uint8_t x_iso = 0, y_iso = 0;
  std::uint8_t x_star = 0, y_star = 0;
  std::uint8_t x_tilde = 0;
  std::uint16_t n_alert = 0;
  std::uint16_t n_star_alert = 0;
  std::uint16_t n_in_ci = 0;
};

inline std::vector<RoundIndicators> extract_indicators(const ExecutionView& view) {
  const int n = view.params.n, t = view.params.t;
  std::vector<RoundIndicators> out(view.rounds);
  HeadReplay replay(view);
  std::vector<bool> sleepy_flag(static_cast<std::size_t>(n), false);
  std::uint32_t public_max = 0;  // length of the longest public chain at round start

  for (std::uint32_t r = 1; r <= view.rounds; ++r) {
    auto rec = round_record(view, r);
    RoundIndicators& ri = out[r - 1];

    std::fill(sleepy_flag.begin(), sleepy_flag.end(), false);
    for (std::uint16_t ix : rec.sleepy) sleepy_flag[ix] = true;
    ri.n_alert = static_cast<std::uint16_t>(n - t - rec.sleepy.size());

    auto heads = replay.heads();  // end of round r-1 == start of round r
    for (int j = t; j < n; ++j) {
      if (view.store.height(heads[static_cast<std::size_t>(j)]) == public_max) {
        ++ri.n_in_ci;
        if (!sleepy_flag[static_cast<std::size_t>(j)]) ++ri.n_star_alert;
      }
    }

    int total = static_cast<int>(rec.honest_mined.size());
    int in_ci = 0;
    for (const auto& m : rec.honest_mined)
      if (view.store.height(m.parent) == public_max) ++in_ci;
    ri.x = total >= 1;
    ri.y = total == 1;
    ri.z = static_cast<std::uint16_t>(rec.adversary_mined.size());
    ri.x_star = in_ci >= 1;
    ri.y_star = in_ci == 1;
    ri.x_tilde = (total - in_ci) >= 1;

    replay.advance();
    for (BlockId h : replay.heads())
      public_max = std::max(public_max, view.store.height(h));
    for (BlockId h : rec.delivered)
      public_max = std::max(public_max, view.store.height(h));
  }

  // Isolation windows over the x sequence; Delta = 0 behaves like Delta = 1.
  const int d = std::max(1, view.params.delta_net);
  std::vector<std::uint32_t> xp(view.rounds + 1, 0);  // prefix sums of x
  for (std::uint32_t i = 0; i < view.rounds; ++i) xp[i + 1] = xp[i] + out[i].x;
  auto x_sum = [&](std::int64_t lo, std::int64_t hi) {  // 1-based inclusive, clipped
    lo = std::max<std::int64_t>(lo, 1);
    hi = std::min<std::int64_t>(hi, view.rounds);
    return lo > hi ? 0u : xp[static_cast<std::size_t>(hi)] - xp[static_cast<std::size_t>(lo - 1)];
  };
  for (std::uint32_t r = 1; r <= view.rounds; ++r) {
    RoundIndicators& ri = out[r - 1];
    ri.x_iso = ri.x && x_sum(static_cast<std::int64_t>(r) - d + 1, r - 1) == 0;
    ri.y_iso = ri.y && x_sum(static_cast<std::int64_t>(r) - d + 1, r - 1) == 0 &&
               x_sum(r + 1, static_cast<std::int64_t>(r) + d - 1) == 0;
  }
  return out;
}

/// CSV emission, one row per round. `header` (tool version + config hash) goes
/// first when non-empty.
inline void write_indicators_csv(std::span<const RoundIndicators> ind, std::ostream& os,
                                 const std::string& header = {}) {
  if (!header.empty()) os << header << '\n';
  os << "round,x,y,z,x_iso,y_iso,x_star,y_star,n_alert,n_star_alert\n";
  for (std::size_t i = 0; i < ind.size(); ++i) {
    const auto& r = ind[i];
    os << (i + 1) << ',' << int(r.x) << ',' << int(r.y) << ',' << r.z << ','
       << int(r.x_iso) << ',' << int(r.y_iso) << ',' << int(r.x_star) << ','
       << int(r.y_star) << ',' << r.n_alert << ',' << r.n_star_alert << '\n';
  }
}

// --- bad events -------------------------------------------------------------

struct BadEventCounts {
  std::uint64_t insertions = 0;
  std::uint64_t copies = 0;
  std::uint64_t predictions = 0;

  bool clean() const { return insertions == 0 && copies == 0 && predictions == 0; }
};

/// Classifies every recorded id collision and scans the store structurally.
/// A colliding block with the same parent as the incumbent would slot between
/// the parent and the incumbent's children: an insertion. A collision at a
/// different position is a copy. A block extending a parent created later is
/// a prediction.
inline BadEventCounts detect_bad_events(const ExecutionView& view) {
  BadEventCounts c;
  for (const IdCollision& ic : view.store.collisions()) {
    if (ic.attempted.parent_id == ic.existing.parent_id)
      ++c.insertions;
    else
      ++c.copies;
    if (view.store.contains(ic.attempted.parent_id) &&
        view.store.block(ic.attempted.parent_id).created_round > ic.attempted.created_round)
      ++c.predictions;
  }
  for (const auto& [id, b] : view.store.blocks()) {
    if (id == kGenesisId) continue;
    if (view.store.block(b.parent_id).created_round > b.created_round) ++c.predictions;
  }
  return c;
}

// --- typical execution ------------------------------------------------------

struct TypicalResult {
  bool typical = true;
  std::string failed_clause;  // empty when typical
};

namespace detail {

/// Two-sided concentration (1-eps)E < V < (1+eps)E; a zero expectation
/// requires a zero realization.
inline bool concentrated(double v, double e, double eps) {
  if (e <= 0.0) return v == 0.0;
  return (1.0 - eps) * e < v && v < (1.0 + eps) * e;
}

struct IndicatorSums {
  double x = 0, y = 0, z = 0, x_iso = 0, y_iso = 0, x_star = 0, y_star = 0;
  std::size_t len = 0;
};

inline IndicatorSums sum_over(std::span<const RoundIndicators> ind,
                              std::size_t first, std::size_t last) {
  if (first < 1 || last > ind.size() || first > last)
    throw config_error("bad round interval");
  IndicatorSums s;
  s.len = last - first + 1;
  for (std::size_t i = first - 1; i < last; ++i) {
    s.x += ind[i].x;
    s.y += ind[i].y;
    s.z += ind[i].z;
    s.x_iso += ind[i].x_iso;
    s.y_iso += ind[i].y_iso;
    s.x_star += ind[i].x_star;
    s.y_star += ind[i].y_star;
  }
  return s;
}

}  // namespace detail

/// Definition-9 check on rounds [first, last] (1-based, inclusive): every
/// variable of the model's family concentrates within (1 +/- eps) of its
/// expectation and no bad events occurred anywhere in the view.
inline TypicalResult typical_check(std::span<const RoundIndicators> ind,
                                   std::size_t first, std::size_t last,
                                   const ModelParams& params,
                                   const RelationExpectations& rel,
                                   const BadEventCounts& bad) {
  if (params.eta_kappa != kEtaKappaInfinite &&
      last - first + 1 < static_cast<std::size_t>(params.eta_kappa))
    throw config_error("interval shorter than eta*kappa");
  auto s = detail::sum_over(ind, first, last);
  double len = static_cast<double>(s.len);
  double eps = params.epsilon;
  Model model = classify_model(params);

  auto fail = [](const char* clause) { return TypicalResult{false, clause}; };
  switch (model) {
    case Model::Sync:
      if (!detail::concentrated(s.x, rel.ex * len, eps)) return fail("X");
      if (!detail::concentrated(s.y, rel.ey * len, eps)) return fail("Y");
      break;
    case Model::Delay:
      if (!detail::concentrated(s.x_iso, rel.ex_iso * len, eps)) return fail("X'");
      if (!detail::concentrated(s.y_iso, rel.ey_iso * len, eps)) return fail("Y'");
      break;
    case Model::MsgLoss:
      if (!detail::concentrated(s.x_star, rel.ex_star * len, eps)) return fail("X*");
      if (!detail::concentrated(s.y_star, rel.ey_star * len, eps)) return fail("Y*");
      break;
  }
  if (!detail::concentrated(s.z, rel.ez * len, eps)) return fail("Z");
  if (!bad.clean()) return fail("bad-events");
  return {};
}

// --- chain growth -----------------------------------------------------------

struct GrowthWitness {
  PartyIx party = kNobody;
  std::uint32_t start_round = 0, end_round = 0;
  std::uint32_t growth = 0;
};

struct GrowthResult {
  bool pass = true;
  std::uint64_t intervals_checked = 0;
  std::optional<GrowthWitness> witness;
};

/// Chain growth: every honest party alert at both endpoints of an interval of
/// `window`+1 rounds gains at least tau*window blocks (`plus_one` = false uses
/// the `window`-round interval convention instead). End-of-round chain
/// lengths; streams a ring buffer of the last window+1 rounds.
inline GrowthResult chain_growth_check(const ExecutionView& view, double tau,
                                       std::uint32_t window, bool plus_one = true) {
  if (window < 1) throw config_error("window must be >= 1");
  const int n = view.params.n, t = view.params.t;
  const std::uint32_t span = plus_one ? window : window - 1;  // end = start + span
  GrowthResult res;
  if (view.rounds <= span) return res;  // vacuous
  const double need = tau * window;

  HeadReplay replay(view);
  const std::uint32_t ring = span + 1;
  std::vector<std::uint32_t> len((std::size_t)ring * n, 0);
  std::vector<std::uint8_t> alert((std::size_t)ring * n, 0);
  for (std::uint32_t r = 1; r <= view.rounds; ++r) {
    replay.advance();
    auto rec = round_record(view, r);
    std::size_t slot = (std::size_t)(r % ring) * n;
    auto heads = replay.heads();
    for (int j = 0; j < n; ++j) {
      len[slot + (std::size_t)j] = view.store.height(heads[(std::size_t)j]);
      alert[slot + (std::size_t)j] = j >= t;
    }
    for (std::uint16_t ix : rec.sleepy) alert[slot + ix] = 0;
    if (r <= span) continue;
    std::size_t old_slot = (std::size_t)((r - span) % ring) * n;
    for (int j = t; j < n; ++j) {
      if (!alert[old_slot + (std::size_t)j] || !alert[slot + (std::size_t)j]) continue;
      ++res.intervals_checked;
      std::uint32_t growth = len[slot + (std::size_t)j] - len[old_slot + (std::size_t)j];
      if (static_cast<double>(growth) < need) {
        res.pass = false;
        if (!res.witness) res.witness = GrowthWitness{j, r - span, r, growth};
      }
    }
  }
  return res;
}

// --- common prefix ----------------------------------------------------------

struct PrefixWitness {
  std::uint32_t round1 = 0, round2 = 0;
  PartyIx party1 = kNobody, party2 = kNobody;
  std::uint32_t divergence_depth = 0;  // blocks of chain1 beyond the common ancestor
};

struct PrefixResult {
  bool pass = true;
  bool exhaustive = true;
  std::uint64_t pairs_checked = 0;
  std::optional<PrefixWitness> witness;
};

/// Common prefix with parameter k: for honest parties P1, P2 and rounds
/// r1 <= r2, the chain of P1 at r1 truncated by k is a prefix of P2's chain
/// at r2. Equivalent tree condition: height(common ancestor) >=
/// height(head1) - k. Exhaustive over round pairs up to `exhaustive_rounds`;
/// beyond that, all same-round and adjacent-round pairs plus `sampled_pairs`
/// random pairs. Per-party adoption reorgs are always checked exactly.
inline PrefixResult common_prefix_check(const ExecutionView& view, std::uint32_t k,
                                        std::uint32_t exhaustive_rounds = 2000,
                                        std::uint64_t sampled_pairs = 200000,
                                        std::uint64_t sample_seed = 1) {
  const int n = view.params.n, t = view.params.t;
  PrefixResult res;
  const ChainStore& st = view.store;

  // Distinct heads per round with one representative party each.
  std::vector<std::vector<std::pair<BlockId, PartyIx>>> heads_by_round(view.rounds + 1);
  HeadReplay replay(view);
  for (std::uint32_t r = 1; r <= view.rounds; ++r) {
    // Reorg depth at adoption: the adopting party's own r-1 chain vs r chain.
    auto before = replay.heads();
    for (const auto& a : view.adoptions.rows(r)) {
      BlockId old_head = before[a.party];
      std::uint32_t ca = st.common_ancestor_height(old_head, a.head);
      std::uint32_t h1 = st.height(old_head);
      ++res.pairs_checked;
      if (ca + k < h1) {
        res.pass = false;
        if (!res.witness)
          res.witness = PrefixWitness{r - 1, r, a.party, a.party, h1 - ca};
      }
    }
    replay.advance();
    auto heads = replay.heads();
    auto& hr = heads_by_round[r];
    for (int j = t; j < n; ++j) {
      BlockId h = heads[(std::size_t)j];
      bool seen = false;
      for (auto& [id, p] : hr)
        if (id == h) { seen = true; break; }
      if (!seen) hr.emplace_back(h, j);
    }
  }

  auto check_pair = [&](std::uint32_t r1, std::uint32_t r2) {
    for (auto& [h1, p1] : heads_by_round[r1]) {
      std::uint32_t hh1 = st.height(h1);
      for (auto& [h2, p2] : heads_by_round[r2]) {
        ++res.pairs_checked;
        std::uint32_t ca = st.common_ancestor_height(h1, h2);
        if (ca + k < hh1) {
          res.pass = false;
          if (!res.witness) res.witness = PrefixWitness{r1, r2, p1, p2, hh1 - ca};
        }
      }
    }
  };

  if (view.rounds <= exhaustive_rounds) {
    for (std::uint32_t r1 = 1; r1 <= view.rounds; ++r1)
      for (std::uint32_t r2 = r1; r2 <= view.rounds; ++r2) check_pair(r1, r2);
  } else {
    res.exhaustive = false;
    for (std::uint32_t r = 1; r <= view.rounds; ++r) {
      check_pair(r, r);
      if (r < view.rounds) check_pair(r, r + 1);
    }
    std::mt19937_64 rng(sample_seed);
    std::uniform_int_distribution<std::uint32_t> dist(1, view.rounds);
    for (std::uint64_t i = 0; i < sampled_pairs; ++i) {
      std::uint32_t a = dist(rng), b = dist(rng);
      check_pair(std::min(a, b), std::max(a, b));
    }
  }
  return res;
}

// --- chain quality ----------------------------------------------------------

struct QualityWitness {
  PartyIx party = kNobody;
  std::uint32_t window_start = 0;  // index into the party's chain
  double adversarial_ratio = 0.0;
};

struct QualityResult {
  bool pass = true;
  bool vacuous = false;  // every chain shorter than ell
  std::uint64_t windows_checked = 0;
  double worst_ratio = 0.0;
  std::optional<QualityWitness> witness;
};

/// Chain quality: over every honest party's final chain and every window of
/// ell consecutive blocks, the adversarial fraction is at most mu.
inline QualityResult chain_quality_check(const ExecutionView& view, double mu,
                                         std::uint32_t ell) {
  if (ell < 1) throw config_error("ell must be >= 1");
  const int n = view.params.n, t = view.params.t;
  QualityResult res;
  res.vacuous = true;

  HeadReplay replay(view);
  for (std::uint32_t r = 1; r <= view.rounds; ++r) replay.advance();
  auto heads = replay.heads();
  std::vector<BlockId> seen;
  for (int j = t; j < n; ++j) {
    BlockId h = heads[(std::size_t)j];
    if (std::find(seen.begin(), seen.end(), h) != seen.end()) continue;
    seen.push_back(h);
    Chain chain = chain_of(view.store, h);
    if (chain.size() < ell) continue;
    res.vacuous = false;
    // Sliding adversarial count.
    std::uint32_t adv = 0;
    auto is_adv = [&](std::size_t i) {
      return view.store.block(chain[i]).creator == kAdversary;
    };
    for (std::size_t i = 0; i < ell; ++i) adv += is_adv(i);
    for (std::size_t start = 0;; ++start) {
      ++res.windows_checked;
      double ratio = static_cast<double>(adv) / ell;
      if (ratio > res.worst_ratio) res.worst_ratio = ratio;
      if (ratio > mu) {
        res.pass = false;
        if (!res.witness)
          res.witness = QualityWitness{j, static_cast<std::uint32_t>(start), ratio};
      }
      if (start + ell >= chain.size()) break;
      adv -= is_adv(start);
      adv += is_adv(start + ell);
    }
  }
  return res;
}

// --- relations (lemma families a-e) ------------------------------------------

struct ClauseResult {
  bool pass = false;
  double lhs = 0.0, rhs = 0.0;
};

struct RelationsResult {
  ClauseResult a, b, c, d, e;
  bool all() const { return a.pass && b.pass && c.pass && d.pass && e.pass; }
};

/// Evaluates the model's relations a)-e) on realized sums over the rounds
/// [first, last] (1-based, inclusive). For the delay model the inner interval
/// S' of clauses d) and e) is derived by shrinking S by Delta on the
/// appropriate sides. `delta_adv` is the advantage delta of the assumption;
/// pass a negative value to use the model's delta_min.
inline RelationsResult relations_check(std::span<const RoundIndicators> ind,
                                       std::size_t first, std::size_t last,
                                       const ModelParams& params,
                                       const RelationExpectations& rel,
                                       double delta_adv = -1.0) {
  Model model = classify_model(params);
  if (delta_adv < 0.0)
    delta_adv = delta_min(model, rel.ex, rel.ex_star, params.epsilon,
                          params.delta_net, params.eta_kappa);
  const std::size_t min_len = params.eta_kappa == kEtaKappaInfinite
                                  ? 1
                                  : static_cast<std::size_t>(params.eta_kappa);
  if (last - first + 1 < min_len) throw config_error("interval shorter than eta*kappa");
  auto s = detail::sum_over(ind, first, last);
  const double len = static_cast<double>(s.len);
  const double eps = params.epsilon;
  const double e_n_alert = (1.0 - params.s) * (params.n - params.t);
  const double e_n_star = (1.0 - params.s) * (1.0 - params.s) * (params.n - params.t);
  const double t_frac = params.t;

  RelationsResult r;
  auto lt = [](double lhs, double rhs) { return ClauseResult{lhs < rhs, lhs, rhs}; };
  // With t = 0 the Z upper bounds degenerate; Z(S) must simply vanish.
  auto z_upper = [&](double rhs) {
    if (params.t == 0) return ClauseResult{s.z == 0.0, s.z, 0.0};
    return lt(s.z, rhs);
  };

  switch (model) {
    case Model::Sync: {
      double ex = rel.ex;
      double sigma = rel.sigma;
      bool a_lo = (1.0 - eps) * ex * len < s.x, a_hi = s.x < (1.0 + eps) * ex * len;
      r.a = {a_lo && a_hi, s.x, ex * len};
      r.b = ClauseResult{(1.0 - eps) * ex * (1.0 - ex) * len < s.y, s.y,
                         (1.0 - eps) * ex * (1.0 - ex) * len};
      r.b.pass = r.b.rhs < r.b.lhs;
      r.c = z_upper((1.0 + eps) * (t_frac / e_n_alert) * (ex / (1.0 - ex)) * len);
      r.d = z_upper((1.0 + delta_adv / sigma) * (t_frac / e_n_alert) * s.x);
      r.e = params.t == 0 ? ClauseResult{s.z == 0.0, s.z, s.y} : lt(s.z, s.y);
      break;
    }
    case Model::Delay: {
      const std::size_t d = static_cast<std::size_t>(std::max(1, params.delta_net));
      double ex = rel.ex;
      r.a = ClauseResult{(1.0 - eps) * rel.ex_iso * len < s.x_iso, s.x_iso,
                         (1.0 - eps) * rel.ex_iso * len};
      r.a.pass = r.a.rhs < r.a.lhs;
      r.b = ClauseResult{(1.0 - eps) * rel.ey_iso * len < s.y_iso, s.y_iso,
                         (1.0 - eps) * rel.ey_iso * len};
      r.b.pass = r.b.rhs < r.b.lhs;
      r.c = z_upper((1.0 + eps) * (t_frac / e_n_alert) * (ex / (1.0 - ex)) * len);
      // d) S = {r..r'+Delta}: S' drops Delta rounds at the top of S.
      if (last - first + 1 > d) {
        auto sp = detail::sum_over(ind, first, last - d);
        r.d = z_upper((1.0 + delta_adv / (2.0 * rel.sigma_prime)) *
                      (t_frac / e_n_alert) * sp.x_iso);
      }
      // e) S = {r-Delta..r'+Delta}: S' drops Delta rounds on both sides.
      if (last - first + 1 > 2 * d) {
        auto sp = detail::sum_over(ind, first + d, last - d);
        r.e = params.t == 0 ? ClauseResult{s.z == 0.0, s.z, sp.y_iso}
                            : lt(s.z, sp.y_iso);
      }
      break;
    }
    case Model::MsgLoss: {
      double exs = rel.ex_star;
      r.a = ClauseResult{(1.0 - eps) * exs * len < s.x_star, s.x_star,
                         (1.0 - eps) * exs * len};
      r.a.pass = r.a.rhs < r.a.lhs;
      r.b = ClauseResult{(1.0 - eps) * exs * (1.0 - exs) * len < s.y_star, s.y_star,
                         (1.0 - eps) * exs * (1.0 - exs) * len};
      r.b.pass = r.b.rhs < r.b.lhs;
      r.c = z_upper((1.0 + eps) * (t_frac / e_n_star) * (exs / (1.0 - exs)) * len);
      r.d = z_upper((1.0 + delta_adv / rel.sigma_star) * (t_frac / e_n_star) * s.x_star);
      double phi = phi_bound(params.s);
      double rhs_e = s.y_star * (1.0 - eps) * (1.0 - phi);
      r.e = params.t == 0 ? ClauseResult{s.z == 0.0, s.z, rhs_e} : lt(s.z, rhs_e);
      break;
    }
  }
  return r;
}

inline std::uint64_t z_count(std::span<const RoundIndicators> ind) {
  std::uint64_t z = 0;
  for (const auto& r : ind) z += r.z;
  return z;
}

// --- phi estimate -----------------------------------------------------------

struct PhiEstimate {
  std::uint64_t races = 0;
  std::uint64_t off_wins = 0;
  bool defined() const { return races > 0; }
  double value() const { return races ? static_cast<double>(off_wins) / races : 0.0; }
};

/// Empirical frequency of the replacement race: the honest parties whose head
/// is off the longest-chain set at the race start solve two PoWs strictly
/// before the on-set parties solve one. Group membership is fixed when the
/// race starts; a new race starts at the first eligible round after the
/// previous one resolves.
inline void accumulate_phi(const ExecutionView& view, PhiEstimate& acc) {
  const int n = view.params.n, t = view.params.t;
  HeadReplay replay(view);
  std::uint32_t public_max = 0;
  std::vector<std::uint8_t> off_group(static_cast<std::size_t>(n), 0);
  std::vector<std::uint8_t> on_group(static_cast<std::size_t>(n), 0);
  bool racing = false;
  int off_hits = 0;

  for (std::uint32_t r = 1; r <= view.rounds; ++r) {
    auto rec = round_record(view, r);
    if (!racing) {
      auto heads = replay.heads();
      bool any_off = false;
      for (int j = t; j < n; ++j) {
        std::uint32_t h = view.store.height(heads[(std::size_t)j]);
        off_group[(std::size_t)j] = h < public_max;
        on_group[(std::size_t)j] = h == public_max;
        any_off |= off_group[(std::size_t)j] != 0;
      }
      if (any_off) {
        racing = true;
        off_hits = 0;
      }
    }
    if (racing) {
      int off_now = 0;
      bool on_now = false;
      for (const auto& m : rec.honest_mined) {
        if (off_group[m.party]) ++off_now;
        if (on_group[m.party]) on_now = true;
      }
      if (off_hits + off_now >= 2 && !on_now) {
        ++acc.races;
        ++acc.off_wins;
        racing = false;
      } else if (on_now) {
        ++acc.races;
        racing = false;
      } else {
        off_hits += off_now;
      }
    }
    replay.advance();
    for (BlockId h : replay.heads())
      public_max = std::max(public_max, view.store.height(h));
    for (BlockId h : rec.delivered)
      public_max = std::max(public_max, view.store.height(h));
  }
}

inline PhiEstimate phi_estimate(std::span<const ExecutionView> views) {
  PhiEstimate acc;
  for (const auto& v : views) accumulate_phi(v, acc);
  return acc;
}

}  // namespace backbone
