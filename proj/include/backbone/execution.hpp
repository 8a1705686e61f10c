#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "backbone/adversary.hpp"
#include "backbone/chain.hpp"
#include "backbone/diffuse.hpp"
#include "backbone/oracle.hpp"
#include "backbone/types.hpp"
#include "backbone/view.hpp"

namespace backbone {

struct ExecutionConfig {
  ModelParams params;
  std::uint32_t rounds = 1;
  AdversaryConfig adversary;
  std::uint64_t seed = 0;

  void validate() const {
    params.validate();
    if (rounds < 1) throw config_error("rounds must be >= 1");
  }
};

/// Static corruption: parties P_1..P_t are corrupted for the whole execution;
/// corrupted parties never sleep.
inline std::vector<PartyStatus> register_corruptions(const ModelParams& params) {
  if (params.t >= params.n) throw config_error("require t < n");
  std::vector<PartyStatus> statuses(static_cast<std::size_t>(params.n), PartyStatus::Alert);
  for (int i = 0; i < params.t; ++i) statuses[static_cast<std::size_t>(i)] = PartyStatus::Corrupted;
  return statuses;
}

/// Marks each honest party sleepy independently with probability s. The
/// adversary gets no feedback about the outcome.
template <typename Rng>
inline void sample_sleep(std::vector<PartyStatus>& statuses, double s, Rng& rng) {
  if (s <= 0.0) {
    for (auto& st : statuses)
      if (st == PartyStatus::Sleepy) st = PartyStatus::Alert;
    return;
  }
  // threshold comparison on raw 64-bit draws; s = 1 always sleeps
  const bool always = s >= 1.0;
  const auto thr = always ? 0 : static_cast<std::uint64_t>(
      s * 18446744073709551616.0 /* 2^64 */);
  for (auto& st : statuses) {
    if (st == PartyStatus::Corrupted) continue;
    st = (always || rng() < thr) ? PartyStatus::Sleepy : PartyStatus::Alert;
  }
}

namespace detail {
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + salt + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Runs the round-robin execution of the backbone protocol in M(q, delta, B)
/// and records everything into an ExecutionView. Deterministic in
/// (config.params, config.seed): replaying yields an identical view.
inline ExecutionView run_execution(const ExecutionConfig& config) {
  config.validate();
  const ModelParams& mp = config.params;

  ExecutionView view;
  view.params = mp;
  view.seed = config.seed;

  // Large runs skip recording failed oracle queries; the sample sequence and
  // hence the execution is unchanged, only table-backed failure lookups go.
  const bool record_failures = config.rounds <= 20000;
  OracleState oracle(mp, detail::mix_seed(config.seed, 0xa11ce), record_failures);
  DiffuseState diffuse(mp.n, mp.delta_net, mp.b_flag);
  Adversary adversary(mp, config.adversary);
  std::mt19937_64 control_rng(detail::mix_seed(config.seed, 0xc0417801));

  std::vector<PartyStatus> statuses = register_corruptions(mp);
  std::vector<BlockId> heads(static_cast<std::size_t>(mp.n), kGenesisId);
  ChainStore& store = view.store;

  for (std::uint32_t round = 1; round <= config.rounds; ++round) {
    oracle.reset_round();
    sample_sleep(statuses, mp.s, control_rng);
    for (int i = mp.t; i < mp.n; ++i)
      if (statuses[static_cast<std::size_t>(i)] == PartyStatus::Sleepy)
        view.sleepy.push(static_cast<std::uint16_t>(i));

    bool adversary_mined_this_round = false;
    for (int i = 0; i < mp.n; ++i) {
      PartyStatus st = statuses[static_cast<std::size_t>(i)];
      if (st == PartyStatus::Corrupted) {
        if (!adversary_mined_this_round) {
          adversary.mine(round, oracle, store, view, diffuse);
          adversary_mined_this_round = true;
        }
        continue;
      }
      if (st == PartyStatus::Sleepy) continue;

      // Honest step: the head is already current (adoption happens at
      // delivery); spend up to q queries on it, diffuse the first success.
      BlockId& head = heads[static_cast<std::size_t>(i)];
      bool sent = false;
      for (int nonce = 0; nonce < mp.q; ++nonce) {
        auto res = oracle.calc_query(i, {head, i, round, static_cast<std::uint32_t>(nonce)});
        if (!res.success) continue;
        view.honest_mined.push({static_cast<std::uint16_t>(i), res.sample, head,
                                static_cast<std::uint32_t>(nonce)});
        if (store.insert(res.sample, head, i, round, static_cast<std::uint32_t>(nonce)) ==
            ChainStore::Insert::Added) {
          head = res.sample;
          diffuse.send(i, head);
          view.diffused.push({i, head});
          sent = true;
        }
        break;
      }
      if (!sent) diffuse.send(i, std::nullopt);
    }

    adversary.release(round, diffuse.adversary_peek(), store, view, diffuse);
    diffuse.mark_adversary_complete();

    for (const Delivery& d : diffuse.end_round(statuses)) {
      view.delivered.push(d.head);
      adversary.observe_delivery(d.head, store);
      std::uint32_t h = store.height(d.head);
      for (int j = mp.t; j < mp.n; ++j) {
        if (!mp.b_flag && statuses[static_cast<std::size_t>(j)] == PartyStatus::Sleepy)
          continue;
        BlockId& head = heads[static_cast<std::size_t>(j)];
        if (h > store.height(head)) {
          head = d.head;
          view.adoptions.push({static_cast<std::uint16_t>(j), d.head});
        }
      }
    }
    view.seal_round();
  }
  return view;
}

}  // namespace backbone
