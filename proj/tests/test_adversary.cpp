#include <catch_amalgamated.hpp>

#include <cmath>

#include "backbone/execution.hpp"

using namespace backbone;

namespace {

ExecutionConfig base_config(int n, int t, double p, std::uint32_t rounds,
                            Strategy strat, std::uint64_t seed) {
  ExecutionConfig cfg;
  cfg.params.n = n;
  cfg.params.t = t;
  cfg.params.s = 0.0;
  cfg.params.q = 1;
  cfg.params.p = p;
  cfg.params.eta_kappa = kEtaKappaInfinite;
  cfg.rounds = rounds;
  cfg.adversary.strategy = strat;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("withhold, p=1, n=3, t=2: the private chain overtakes immediately") {
  auto cfg = base_config(3, 2, 1.0, 1, Strategy::Withhold, 1);
  auto v = run_execution(cfg);
  // Round 1: adversary spends its pool of t*q = 2 queries chaining privately,
  // the lone honest party mines one block, so the release wins at length 2.
  REQUIRE(v.adversary_mined.rows(1).size() == 2);
  REQUIRE(v.honest_mined.rows(1).size() == 1);
  HeadReplay replay(v);
  replay.advance();
  BlockId head = replay.heads()[2];
  REQUIRE(v.store.height(head) == 2);
  REQUIRE(v.store.block(head).creator == kAdversary);
}

TEST_CASE("withhold releases only on honest success") {
  // No honest party can ever succeed (all honest sleep); the adversary mines
  // privately but never diffuses.
  auto cfg = base_config(3, 1, 1.0, 20, Strategy::Withhold, 2);
  cfg.params.s = 1.0;
  auto v = run_execution(cfg);
  REQUIRE(v.adversary_mined.items.size() == 20);  // pool of 1 per round
  for (std::uint32_t r = 1; r <= v.rounds; ++r) REQUIRE(v.diffused.rows(r).empty());
  HeadReplay replay(v);
  for (std::uint32_t r = 1; r <= v.rounds; ++r) replay.advance();
  REQUIRE(v.store.height(replay.heads()[1]) == 0);  // honest never heard a thing
}

TEST_CASE("honest mirror diffuses immediately and matches E[Z] = qpt") {
  const std::uint32_t rounds = 20000;
  auto cfg = base_config(12, 4, 0.01, rounds, Strategy::HonestMirror, 3);
  auto v = run_execution(cfg);
  // Every adversarial success is diffused in its mining round.
  for (std::uint32_t r = 1; r <= v.rounds; ++r) {
    std::size_t adv_sends = 0;
    for (const auto& d : v.diffused.rows(r)) adv_sends += d.sender == kAdversary;
    REQUIRE(adv_sends == v.adversary_mined.rows(r).size());
  }
  double zhat = static_cast<double>(v.adversary_mined.items.size()) / rounds;
  double ez = cfg.params.q * cfg.params.p * cfg.params.t;  // 0.04
  double sd = std::sqrt(ez / rounds);  // Poisson-binomial scale
  REQUIRE(zhat > ez - 4 * sd);
  REQUIRE(zhat < ez + 4 * sd);
}

TEST_CASE("mirror lanes stop at the lane's first success") {
  // p=1: each of the t lanes succeeds on its first query, so exactly t
  // adversarial blocks per round even though the pool allows more retries.
  auto cfg = base_config(4, 2, 1.0, 5, Strategy::HonestMirror, 4);
  auto v = run_execution(cfg);
  for (std::uint32_t r = 1; r <= v.rounds; ++r)
    REQUIRE(v.adversary_mined.rows(r).size() == 2);
}

TEST_CASE("prefix-fork digs below the public tip and causes deep reorgs") {
  auto cfg = base_config(12, 8, 0.08, 4000, Strategy::PrefixFork, 5);
  cfg.adversary.fork_depth = 3;
  auto v = run_execution(cfg);
  // Find the deepest adoption reorg (old head abandoned beyond the ancestor).
  std::uint32_t deepest = 0;
  HeadReplay replay(v);
  for (std::uint32_t r = 1; r <= v.rounds; ++r) {
    auto before = replay.heads();
    for (const auto& a : v.adoptions.rows(r)) {
      BlockId old_head = before[a.party];
      std::uint32_t ca = v.store.common_ancestor_height(old_head, a.head);
      deepest = std::max(deepest, v.store.height(old_head) - ca);
    }
    replay.advance();
  }
  REQUIRE(deepest >= 3);
  // And adversarial blocks actually enter honest chains.
  HeadReplay final_replay(v);
  for (std::uint32_t r = 1; r <= v.rounds; ++r) final_replay.advance();
  bool adv_in_chain = false;
  for (const Block* b = &v.store.block(final_replay.heads()[10]); b->id != kGenesisId;
       b = &v.store.block(b->parent_id))
    adv_in_chain = adv_in_chain || b->creator == kAdversary;
  REQUIRE(adv_in_chain);
}

TEST_CASE("adversary never exceeds its query pool") {
  // p=0: every query fails, so the pool is fully spent each round without
  // throwing; more rounds than pool size would surface any double spend.
  auto cfg = base_config(4, 2, 0.0, 50, Strategy::Withhold, 6);
  REQUIRE_NOTHROW(run_execution(cfg));
}
