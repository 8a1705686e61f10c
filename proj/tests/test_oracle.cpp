#include <catch_amalgamated.hpp>

#include "backbone/oracle.hpp"

using namespace backbone;

namespace {

ModelParams small_params(int kappa, double p) {
  ModelParams mp;
  mp.n = 4;
  mp.t = 1;
  mp.s = 0.0;
  mp.q = 2;
  mp.p = p;
  mp.kappa = kappa;
  mp.eta_kappa = kEtaKappaInfinite;
  return mp;
}

}  // namespace

TEST_CASE("budgets: q per party, t*q pool, reset restores") {
  auto mp = small_params(32, 0.5);
  OracleState o(mp, 7);
  o.calc_query(0, {kGenesisId, 0, 1, 0});
  o.calc_query(0, {kGenesisId, 0, 1, 1});
  REQUIRE(o.budget(0) == 0);
  REQUIRE_THROWS_AS(o.calc_query(0, {kGenesisId, 0, 1, 2}), budget_error);
  // adversary pool = t*q = 2
  o.calc_query(kAdversary, {kGenesisId, kAdversary, 1, 0});
  o.calc_query(kAdversary, {kGenesisId, kAdversary, 1, 1});
  REQUIRE_THROWS_AS(o.calc_query(kAdversary, {kGenesisId, kAdversary, 1, 2}), budget_error);
  o.reset_round();
  REQUIRE(o.budget(0) == 2);
  REQUIRE(o.budget(kAdversary) == 2);
}

TEST_CASE("repeat query returns the recorded pair; verification is free") {
  auto mp = small_params(32, 0.5);
  OracleState o(mp, 7);
  QueryInput in{kGenesisId, 0, 1, 0};
  auto r1 = o.calc_query(0, in);
  o.reset_round();
  auto r2 = o.calc_query(0, in);
  REQUIRE(r1.sample == r2.sample);
  REQUIRE(o.verify_query(in, r1.sample));
  REQUIRE_FALSE(o.verify_query(in, r1.sample + 1));
  REQUIRE_FALSE(o.verify_query({kGenesisId, 1, 1, 0}, r1.sample));
}

TEST_CASE("same seed gives the same sample stream") {
  auto mp = small_params(32, 0.5);
  OracleState a(mp, 99), b(mp, 99), c(mp, 100);
  QueryInput in{kGenesisId, 0, 1, 0};
  REQUIRE(a.calc_query(0, in).sample == b.calc_query(0, in).sample);
  // different seed: overwhelmingly different 32-bit sample
  REQUIRE(a.calc_query(1, in).sample != c.calc_query(1, in).sample);
}

TEST_CASE("success rate matches p (kappa=16, p=0.25 Monte Carlo)") {
  ModelParams mp = small_params(16, 0.25);
  mp.q = 1000000;
  OracleState o(mp, 2024, false);
  int successes = 0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i)
    successes += o.calc_query(0, {kGenesisId, 0, 1, static_cast<std::uint32_t>(i)}).success;
  double rate = static_cast<double>(successes) / trials;
  // T = round(0.25 * 2^16) exactly; 3 sigma of a Bernoulli(0.25) mean
  double sigma3 = 3.0 * std::sqrt(0.25 * 0.75 / trials);
  REQUIRE(rate > 0.25 - sigma3);
  REQUIRE(rate < 0.25 + sigma3);
}

TEST_CASE("samples stay within the kappa-bit mask") {
  ModelParams mp = small_params(16, 0.9);
  mp.q = 1000;
  OracleState o(mp, 5);
  for (int i = 0; i < 1000; ++i) {
    auto r = o.calc_query(0, {kGenesisId, 0, 1, static_cast<std::uint32_t>(i)});
    REQUIRE(r.sample <= 0xFFFFu);
  }
}

TEST_CASE("record_failures=false keeps only successful pairs, same stream") {
  ModelParams mp = small_params(20, 0.1);
  mp.q = 10000;
  OracleState all(mp, 31415, true), wins(mp, 31415, false);
  std::size_t successes = 0;
  for (int i = 0; i < 5000; ++i) {
    QueryInput in{kGenesisId, 0, 1, static_cast<std::uint32_t>(i)};
    auto ra = all.calc_query(0, in);
    auto rw = wins.calc_query(0, in);
    REQUIRE(ra.sample == rw.sample);
    REQUIRE(ra.success == rw.success);
    successes += ra.success;
    if (ra.success) REQUIRE(wins.verify_query(in, rw.sample));
  }
  REQUIRE(all.table_size() == 5000);
  REQUIRE(wins.table_size() == successes);
}

TEST_CASE("kappa=64 threshold at p = 1 uses the full flag") {
  ModelParams mp = small_params(64, 1.0);
  REQUIRE(mp.threshold().full);
  // just below 1: a plain (huge) threshold, no overflow
  auto thr = small_params(64, 0.75).threshold();
  REQUIRE_FALSE(thr.full);
  REQUIRE(thr.value > (std::uint64_t{1} << 63));
  OracleState o(mp, 1);
  REQUIRE(o.calc_query(0, {kGenesisId, 0, 1, 0}).success);
}
