#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "backbone/types.hpp"

namespace backbone {

/// Canonical query input: one mining attempt of `creator` in `round`,
/// extending `parent`. The nonce enumerates attempts so every query is fresh.
struct QueryInput {
  BlockId parent = kGenesisId;
  PartyIx creator = kNobody;
  std::uint32_t round = 0;
  std::uint32_t nonce = 0;

  bool operator==(const QueryInput&) const = default;
};

struct QueryInputHash {
  std::size_t operator()(const QueryInput& in) const {
    std::uint64_t h = in.parent;
    h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(in.creator)) << 32) |
         in.round;
    h ^= static_cast<std::uint64_t>(in.nonce) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

struct QueryResult {
  std::uint64_t sample = 0;
  bool success = false;
};

/// The random-oracle functionality: q calculation queries per party per
/// round, a t*q pool for the adversary, unlimited verification queries.
/// Samples come from the seeded generator; the pair table backs verification.
class OracleState {
 public:
  /// `record_failures = false` keeps only successful pairs in the table.
  /// Fresh inputs are never re-queried by the protocol, so the observable
  /// sample sequence is unchanged; verification of blocks always works.
  OracleState(const ModelParams& params, std::uint64_t seed, bool record_failures = true)
      : q_(params.q),
        pool_cap_(static_cast<std::int64_t>(params.t) * params.q),
        threshold_(params.threshold()),
        mask_(params.sample_mask()),
        shift_(64 - params.kappa),
        record_failures_(record_failures),
        budgets_(static_cast<std::size_t>(params.n), params.q),
        pool_(pool_cap_),
        rng_(seed) {}

  QueryResult calc_query(PartyIx caller, const QueryInput& input) {
    take_budget(caller);
    std::uint64_t sample;
    auto it = table_.find(input);
    if (it != table_.end()) {
      sample = it->second;
    } else {
      sample = (rng_() >> shift_) & mask_;
      bool ok = threshold_.full || sample < threshold_.value;
      if (ok || record_failures_) table_.emplace(input, sample);
    }
    bool success = threshold_.full || sample < threshold_.value;
    return {sample, success};
  }

  /// True iff (input -> sample) is a recorded pair.
  bool verify_query(const QueryInput& input, std::uint64_t sample) const {
    auto it = table_.find(input);
    return it != table_.end() && it->second == sample;
  }

  /// Restores every party's budget to q and the adversary pool to t*q.
  /// The table is untouched.
  void reset_round() {
    std::fill(budgets_.begin(), budgets_.end(), q_);
    pool_ = pool_cap_;
  }

  int budget(PartyIx party) const {
    return party == kAdversary ? static_cast<int>(pool_) : budgets_.at(static_cast<std::size_t>(party));
  }
  std::size_t table_size() const { return table_.size(); }

 private:
  void take_budget(PartyIx caller) {
    if (caller == kAdversary) {
      if (pool_ <= 0) throw budget_error("adversary query pool exhausted");
      --pool_;
      return;
    }
    int& b = budgets_.at(static_cast<std::size_t>(caller));
    if (b <= 0) throw budget_error("party query budget exhausted");
    --b;
  }

  int q_;
  std::int64_t pool_cap_;
  Threshold threshold_;
  std::uint64_t mask_;
  int shift_;
  bool record_failures_;
  std::vector<int> budgets_;
  std::int64_t pool_;
  std::mt19937_64 rng_;
  std::unordered_map<QueryInput, std::uint64_t, QueryInputHash> table_;
};

}  // namespace backbone
