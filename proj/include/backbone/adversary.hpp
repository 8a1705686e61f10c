#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "backbone/chain.hpp"
#include "backbone/diffuse.hpp"
#include "backbone/oracle.hpp"
#include "backbone/types.hpp"
#include "backbone/view.hpp"

namespace backbone {

enum class Strategy { None, HonestMirror, Withhold, PrefixFork };

inline Strategy strategy_from_name(const std::string& name) {
  if (name == "none") return Strategy::None;
  if (name == "honest-mirror") return Strategy::HonestMirror;
  if (name == "withhold") return Strategy::Withhold;
  if (name == "prefix-fork") return Strategy::PrefixFork;
  throw config_error("unknown adversary strategy: " + name);
}

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::None: return "none";
    case Strategy::HonestMirror: return "honest-mirror";
    case Strategy::Withhold: return "withhold";
    case Strategy::PrefixFork: return "prefix-fork";
  }
  return "none";
}

struct AdversaryConfig {
  Strategy strategy = Strategy::None;
  int fork_depth = 6;   // prefix-fork: how deep below the public tip to fork
  int giveup = -1;      // prefix-fork: re-fork when this far behind (-1: 2*fork_depth)
};

/// The adversary: spends its t*q query pool at its first activation slot of
/// the round and decides releases after peeking everything sent this round.
/// It can only withhold and release its own valid blocks; it cannot forge.
class Adversary {
 public:
  Adversary(const ModelParams& params, const AdversaryConfig& cfg)
      : params_(params), cfg_(cfg) {
    if (cfg_.giveup < 0) cfg_.giveup = 2 * cfg_.fork_depth;
  }

  /// Mining phase, invoked once per round at the first corrupted slot.
  void mine(std::uint32_t round, OracleState& oracle, ChainStore& store,
            ExecutionView& view, DiffuseState& diffuse) {
    if (params_.t == 0 || cfg_.strategy == Strategy::None) return;
    switch (cfg_.strategy) {
      case Strategy::HonestMirror: {
        // t independent lanes of q queries, each mining on the public tip
        // and diffusing immediately, like t extra always-alert honest parties.
        for (int lane = 0; lane < params_.t; ++lane) {
          for (int j = 0; j < params_.q; ++j) {
            auto nonce = static_cast<std::uint32_t>(lane * params_.q + j);
            auto res = oracle.calc_query(kAdversary, {public_best_, kAdversary, round, nonce});
            if (!res.success) continue;
            view.adversary_mined.push({0, res.sample, public_best_, nonce});
            if (store.insert(res.sample, public_best_, kAdversary, round, nonce) ==
                ChainStore::Insert::Added) {
              diffuse.send(kAdversary, res.sample);
              view.diffused.push({kAdversary, res.sample});
            }
            break;
          }
        }
        break;
      }
      case Strategy::Withhold: {
        if (store.height(public_best_) > store.height(private_tip_))
          private_tip_ = public_best_;  // private branch lost the race
        chain_mine(round, oracle, store, view);
        break;
      }
      case Strategy::PrefixFork: {
        std::uint32_t pub = store.height(public_best_);
        std::uint32_t priv = store.height(private_tip_);
        if (!fork_active_ ||
            (pub > priv && pub - priv > static_cast<std::uint32_t>(cfg_.giveup))) {
          private_tip_ = ancestor(store, public_best_, cfg_.fork_depth);
          fork_active_ = true;
        }
        chain_mine(round, oracle, store, view);
        break;
      }
      default:
        break;
    }
  }

  /// Release phase, after every party has acted this round. The adversary
  /// reads all messages of the round and may still send before delivery.
  void release(std::uint32_t /*round*/, const std::vector<std::pair<PartyIx, BlockId>>& peek,
               ChainStore& store, ExecutionView& view, DiffuseState& diffuse) {
    bool honest_success = false;
    for (const auto& [sender, head] : peek) {
      if (sender == kAdversary) continue;
      honest_success = true;
      if (store.height(head) > store.height(public_best_)) public_best_ = head;
    }
    if (params_.t == 0) return;
    std::uint32_t pub = store.height(public_best_);
    std::uint32_t priv = store.height(private_tip_);
    bool want_release = false;
    if (cfg_.strategy == Strategy::Withhold)
      want_release = honest_success && priv > pub;
    else if (cfg_.strategy == Strategy::PrefixFork)
      want_release = priv > pub;
    if (want_release) {
      diffuse.send(kAdversary, private_tip_);
      view.diffused.push({kAdversary, private_tip_});
      public_best_ = private_tip_;
      fork_active_ = false;
    }
  }

  /// Delivered heads become public knowledge (the adversary already saw them
  /// at sending time; this also covers its own mirror blocks).
  void observe_delivery(BlockId head, const ChainStore& store) {
    if (store.height(head) > store.height(public_best_)) public_best_ = head;
  }

  BlockId public_best() const { return public_best_; }
  BlockId private_tip() const { return private_tip_; }

 private:
  void chain_mine(std::uint32_t round, OracleState& oracle, ChainStore& store,
                  ExecutionView& view) {
    auto pool = static_cast<std::uint32_t>(params_.t) * static_cast<std::uint32_t>(params_.q);
    for (std::uint32_t nonce = 0; nonce < pool; ++nonce) {
      auto res = oracle.calc_query(kAdversary, {private_tip_, kAdversary, round, nonce});
      if (!res.success) continue;
      view.adversary_mined.push({0, res.sample, private_tip_, nonce});
      if (store.insert(res.sample, private_tip_, kAdversary, round, nonce) ==
          ChainStore::Insert::Added)
        private_tip_ = res.sample;
    }
  }

  static BlockId ancestor(const ChainStore& store, BlockId head, int depth) {
    BlockId cur = head;
    for (int i = 0; i < depth && cur != kGenesisId; ++i) cur = store.block(cur).parent_id;
    return cur;
  }

  ModelParams params_;
  AdversaryConfig cfg_;
  BlockId public_best_ = kGenesisId;
  BlockId private_tip_ = kGenesisId;
  bool fork_active_ = false;
};

}  // namespace backbone
