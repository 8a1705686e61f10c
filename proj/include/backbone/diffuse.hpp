#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "backbone/types.hpp"

namespace backbone {

struct DiffusedMessage {
  std::uint32_t sent_round = 0;
  PartyIx sender = kNobody;
  BlockId head = kGenesisId;
};

/// One end-of-round delivery: the payload plus who receives it.
/// With B=1 every party receives; with B=0 only parties alert at the
/// delivery round do, and everyone else misses the message for good.
struct Delivery {
  PartyIx sender = kNobody;
  BlockId head = kGenesisId;
  std::uint32_t sent_round = 0;
};

/// The diffuse functionality: per-party RECEIVE strings, delta-round delay,
/// adversarial read access, completion marking.
class DiffuseState {
 public:
  DiffuseState(int n, int delta, bool b_flag)
      : n_(n), delta_(delta), b_flag_(b_flag), round_(1),
        receive_(static_cast<std::size_t>(n)),
        complete_(static_cast<std::size_t>(n), false) {}

  std::uint32_t round() const { return round_; }

  /// A party sends at most one (possibly empty) message per round and is then
  /// marked complete. The adversary may send repeatedly; it cannot modify,
  /// drop, or delay anything already sent.
  void send(PartyIx sender, std::optional<BlockId> payload) {
    if (sender != kAdversary) {
      auto done = complete_.at(static_cast<std::size_t>(sender));
      if (done) throw protocol_error("party already sent this round");
      complete_[static_cast<std::size_t>(sender)] = true;
    }
    if (payload)
      pending_.push_back({round_, sender, *payload});
  }

  /// All messages sent so far in the current round, in sending order.
  std::vector<std::pair<PartyIx, BlockId>> adversary_peek() const {
    std::vector<std::pair<PartyIx, BlockId>> out;
    for (auto it = pending_.rbegin(); it != pending_.rend() && it->sent_round == round_; ++it)
      out.emplace_back(it->sender, it->head);
    std::reverse(out.begin(), out.end());
    return out;
  }

  void mark_adversary_complete() { adversary_complete_ = true; }

  bool is_complete(PartyIx party) const {
    return complete_.at(static_cast<std::size_t>(party));
  }

  /// Writes all messages that are delta rounds old to the RECEIVE strings of
  /// the eligible parties and advances the round. `statuses` is the per-party
  /// status at the current round; sleepy parties are auto-completed.
  std::vector<Delivery> end_round(const std::vector<PartyStatus>& statuses) {
    if (!adversary_complete_) throw protocol_error("adversary not complete");
    for (int i = 0; i < n_; ++i) {
      if (statuses[static_cast<std::size_t>(i)] == PartyStatus::Alert &&
          !complete_[static_cast<std::size_t>(i)])
        throw protocol_error("alert party not complete");
    }
    std::vector<Delivery> due;
    while (!pending_.empty() &&
           round_ - pending_.front().sent_round >= static_cast<std::uint32_t>(delta_)) {
      const auto& m = pending_.front();
      due.push_back({m.sender, m.head, m.sent_round});
      for (int i = 0; i < n_; ++i) {
        auto st = statuses[static_cast<std::size_t>(i)];
        if (st == PartyStatus::Corrupted) continue;
        if (!b_flag_ && st == PartyStatus::Sleepy) continue;  // permanent loss
        receive_[static_cast<std::size_t>(i)].push_back(m.head);
      }
      pending_.pop_front();
    }
    ++round_;
    std::fill(complete_.begin(), complete_.end(), false);
    adversary_complete_ = false;
    return due;
  }

  /// The full RECEIVE string of a party (everything ever written to it).
  const std::vector<BlockId>& receive(PartyIx party) const {
    return receive_.at(static_cast<std::size_t>(party));
  }

 private:
  int n_;
  int delta_;
  bool b_flag_;
  std::uint32_t round_;
  std::deque<DiffusedMessage> pending_;
  std::vector<std::vector<BlockId>> receive_;
  std::vector<bool> complete_;
  bool adversary_complete_ = false;
};

}  // namespace backbone
