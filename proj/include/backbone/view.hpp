#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "backbone/chain.hpp"
#include "backbone/types.hpp"

namespace backbone {

/// Per-round column storage: items for round r live in [off[r-1], off[r]).
template <typename T>
struct RoundColumn {
  std::vector<T> items;
  std::vector<std::uint32_t> off{0};

  void push(const T& v) { items.push_back(v); }
  void seal_round() { off.push_back(static_cast<std::uint32_t>(items.size())); }
  std::span<const T> rows(std::uint32_t round) const {
    return {items.data() + off[round - 1], items.data() + off[round]};
  }
};

struct MinedEntry {
  std::uint16_t party = 0;  // unused for adversarial entries
  BlockId id = 0;
  BlockId parent = 0;
  std::uint32_t nonce = 0;
};

struct AdoptionEntry {
  std::uint16_t party = 0;
  BlockId head = 0;
};

struct DiffusedEntry {
  PartyIx sender = kNobody;
  BlockId head = 0;
};

/// Recorded execution: the analogue of VIEW over all parties. Per-round data
/// is stored columnar; RoundRecordView exposes one round of it.
struct ExecutionView {
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint32_t rounds = 0;
  ChainStore store;

  RoundColumn<std::uint16_t> sleepy;        // honest parties asleep this round
  RoundColumn<MinedEntry> honest_mined;     // honest PoW successes
  RoundColumn<MinedEntry> adversary_mined;  // adversarial PoW successes
  RoundColumn<AdoptionEntry> adoptions;     // head changes applied at delivery
  RoundColumn<DiffusedEntry> diffused;      // non-empty sends, in order
  RoundColumn<BlockId> delivered;           // heads written to RECEIVE strings

  void seal_round() {
    sleepy.seal_round();
    honest_mined.seal_round();
    adversary_mined.seal_round();
    adoptions.seal_round();
    diffused.seal_round();
    delivered.seal_round();
    ++rounds;
  }

  PartyStatus status(std::uint32_t round, PartyIx party) const {
    if (party < params.t) return PartyStatus::Corrupted;
    for (std::uint16_t ix : sleepy.rows(round))
      if (ix == party) return PartyStatus::Sleepy;
    return PartyStatus::Alert;
  }
};

struct RoundRecordView {
  std::uint32_t round;
  std::span<const std::uint16_t> sleepy;
  std::span<const MinedEntry> honest_mined;
  std::span<const MinedEntry> adversary_mined;
  std::span<const AdoptionEntry> adoptions;
  std::span<const DiffusedEntry> diffused;
  std::span<const BlockId> delivered;
};

inline RoundRecordView round_record(const ExecutionView& v, std::uint32_t round) {
  return {round,
          v.sleepy.rows(round),
          v.honest_mined.rows(round),
          v.adversary_mined.rows(round),
          v.adoptions.rows(round),
          v.diffused.rows(round),
          v.delivered.rows(round)};
}

/// Replays recorded head changes round by round. heads() after advance(r)
/// gives every party's local chain head at the END of round r.
class HeadReplay {
 public:
  explicit HeadReplay(const ExecutionView& view)
      : view_(view), heads_(static_cast<std::size_t>(view.params.n), kGenesisId) {}

  /// Applies one round: mining head updates first, delivery adoptions last.
  void advance() {
    ++round_;
    for (const auto& m : view_.honest_mined.rows(round_)) {
      // An id collision leaves the miner's head untouched.
      if (view_.store.block(m.id).parent_id == m.parent &&
          view_.store.block(m.id).creator == static_cast<PartyIx>(m.party))
        heads_[m.party] = m.id;
    }
    for (const auto& a : view_.adoptions.rows(round_)) heads_[a.party] = a.head;
  }

  std::uint32_t round() const { return round_; }
  std::span<const BlockId> heads() const { return heads_; }

 private:
  const ExecutionView& view_;
  std::uint32_t round_ = 0;
  std::vector<BlockId> heads_;
};

// --- line-delimited trace serialization ------------------------------------

namespace detail {

inline void put_hex(std::string& out, std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  out += buf;
}

inline void put_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace detail

inline void write_trace(const ExecutionView& v, std::ostream& os,
                        const std::string& header_extra = {}) {
  std::string line = "# backbone-trace v1";
  if (!header_extra.empty()) line += " " + header_extra;
  os << line << '\n';
  line.clear();
  line += "params n=" + std::to_string(v.params.n);
  line += " t=" + std::to_string(v.params.t);
  line += " s=";
  detail::put_double(line, v.params.s);
  line += " q=" + std::to_string(v.params.q);
  line += " delta=" + std::to_string(v.params.delta_net);
  line += " b=" + std::to_string(v.params.b_flag ? 1 : 0);
  line += " p=";
  detail::put_double(line, v.params.p);
  line += " kappa=" + std::to_string(v.params.kappa);
  line += " eta_kappa=" + std::to_string(v.params.eta_kappa);
  line += " epsilon=";
  detail::put_double(line, v.params.epsilon);
  line += " c=";
  detail::put_double(line, v.params.c);
  os << line << '\n';
  os << "seed " << v.seed << '\n';
  os << "rounds " << v.rounds << '\n';

  for (std::uint32_t r = 1; r <= v.rounds; ++r) {
    auto rec = round_record(v, r);
    line.clear();
    line += "r ";
    line += std::to_string(r);
    auto sep = [&line](std::size_t i) { if (i) line += ','; };
    line += " sl ";
    for (std::size_t i = 0; i < rec.sleepy.size(); ++i) {
      sep(i);
      line += std::to_string(rec.sleepy[i]);
    }
    line += " am ";
    for (std::size_t i = 0; i < rec.adversary_mined.size(); ++i) {
      sep(i);
      detail::put_hex(line, rec.adversary_mined[i].id);
      line += ':';
      detail::put_hex(line, rec.adversary_mined[i].parent);
      line += ':';
      line += std::to_string(rec.adversary_mined[i].nonce);
    }
    line += " hm ";
    for (std::size_t i = 0; i < rec.honest_mined.size(); ++i) {
      sep(i);
      line += std::to_string(rec.honest_mined[i].party);
      line += ':';
      detail::put_hex(line, rec.honest_mined[i].id);
      line += ':';
      detail::put_hex(line, rec.honest_mined[i].parent);
      line += ':';
      line += std::to_string(rec.honest_mined[i].nonce);
    }
    line += " df ";
    for (std::size_t i = 0; i < rec.diffused.size(); ++i) {
      sep(i);
      line += std::to_string(rec.diffused[i].sender);
      line += ':';
      detail::put_hex(line, rec.diffused[i].head);
    }
    line += " dl ";
    for (std::size_t i = 0; i < rec.delivered.size(); ++i) {
      sep(i);
      detail::put_hex(line, rec.delivered[i]);
    }
    line += " ad ";
    for (std::size_t i = 0; i < rec.adoptions.size(); ++i) {
      sep(i);
      line += std::to_string(rec.adoptions[i].party);
      line += ':';
      detail::put_hex(line, rec.adoptions[i].head);
    }
    os << line << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(delim, start);
    if (end == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

inline std::uint64_t parse_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

}  // namespace detail

inline ExecutionView read_trace(std::istream& is) {
  ExecutionView v;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# backbone-trace v1", 0) != 0)
    throw config_error("not a backbone trace");
  if (!std::getline(is, line) || line.rfind("params ", 0) != 0)
    throw config_error("trace missing params line");
  for (const auto& kv : detail::split(line.substr(7), ' ')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "n") v.params.n = std::stoi(val);
    else if (key == "t") v.params.t = std::stoi(val);
    else if (key == "s") v.params.s = std::stod(val);
    else if (key == "q") v.params.q = std::stoi(val);
    else if (key == "delta") v.params.delta_net = std::stoi(val);
    else if (key == "b") v.params.b_flag = val == "1";
    else if (key == "p") v.params.p = std::stod(val);
    else if (key == "kappa") v.params.kappa = std::stoi(val);
    else if (key == "eta_kappa") v.params.eta_kappa = std::stoi(val);
    else if (key == "epsilon") v.params.epsilon = std::stod(val);
    else if (key == "c") v.params.c = std::stod(val);
    else throw config_error("unknown trace param: " + key);
  }
  v.params.validate();
  std::uint32_t declared_rounds = 0;
  if (!std::getline(is, line) || line.rfind("seed ", 0) != 0)
    throw config_error("trace missing seed line");
  v.seed = std::stoull(line.substr(5));
  if (!std::getline(is, line) || line.rfind("rounds ", 0) != 0)
    throw config_error("trace missing rounds line");
  declared_rounds = static_cast<std::uint32_t>(std::stoul(line.substr(7)));

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag != "r") throw config_error("bad trace round line: " + line);
    std::uint32_t round;
    ls >> round;
    std::string field, payload;
    auto next_field = [&](const char* expect) {
      ls >> field;
      if (field != expect) throw config_error("trace field order violated");
      payload.clear();
      // payload may be empty; peek the separator-delimited token
      if (ls.peek() == ' ') ls.get();
      while (ls.peek() != ' ' && ls.peek() != EOF) payload += static_cast<char>(ls.get());
    };
    next_field("sl");
    if (!payload.empty())
      for (const auto& s : detail::split(payload, ','))
        v.sleepy.push(static_cast<std::uint16_t>(std::stoul(s)));
    next_field("am");
    if (!payload.empty())
      for (const auto& s : detail::split(payload, ',')) {
        auto parts = detail::split(s, ':');
        MinedEntry m{0, detail::parse_hex(parts[0]), detail::parse_hex(parts[1]),
                     static_cast<std::uint32_t>(std::stoul(parts[2]))};
        v.adversary_mined.push(m);
        v.store.insert(m.id, m.parent, kAdversary, round, m.nonce);
      }
    next_field("hm");
    if (!payload.empty())
      for (const auto& s : detail::split(payload, ',')) {
        auto parts = detail::split(s, ':');
        MinedEntry m{static_cast<std::uint16_t>(std::stoul(parts[0])),
                     detail::parse_hex(parts[1]), detail::parse_hex(parts[2]),
                     static_cast<std::uint32_t>(std::stoul(parts[3]))};
        v.honest_mined.push(m);
        v.store.insert(m.id, m.parent, static_cast<PartyIx>(m.party), round, m.nonce);
      }
    next_field("df");
    if (!payload.empty())
      for (const auto& s : detail::split(payload, ',')) {
        auto parts = detail::split(s, ':');
        v.diffused.push({static_cast<PartyIx>(std::stoi(parts[0])), detail::parse_hex(parts[1])});
      }
    next_field("dl");
    if (!payload.empty())
      for (const auto& s : detail::split(payload, ','))
        v.delivered.push(detail::parse_hex(s));
    next_field("ad");
    if (!payload.empty())
      for (const auto& s : detail::split(payload, ',')) {
        auto parts = detail::split(s, ':');
        v.adoptions.push({static_cast<std::uint16_t>(std::stoul(parts[0])),
                          detail::parse_hex(parts[1])});
      }
    v.seal_round();
  }
  if (v.rounds != declared_rounds)
    throw config_error("trace round count mismatch");
  return v;
}

}  // namespace backbone
