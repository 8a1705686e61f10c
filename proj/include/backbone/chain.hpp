#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "backbone/types.hpp"

namespace backbone {

struct Block {
  BlockId id = kGenesisId;
  BlockId parent_id = kGenesisId;
  PartyIx creator = kNobody;
  std::uint32_t created_round = 0;
  std::uint32_t nonce = 0;   // attempt index within the creator's round budget
  std::uint32_t height = 0;  // distance from genesis
};

/// An id collision observed at insertion time: a successful oracle sample
/// equal to an already-minted block id but carrying different content.
struct IdCollision {
  Block existing;
  Block attempted;
};

/// Shared block tree. Blocks are identified by their oracle sample; the
/// genesis block (id 0, round 0) is present from construction.
class ChainStore {
 public:
  ChainStore() {
    blocks_.emplace(kGenesisId, Block{});
  }

  enum class Insert { Added, Collision };

  /// Inserts a block whose parent must already exist. On an id collision the
  /// store keeps the first block and records the event.
  Insert insert(BlockId id, BlockId parent, PartyIx creator, std::uint32_t round,
                std::uint32_t nonce) {
    auto par = blocks_.find(parent);
    if (par == blocks_.end()) throw lookup_error("insert: unknown parent id");
    Block b{id, parent, creator, round, nonce, par->second.height + 1};
    auto [it, added] = blocks_.emplace(id, b);
    if (!added) {
      collisions_.push_back({it->second, b});
      return Insert::Collision;
    }
    children_[parent].push_back(id);
    return Insert::Added;
  }

  bool contains(BlockId id) const { return blocks_.count(id) != 0; }

  const Block& block(BlockId id) const {
    auto it = blocks_.find(id);
    if (it == blocks_.end()) throw lookup_error("unknown block id");
    return it->second;
  }

  /// Chain length of the block at `head`, in non-genesis blocks.
  std::uint32_t height(BlockId head) const { return block(head).height; }

  std::span<const BlockId> children(BlockId id) const {
    auto it = children_.find(id);
    if (it == children_.end()) return {};
    return it->second;
  }

  const std::unordered_map<BlockId, Block>& blocks() const { return blocks_; }
  const std::vector<IdCollision>& collisions() const { return collisions_; }

  /// Height of the deepest common ancestor of two heads.
  std::uint32_t common_ancestor_height(BlockId a, BlockId b) const {
    const Block* ba = &block(a);
    const Block* bb = &block(b);
    while (ba->height > bb->height) ba = &block(ba->parent_id);
    while (bb->height > ba->height) bb = &block(bb->parent_id);
    while (ba->id != bb->id) {
      ba = &block(ba->parent_id);
      bb = &block(bb->parent_id);
    }
    return ba->height;
  }

 private:
  std::unordered_map<BlockId, Block> blocks_;
  std::unordered_map<BlockId, std::vector<BlockId>> children_;
  std::vector<IdCollision> collisions_;
};

using Chain = std::vector<BlockId>;

/// The unique path genesis -> head, excluding genesis itself.
inline Chain chain_of(const ChainStore& store, BlockId head) {
  Chain out;
  out.reserve(store.height(head));
  for (const Block* b = &store.block(head); b->id != kGenesisId; b = &store.block(b->parent_id))
    out.push_back(b->id);
  std::reverse(out.begin(), out.end());
  return out;
}

/// C^{ceil k}: drops the last min(k, len) blocks.
inline Chain truncate(Chain chain, std::size_t k) {
  chain.resize(chain.size() - std::min(k, chain.size()));
  return chain;
}

/// C1 <= C2 (prefix relation).
inline bool is_prefix(std::span<const BlockId> c1, std::span<const BlockId> c2) {
  if (c1.size() > c2.size()) return false;
  return std::equal(c1.begin(), c1.end(), c2.begin());
}

/// Longest-chain rule: a strictly longer candidate displaces `current`;
/// among equal-length strictly-longer candidates the first in order wins.
inline BlockId select_chain(BlockId current, std::span<const BlockId> candidates,
                            const ChainStore& store) {
  BlockId best = current;
  std::uint32_t best_h = store.height(current);
  for (BlockId cand : candidates) {
    std::uint32_t h = store.height(cand);
    if (h > best_h) {
      best = cand;
      best_h = h;
    }
  }
  return best;
}

}  // namespace backbone
