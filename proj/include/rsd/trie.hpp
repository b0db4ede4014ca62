// Copyright 2026 The rsd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsd/types.hpp"

namespace rsd {

// Token prefix tree with per-node occurrence counts. Nodes live in an arena;
// node 0 is the (token-less) root. Children are kept sorted by token id.
class Trie {
 public:
  using NodeIndex = std::uint32_t;
  static constexpr NodeIndex kRoot = 0;
  static constexpr NodeIndex kNone = UINT32_MAX;

  struct Node {
    TokenId token = -1;
    std::uint32_t frequency = 0;
    std::vector<NodeIndex> children;
  };

  Trie();

  // Inserts one root-anchored path, adding 1 to every node it passes.
  void insert(TokenSpan sequence);

  // Follows `path` from `from`; kNone if any edge is missing.
  NodeIndex find(TokenSpan path, NodeIndex from = kRoot) const;
  NodeIndex child(NodeIndex parent, TokenId token) const;

  // Returns the child, creating it with frequency 0 if absent.
  NodeIndex child_or_add(NodeIndex parent, TokenId token);

  const Node& node(NodeIndex i) const { return nodes_[i]; }
  void bump(NodeIndex i) { ++nodes_[i].frequency; }

  // Excludes the root.
  std::size_t node_count() const noexcept { return nodes_.size() - 1; }
  bool empty() const noexcept { return nodes_.size() == 1; }
  void clear();

  void write(std::ostream& out) const;
  static Trie read(std::istream& in);

  friend bool operator==(const Trie& a, const Trie& b);

 private:
  std::vector<Node> nodes_;
};

// Incrementally maintains the depth-capped suffix trie of a growing token
// stream: after feeding x_1..x_L, the trie holds every suffix x_s..x_L
// truncated to `max_depth` tokens, each inserted once.
class SuffixFeeder {
 public:
  explicit SuffixFeeder(std::size_t max_depth) : max_depth_(max_depth) {}

  void push(Trie& trie, TokenId token);
  void push(Trie& trie, TokenSpan tokens) {
    for (TokenId t : tokens) push(trie, t);
  }
  void reset() { open_.clear(); }

 private:
  struct Cursor {
    Trie::NodeIndex node;
    std::size_t depth;
  };
  std::size_t max_depth_;
  std::vector<Cursor> open_;
};

inline constexpr std::size_t kDefaultMaxBranchDepth = 64;

// Permanent retrieval pool for one group. Read-only once built.
class TriePool {
 public:
  TriePool(std::string group_id, std::size_t vocab_size,
           std::size_t max_branch_depth = kDefaultMaxBranchDepth);

  // Inserts a knowledge text as all of its suffixes (depth-capped).
  void insert_text(TokenSpan text);
  // Inserts a single root-anchored sequence.
  void insert(TokenSpan sequence);

  const std::string& group_id() const noexcept { return group_id_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t max_branch_depth() const noexcept { return max_branch_depth_; }
  std::uint64_t size_entries() const noexcept { return entries_; }
  const Trie& trie() const noexcept { return trie_; }

  void write(std::ostream& out) const;
  static TriePool read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static TriePool load(const std::filesystem::path& path);
  std::string serialize() const;

  friend bool operator==(const TriePool&, const TriePool&) = default;

 private:
  void check_tokens(TokenSpan tokens) const;

  std::string group_id_;
  std::size_t vocab_size_;
  std::size_t max_branch_depth_;
  std::uint64_t entries_ = 0;
  Trie trie_;
};

// Session-local temporary branches: the prompt and everything generated so
// far. Owned by one decode session and dropped when it ends.
class SessionOverlay {
 public:
  explicit SessionOverlay(std::string owner = {},
                          std::size_t max_branch_depth = kDefaultMaxBranchDepth);

  SessionOverlay(const SessionOverlay&) = delete;
  SessionOverlay& operator=(const SessionOverlay&) = delete;
  SessionOverlay(SessionOverlay&&) = default;
  SessionOverlay& operator=(SessionOverlay&&) = default;

  // Extends the session stream; new suffix content becomes retrievable.
  void append(TokenSpan tokens);
  void insert(TokenSpan sequence);
  void drop();

  const std::string& owner() const noexcept { return owner_; }
  const Trie& trie() const noexcept { return trie_; }

 private:
  std::string owner_;
  std::size_t max_branch_depth_;
  Trie trie_;
  SuffixFeeder feeder_;
};

// Retrieved token tree. nodes[0] is a sentinel root standing for the matched
// prefix; every other node has a parent with a smaller index.
class DraftTree {
 public:
  struct Node {
    TokenId token = -1;
    std::uint64_t frequency = 0;
    std::ptrdiff_t parent = -1;
    std::size_t depth = 0;  // 1 for children of the sentinel
    std::vector<std::size_t> children;  // ascending token id
  };

  DraftTree();

  // Number of token nodes (sentinel excluded).
  std::size_t size() const noexcept { return nodes_.size() - 1; }
  bool empty() const noexcept { return size() == 0; }

  const Node& node(std::size_t i) const { return nodes_[i]; }
  const Node& root() const { return nodes_[0]; }

  std::size_t add_child(std::size_t parent, TokenId token, std::uint64_t frequency);
  void set_root_frequency(std::uint64_t f) { nodes_[0].frequency = f; }

  // Root-excluded token paths to every leaf, in DFS (ascending token) order.
  std::vector<TokenSeq> leaf_paths() const;

  friend bool operator==(const DraftTree& a, const DraftTree& b);

 private:
  std::vector<Node> nodes_;
};

// Merged subtree under `prefix` across the permanent pool and the overlay,
// frequencies summed on shared paths. Either source may be null.
DraftTree retrieve_subtree(const TriePool* pool, const SessionOverlay* overlay,
                           TokenSpan prefix);
DraftTree retrieve_subtree(const TriePool* pool, const SessionOverlay* overlay,
                           TokenSpan prefix, std::size_t max_tokens);

// Keeps at most `max_tokens` nodes, admitting them best-first from the
// frontier of already-kept nodes by (frequency desc, token asc, depth asc).
DraftTree prune_top_frequency(const DraftTree& tree, std::size_t max_tokens);

}  // namespace rsd
