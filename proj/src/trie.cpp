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

#include "rsd/trie.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <tuple>

#include "binary_io.hpp"
#include "rsd/error.hpp"

namespace rsd {
namespace {

constexpr char kPoolMagic[9] = "RSDTRIE\0";
constexpr std::uint32_t kPoolVersion = 1;

}  // namespace

// ---------------------------------------------------------------------------
// Trie

Trie::Trie() { nodes_.emplace_back(); }

void Trie::clear() {
  nodes_.clear();
  nodes_.emplace_back();
}

Trie::NodeIndex Trie::child(NodeIndex parent, TokenId token) const {
  const auto& kids = nodes_[parent].children;
  const auto it = std::lower_bound(kids.begin(), kids.end(), token,
                                   [this](NodeIndex c, TokenId t) { return nodes_[c].token < t; });
  if (it != kids.end() && nodes_[*it].token == token) return *it;
  return kNone;
}

Trie::NodeIndex Trie::child_or_add(NodeIndex parent, TokenId token) {
  auto& kids = nodes_[parent].children;
  const auto it = std::lower_bound(kids.begin(), kids.end(), token,
                                   [this](NodeIndex c, TokenId t) { return nodes_[c].token < t; });
  if (it != kids.end() && nodes_[*it].token == token) return *it;
  const auto idx = static_cast<NodeIndex>(nodes_.size());
  kids.insert(it, idx);
  // `kids` may dangle after this push_back.
  nodes_.push_back(Node{token, 0, {}});
  return idx;
}

void Trie::insert(TokenSpan sequence) {
  if (sequence.empty()) throw_input("cannot insert an empty sequence");
  NodeIndex cur = kRoot;
  bump(kRoot);
  for (TokenId t : sequence) {
    cur = child_or_add(cur, t);
    bump(cur);
  }
}

Trie::NodeIndex Trie::find(TokenSpan path, NodeIndex from) const {
  NodeIndex cur = from;
  for (TokenId t : path) {
    cur = child(cur, t);
    if (cur == kNone) return kNone;
  }
  return cur;
}

void Trie::write(std::ostream& out) const {
  detail::write_pod<std::uint64_t>(out, nodes_.size());
  // Preorder records: token, frequency, child count.
  std::vector<NodeIndex> stack{kRoot};
  while (!stack.empty()) {
    const NodeIndex i = stack.back();
    stack.pop_back();
    const Node& n = nodes_[i];
    detail::write_pod(out, n.token);
    detail::write_pod(out, n.frequency);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(n.children.size()));
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
}

Trie Trie::read(std::istream& in) {
  const auto count = detail::read_pod<std::uint64_t>(in);
  if (count == 0) throw_data("trie without root");
  Trie trie;
  trie.nodes_.clear();
  trie.nodes_.reserve(count);
  // (node, remaining children to read)
  std::vector<std::pair<NodeIndex, std::uint32_t>> stack;
  for (std::uint64_t r = 0; r < count; ++r) {
    Node n;
    n.token = detail::read_pod<TokenId>(in);
    n.frequency = detail::read_pod<std::uint32_t>(in);
    const auto kids = detail::read_pod<std::uint32_t>(in);
    const auto idx = static_cast<NodeIndex>(trie.nodes_.size());
    if (!stack.empty()) {
      auto& top = stack.back();
      auto& siblings = trie.nodes_[top.first].children;
      if (!siblings.empty() && trie.nodes_[siblings.back()].token >= n.token) {
        throw_data("trie children out of order");
      }
      siblings.push_back(idx);
      --top.second;
    } else if (r != 0) {
      throw_data("trie records exceed the tree shape");
    }
    trie.nodes_.push_back(std::move(n));
    stack.emplace_back(idx, kids);
    while (!stack.empty() && stack.back().second == 0) stack.pop_back();
  }
  if (!stack.empty()) throw_data("truncated trie records");
  trie.nodes_[kRoot].token = -1;
  return trie;
}

bool operator==(const Trie& a, const Trie& b) {
  // Structural equality; arena layout may differ between equal tries.
  if (a.nodes_.size() != b.nodes_.size()) return false;
  std::vector<std::pair<Trie::NodeIndex, Trie::NodeIndex>> stack{{Trie::kRoot, Trie::kRoot}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[j];
    if (x.frequency != y.frequency || x.children.size() != y.children.size()) return false;
    if (i != Trie::kRoot && x.token != y.token) return false;
    for (std::size_t c = 0; c < x.children.size(); ++c) stack.emplace_back(x.children[c], y.children[c]);
  }
  return true;
}

// ---------------------------------------------------------------------------
// SuffixFeeder

void SuffixFeeder::push(Trie& trie, TokenId token) {
  if (max_depth_ == 0) return;
  std::size_t kept = 0;
  for (auto& c : open_) {
    c.node = trie.child_or_add(c.node, token);
    trie.bump(c.node);
    ++c.depth;
    if (c.depth < max_depth_) open_[kept++] = c;
  }
  open_.resize(kept);
  // A new suffix starts at this token.
  trie.bump(Trie::kRoot);
  const auto start = trie.child_or_add(Trie::kRoot, token);
  trie.bump(start);
  if (max_depth_ > 1) open_.push_back({start, 1});
}

// ---------------------------------------------------------------------------
// TriePool

TriePool::TriePool(std::string group_id, std::size_t vocab_size, std::size_t max_branch_depth)
    : group_id_(std::move(group_id)), vocab_size_(vocab_size), max_branch_depth_(max_branch_depth) {
  if (max_branch_depth_ == 0) throw_input("max branch depth must be >= 1");
}

void TriePool::check_tokens(TokenSpan tokens) const {
  for (TokenId t : tokens) {
    if (t < 0 || (vocab_size_ != 0 && static_cast<std::size_t>(t) >= vocab_size_)) {
      throw_input("token " + std::to_string(t) + " outside vocabulary of pool " + group_id_);
    }
  }
}

void TriePool::insert_text(TokenSpan text) {
  if (text.empty()) throw_input("cannot insert an empty knowledge text");
  check_tokens(text);
  SuffixFeeder feeder(max_branch_depth_);
  feeder.push(trie_, text);
  ++entries_;
}

void TriePool::insert(TokenSpan sequence) {
  if (sequence.empty()) throw_input("cannot insert an empty sequence");
  check_tokens(sequence);
  trie_.insert(sequence);
  ++entries_;
}

void TriePool::write(std::ostream& out) const {
  out.write(kPoolMagic, 8);
  detail::write_pod(out, kPoolVersion);
  detail::write_string(out, group_id_);
  detail::write_pod<std::uint64_t>(out, vocab_size_);
  detail::write_pod<std::uint64_t>(out, entries_);
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(max_branch_depth_));
  trie_.write(out);
}

TriePool TriePool::read(std::istream& in) {
  detail::expect_magic(in, kPoolMagic);
  if (detail::read_pod<std::uint32_t>(in) != kPoolVersion) throw_data("unsupported pool file version");
  auto group = detail::read_string(in);
  const auto vocab = detail::read_pod<std::uint64_t>(in);
  const auto entries = detail::read_pod<std::uint64_t>(in);
  const auto depth = detail::read_pod<std::uint32_t>(in);
  if (depth == 0) throw_data("pool with zero branch depth");
  TriePool pool(std::move(group), vocab, depth);
  pool.entries_ = entries;
  pool.trie_ = Trie::read(in);
  return pool;
}

void TriePool::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_io("cannot open " + path.string() + " for writing");
  write(out);
  if (!out) throw_io("failed writing " + path.string());
}

TriePool TriePool::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  return read(in);
}

std::string TriePool::serialize() const {
  std::ostringstream out(std::ios::binary);
  write(out);
  return std::move(out).str();
}

// ---------------------------------------------------------------------------
// SessionOverlay

SessionOverlay::SessionOverlay(std::string owner, std::size_t max_branch_depth)
    : owner_(std::move(owner)), max_branch_depth_(max_branch_depth), feeder_(max_branch_depth) {}

void SessionOverlay::append(TokenSpan tokens) { feeder_.push(trie_, tokens); }

void SessionOverlay::insert(TokenSpan sequence) { trie_.insert(sequence); }

void SessionOverlay::drop() {
  trie_.clear();
  feeder_.reset();
}

// ---------------------------------------------------------------------------
// DraftTree

DraftTree::DraftTree() { nodes_.emplace_back(); }

std::size_t DraftTree::add_child(std::size_t parent, TokenId token, std::uint64_t frequency) {
  const std::size_t idx = nodes_.size();
  Node n;
  n.token = token;
  n.frequency = frequency;
  n.parent = static_cast<std::ptrdiff_t>(parent);
  n.depth = nodes_[parent].depth + 1;
  nodes_.push_back(std::move(n));
  auto& kids = nodes_[parent].children;
  const auto it = std::lower_bound(kids.begin(), kids.end(), token,
                                   [this](std::size_t c, TokenId t) { return nodes_[c].token < t; });
  kids.insert(it, idx);
  return idx;
}

std::vector<TokenSeq> DraftTree::leaf_paths() const {
  std::vector<TokenSeq> out;
  TokenSeq path;
  // Iterative DFS with explicit child cursors.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& kids = nodes_[node].children;
    if (node != 0 && kids.empty() && next == 0) out.push_back(path);
    if (next < kids.size()) {
      const std::size_t c = kids[next++];
      path.push_back(nodes_[c].token);
      stack.emplace_back(c, 0);
    } else {
      if (node != 0) path.pop_back();
      stack.pop_back();
    }
  }
  return out;
}

bool operator==(const DraftTree& a, const DraftTree& b) {
  if (a.nodes_.size() != b.nodes_.size()) return false;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[j];
    if (x.token != y.token || x.frequency != y.frequency || x.children.size() != y.children.size()) {
      return false;
    }
    for (std::size_t c = 0; c < x.children.size(); ++c) stack.emplace_back(x.children[c], y.children[c]);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Retrieval

DraftTree retrieve_subtree(const TriePool* pool, const SessionOverlay* overlay, TokenSpan prefix) {
  DraftTree out;
  if (prefix.empty()) throw_input("retrieval prefix must be non-empty");
  const Trie* a = pool != nullptr ? &pool->trie() : nullptr;
  const Trie* b = overlay != nullptr ? &overlay->trie() : nullptr;
  const auto ra = a != nullptr ? a->find(prefix) : Trie::kNone;
  const auto rb = b != nullptr ? b->find(prefix) : Trie::kNone;
  if (ra == Trie::kNone && rb == Trie::kNone) return out;

  auto freq = [](const Trie* t, Trie::NodeIndex i) -> std::uint64_t {
    return i == Trie::kNone ? 0 : t->node(i).frequency;
  };
  out.set_root_frequency(freq(a, ra) + freq(b, rb));

  struct Frame {
    std::size_t out_node;
    Trie::NodeIndex ia, ib;
  };
  std::vector<Frame> stack{{0, ra, rb}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    static const std::vector<Trie::NodeIndex> kNoKids;
    const auto& ka = f.ia != Trie::kNone ? a->node(f.ia).children : kNoKids;
    const auto& kb = f.ib != Trie::kNone ? b->node(f.ib).children : kNoKids;
    // Merge two token-sorted child lists.
    std::size_t x = 0, y = 0;
    while (x < ka.size() || y < kb.size()) {
      const TokenId ta = x < ka.size() ? a->node(ka[x]).token : INT32_MAX;
      const TokenId tb = y < kb.size() ? b->node(kb[y]).token : INT32_MAX;
      const TokenId t = std::min(ta, tb);
      const auto ca = ta == t ? ka[x++] : Trie::kNone;
      const auto cb = tb == t ? kb[y++] : Trie::kNone;
      const auto idx = out.add_child(f.out_node, t, freq(a, ca) + freq(b, cb));
      stack.push_back({idx, ca, cb});
    }
  }
  return out;
}

DraftTree retrieve_subtree(const TriePool* pool, const SessionOverlay* overlay, TokenSpan prefix,
                           std::size_t max_tokens) {
  auto tree = retrieve_subtree(pool, overlay, prefix);
  if (tree.size() > max_tokens) return prune_top_frequency(tree, max_tokens);
  return tree;
}

DraftTree prune_top_frequency(const DraftTree& tree, std::size_t max_tokens) {
  if (max_tokens < 1) throw_input("prune budget must be >= 1");
  if (tree.size() <= max_tokens) return tree;

  struct Candidate {
    std::uint64_t frequency;
    TokenId token;
    std::size_t depth;
    std::size_t index;
    std::size_t out_parent;
  };
  // Top of the heap = highest frequency, then lowest token, then shallowest.
  auto worse = [](const Candidate& l, const Candidate& r) {
    return std::tie(r.frequency, l.token, l.depth, l.index) >
           std::tie(l.frequency, r.token, r.depth, r.index);
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);

  DraftTree out;
  out.set_root_frequency(tree.root().frequency);
  auto push_children = [&](std::size_t src, std::size_t dst) {
    for (std::size_t c : tree.node(src).children) {
      const auto& n = tree.node(c);
      frontier.push({n.frequency, n.token, n.depth, c, dst});
    }
  };
  push_children(0, 0);
  while (out.size() < max_tokens && !frontier.empty()) {
    const Candidate c = frontier.top();
    frontier.pop();
    const auto idx = out.add_child(c.out_parent, c.token, c.frequency);
    push_children(c.index, idx);
  }
  return out;
}

}  // namespace rsd
