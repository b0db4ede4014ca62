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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "rsd/language_model.hpp"
#include "rsd/types.hpp"

namespace rsd {

struct NGramOptions {
  std::size_t order = 3;
  double alpha = 1.0;
  std::size_t vocab_size = 0;
};

// Add-alpha smoothed n-gram model:
//   P(t | ctx) = (count(ctx, t) + alpha) / (count(ctx) + alpha * V)
// where ctx is the last min(order-1, |context|) tokens. Immutable after fit.
class NGramModel final : public LanguageModel {
 public:
  static NGramModel fit(const std::vector<TokenSeq>& corpus, const NGramOptions& options);

  std::size_t vocab_size() const override { return vocab_size_; }
  std::size_t order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }

  Distribution next_distribution(TokenSpan context) const override;

  // Same outputs as the generic version; looks up each node's window
  // directly instead of rebuilding the full context per node.
  std::vector<Distribution> evaluate_tree(TokenSpan context, const LinearDraft& draft) const override;

  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

  friend bool operator==(const NGramModel& a, const NGramModel& b) {
    return a.order_ == b.order_ && a.alpha_ == b.alpha_ && a.vocab_size_ == b.vocab_size_ &&
           a.tables_ == b.tables_;
  }

 private:
  struct Row {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint64_t>> counts;  // sorted by token
    friend bool operator==(const Row&, const Row&) = default;
  };

  struct KeyHash {
    using is_transparent = void;
    std::size_t operator()(TokenSpan key) const noexcept;
    std::size_t operator()(const TokenSeq& key) const noexcept { return (*this)(TokenSpan(key)); }
  };
  struct KeyEq {
    using is_transparent = void;
    bool operator()(TokenSpan a, TokenSpan b) const noexcept {
      return std::equal(a.begin(), a.end(), b.begin(), b.end());
    }
  };

  using Table = std::unordered_map<TokenSeq, Row, KeyHash, KeyEq>;

  void check_tokens(TokenSpan tokens) const;
  // `window` is the conditioning suffix, already cut to at most order-1 tokens.
  Distribution window_distribution(TokenSpan window) const;

  std::size_t order_ = 1;
  double alpha_ = 1.0;
  std::size_t vocab_size_ = 0;
  std::vector<Table> tables_;  // tables_[l] keyed by contexts of length l
};

// Reads one JSON array of token ids per line.
std::vector<TokenSeq> read_token_sequences(const std::filesystem::path& path);

}  // namespace rsd
