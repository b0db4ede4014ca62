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
#include <span>
#include <utility>
#include <vector>

namespace rsd {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;
using TokenSpan = std::span<const TokenId>;

inline constexpr TokenId kDefaultEos = 0;

// Probability vector over the vocabulary, stored exactly as a floor value
// shared by every unlisted token plus a sorted list of explicit entries.
// Ties in argmax and rank queries always resolve to the lowest token id.
class Distribution {
 public:
  using Entry = std::pair<TokenId, double>;

  Distribution() = default;
  // Dense form: every token is listed.
  explicit Distribution(std::vector<double> probs);
  // `entries` sorted by token id without duplicates; the remaining tokens of
  // the vocabulary get probability `floor`.
  Distribution(std::size_t vocab_size, double floor, std::vector<Entry> entries);

  std::size_t size() const noexcept { return size_; }
  double operator[](TokenId t) const;
  double floor() const noexcept { return floor_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<double> dense() const;

  TokenId argmax() const;

  // Number of tokens ranked strictly ahead of `t` under (prob desc, id asc).
  std::size_t rank_of(TokenId t) const;

  bool in_top_k(TokenId t, std::size_t k) const { return rank_of(t) < k; }

  double sum() const;

  // Element-wise equality over the whole vocabulary.
  friend bool operator==(const Distribution& a, const Distribution& b);

 private:
  std::size_t size_ = 0;
  double floor_ = 0.0;
  std::vector<Entry> entries_;
};

}  // namespace rsd
