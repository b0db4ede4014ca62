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
#include <vector>

#include "rsd/types.hpp"

namespace rsd {

// Square boolean matrix; row i marks the nodes node i may attend to.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool operator()(std::size_t row, std::size_t col) const {
    return bits_[row * n_ + col] != 0;
  }
  void set(std::size_t row, std::size_t col, bool value = true) {
    bits_[row * n_ + col] = value ? 1 : 0;
  }
  std::size_t row_count(std::size_t row) const;

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

// DFS-linearized draft tree. `branches` holds root-to-leaf paths as indices
// into the pseudo-sequence.
struct LinearDraft {
  TokenSeq tokens;
  AttentionMask mask;
  std::vector<std::size_t> positions;
  std::vector<std::vector<std::size_t>> branches;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  friend bool operator==(const LinearDraft&, const LinearDraft&) = default;
};

inline constexpr std::ptrdiff_t kNoParent = -1;

// Recovers each node's parent from the mask and checks that the mask is an
// ancestor-closure of a forest in DFS order and that positions match depth.
// Throws Error(kStructure) on any inconsistency.
std::vector<std::ptrdiff_t> mask_parents(const LinearDraft& draft);

// Root-to-node token path for every node, derived from mask_parents().
std::vector<TokenSeq> ancestor_paths(const LinearDraft& draft);

}  // namespace rsd
