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

#include "rsd/linear_draft.hpp"

#include <string>

#include "rsd/error.hpp"

namespace rsd {

std::size_t AttentionMask::row_count(std::size_t row) const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < n_; ++j) n += bits_[row * n_ + j];
  return n;
}

std::vector<std::ptrdiff_t> mask_parents(const LinearDraft& draft) {
  const std::size_t n = draft.tokens.size();
  if (draft.mask.size() != n || draft.positions.size() != n) {
    throw_structure("draft arrays disagree in length");
  }
  std::vector<std::ptrdiff_t> parent(n, kNoParent);
  for (std::size_t i = 0; i < n; ++i) {
    if (!draft.mask(i, i)) throw_structure("mask row " + std::to_string(i) + " misses its diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (draft.mask(i, j)) {
        throw_structure("node " + std::to_string(i) + " attends to later node " + std::to_string(j));
      }
    }
    // Nearest attended predecessor is the parent; its row must be exactly
    // row i minus the diagonal.
    for (std::size_t j = i; j-- > 0;) {
      if (draft.mask(i, j)) {
        parent[i] = static_cast<std::ptrdiff_t>(j);
        break;
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      const bool expected = parent[i] != kNoParent && draft.mask(static_cast<std::size_t>(parent[i]), j);
      if (draft.mask(i, j) != expected) {
        throw_structure("node " + std::to_string(i) + " attends to non-ancestor " + std::to_string(j));
      }
    }
    if (draft.positions[i] + 1 != draft.mask.row_count(i)) {
      throw_structure("position id of node " + std::to_string(i) + " does not match its depth");
    }
  }
  return parent;
}

std::vector<TokenSeq> ancestor_paths(const LinearDraft& draft) {
  const auto parent = mask_parents(draft);
  std::vector<TokenSeq> paths(draft.size());
  for (std::size_t i = 0; i < draft.size(); ++i) {
    if (parent[i] != kNoParent) paths[i] = paths[static_cast<std::size_t>(parent[i])];
    paths[i].push_back(draft.tokens[i]);
  }
  return paths;
}

}  // namespace rsd
