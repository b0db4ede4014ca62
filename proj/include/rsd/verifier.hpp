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
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rsd/linear_draft.hpp"
#include "rsd/types.hpp"

namespace rsd {

enum class VerifyMode { kGreedy, kTopK, kTopP, kRelaxed };

std::string_view to_string(VerifyMode mode);
VerifyMode parse_verify_mode(std::string_view name);

struct VerificationPolicy {
  VerifyMode mode = VerifyMode::kGreedy;
  std::size_t k = 2;
  double p = 0.1;

  static VerificationPolicy greedy() { return {}; }
  static VerificationPolicy relaxed(std::size_t k = 2, double p = 0.1) {
    return {VerifyMode::kRelaxed, k, p};
  }

  void validate() const;
  friend bool operator==(const VerificationPolicy&, const VerificationPolicy&) = default;
};

struct VerificationOutcome {
  TokenSeq accepted_tokens;
  TokenId correction_token = 0;
  std::optional<std::size_t> accepted_branch;
  std::size_t accepted_count = 0;

  friend bool operator==(const VerificationOutcome&, const VerificationOutcome&) = default;
};

// greedy: argmax; topk: rank < k; topp: argmax or prob > p;
// relaxed: rank < k and prob > p.
bool accept_token(TokenId token, const Distribution& dist, const VerificationPolicy& policy);

// Walks every branch of `draft` against the tree-evaluated distributions and
// keeps the longest accepted prefix (earliest branch on ties). The correction
// token is the argmax at the first rejected position of that branch, or after
// its last node when the whole branch is accepted.
VerificationOutcome verify_branches(const LinearDraft& draft,
                                    std::span<const Distribution> dists,
                                    const VerificationPolicy& policy);

}  // namespace rsd
