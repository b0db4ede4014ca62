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

#include "rsd/verifier.hpp"

#include <string>

#include "rsd/error.hpp"

namespace rsd {

std::string_view to_string(VerifyMode mode) {
  switch (mode) {
    case VerifyMode::kGreedy: return "greedy";
    case VerifyMode::kTopK: return "topk";
    case VerifyMode::kTopP: return "topp";
    case VerifyMode::kRelaxed: return "relaxed";
  }
  return "?";
}

VerifyMode parse_verify_mode(std::string_view name) {
  if (name == "greedy") return VerifyMode::kGreedy;
  if (name == "topk") return VerifyMode::kTopK;
  if (name == "topp") return VerifyMode::kTopP;
  if (name == "relaxed") return VerifyMode::kRelaxed;
  throw_config("unknown verification policy '" + std::string(name) + "'");
}

void VerificationPolicy::validate() const {
  if (k < 1) throw_input("policy k must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw_input("policy p must lie in [0, 1)");
}

bool accept_token(TokenId token, const Distribution& dist, const VerificationPolicy& policy) {
  if (token < 0 || static_cast<std::size_t>(token) >= dist.size()) return false;
  switch (policy.mode) {
    case VerifyMode::kGreedy:
      return token == dist.argmax();
    case VerifyMode::kTopK:
      return dist.in_top_k(token, policy.k);
    case VerifyMode::kTopP:
      return token == dist.argmax() || dist[token] > policy.p;
    case VerifyMode::kRelaxed:
      return dist.in_top_k(token, policy.k) && dist[token] > policy.p;
  }
  return false;
}

VerificationOutcome verify_branches(const LinearDraft& draft, std::span<const Distribution> dists,
                                    const VerificationPolicy& policy) {
  if (dists.size() != draft.size() + 1) {
    throw_structure("expected " + std::to_string(draft.size() + 1) + " distributions, got " +
                    std::to_string(dists.size()));
  }
  const auto parent = mask_parents(draft);

  // Distribution a node is checked against: the one produced after its parent.
  auto dist_before = [&](std::size_t node) -> const Distribution& {
    return parent[node] == kNoParent ? dists[0] : dists[static_cast<std::size_t>(parent[node]) + 1];
  };

  std::size_t best_len = 0;
  std::size_t best_branch = 0;
  for (std::size_t b = 0; b < draft.branches.size(); ++b) {
    const auto& branch = draft.branches[b];
    std::size_t len = 0;
    for (std::size_t j = 0; j < branch.size(); ++j) {
      const std::size_t node = branch[j];
      const std::ptrdiff_t expected_parent = j == 0 ? kNoParent : static_cast<std::ptrdiff_t>(branch[j - 1]);
      if (node >= draft.size() || parent[node] != expected_parent) {
        throw_structure("branch " + std::to_string(b) + " is not a root-to-leaf path");
      }
    }
    while (len < branch.size() && accept_token(draft.tokens[branch[len]], dist_before(branch[len]), policy)) {
      ++len;
    }
    if (len > best_len) {
      best_len = len;
      best_branch = b;
    }
  }

  VerificationOutcome out;
  out.accepted_count = best_len;
  if (best_len == 0) {
    out.correction_token = dists[0].argmax();
    return out;
  }
  const auto& branch = draft.branches[best_branch];
  for (std::size_t j = 0; j < best_len; ++j) out.accepted_tokens.push_back(draft.tokens[branch[j]]);
  out.accepted_branch = best_branch;
  out.correction_token = dists[branch[best_len - 1] + 1].argmax();
  return out;
}

}  // namespace rsd
