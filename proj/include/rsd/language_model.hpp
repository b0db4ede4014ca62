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
#include <vector>

#include "rsd/linear_draft.hpp"
#include "rsd/types.hpp"

namespace rsd {

// Target model seen by the decoder. One evaluate_tree() call is one model
// call: it scores every node of a linearized draft under tree attention.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::size_t vocab_size() const = 0;

  virtual Distribution next_distribution(TokenSpan context) const = 0;

  // Index 0: distribution after `context`; index i (1-based over the
  // pseudo-sequence) conditions on context ++ ancestor path of node i-1.
  virtual std::vector<Distribution> evaluate_tree(TokenSpan context,
                                                  const LinearDraft& draft) const;
};

}  // namespace rsd
