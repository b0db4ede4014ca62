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

#include "rsd/language_model.hpp"

namespace rsd {

std::vector<Distribution> LanguageModel::evaluate_tree(TokenSpan context,
                                                       const LinearDraft& draft) const {
  const auto paths = ancestor_paths(draft);
  std::vector<Distribution> out;
  out.reserve(draft.size() + 1);
  out.push_back(next_distribution(context));
  TokenSeq buffer(context.begin(), context.end());
  for (const auto& path : paths) {
    buffer.resize(context.size());
    buffer.insert(buffer.end(), path.begin(), path.end());
    out.push_back(next_distribution(buffer));
  }
  return out;
}

}  // namespace rsd
