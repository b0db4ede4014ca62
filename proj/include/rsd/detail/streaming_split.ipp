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

#include <string>

#include "rsd/error.hpp"

namespace rsd {

template <typename T>
std::pair<std::vector<T>, std::vector<T>> simulate_streaming_split(const std::vector<T>& history,
                                                                   std::size_t m) {
  const std::size_t n = history.size();
  if (!(2 * m > n && m < n)) {
    throw_input("streaming split needs n/2 < m < n (n=" + std::to_string(n) +
                ", m=" + std::to_string(m) + ")");
  }
  std::vector<T> old_part(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(m));
  // x_{n-m} in 1-based terms is index n-m-1.
  std::vector<T> new_part(history.begin() + static_cast<std::ptrdiff_t>(n - m - 1), history.end());
  return {std::move(old_part), std::move(new_part)};
}

}  // namespace rsd
