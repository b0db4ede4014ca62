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

#include "rsd/types.hpp"

#include <algorithm>
#include <numeric>

namespace rsd {

Distribution::Distribution(std::vector<double> probs) : size_(probs.size()) {
  entries_.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) entries_.emplace_back(static_cast<TokenId>(i), probs[i]);
}

Distribution::Distribution(std::size_t vocab_size, double floor, std::vector<Entry> entries)
    : size_(vocab_size), floor_(floor), entries_(std::move(entries)) {}

double Distribution::operator[](TokenId t) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                                   [](const Entry& e, TokenId x) { return e.first < x; });
  return it != entries_.end() && it->first == t ? it->second : floor_;
}

std::vector<double> Distribution::dense() const {
  std::vector<double> out(size_, floor_);
  for (const auto& [t, p] : entries_) out[static_cast<std::size_t>(t)] = p;
  return out;
}

TokenId Distribution::argmax() const {
  const Entry* best = nullptr;
  for (const auto& e : entries_) {
    if (best == nullptr || e.second > best->second) best = &e;
  }
  if (entries_.size() == size_) return best != nullptr ? best->first : 0;
  // Lowest unlisted id carries the floor.
  TokenId unlisted = 0;
  for (const auto& e : entries_) {
    if (e.first != unlisted) break;
    ++unlisted;
  }
  if (best == nullptr || floor_ > best->second) return unlisted;
  if (floor_ == best->second) return std::min(unlisted, best->first);
  return best->first;
}

std::size_t Distribution::rank_of(TokenId t) const {
  const double pt = (*this)[t];
  std::size_t ahead = 0;
  std::size_t listed_below = 0;
  for (const auto& [id, p] : entries_) {
    if (p > pt || (p == pt && id < t)) ++ahead;
    if (id < t) ++listed_below;
  }
  const std::size_t unlisted = size_ - entries_.size();
  if (floor_ > pt) {
    ahead += unlisted;
  } else if (floor_ == pt) {
    ahead += static_cast<std::size_t>(t) - listed_below;
  }
  return ahead;
}

double Distribution::sum() const {
  double s = floor_ * static_cast<double>(size_ - entries_.size());
  for (const auto& e : entries_) s += e.second;
  return s;
}

bool operator==(const Distribution& a, const Distribution& b) {
  if (a.size_ != b.size_) return false;
  if (a.floor_ == b.floor_ && a.entries_ == b.entries_) return true;
  return a.dense() == b.dense();
}

}  // namespace rsd
