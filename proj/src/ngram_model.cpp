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

#include "rsd/ngram_model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "binary_io.hpp"
#include "rsd/error.hpp"

namespace rsd {
namespace {

constexpr char kMagic[9] = "RSDNGRAM";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::size_t NGramModel::KeyHash::operator()(TokenSpan key) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (TokenId t : key) {
    h ^= static_cast<std::uint32_t>(t);
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

NGramModel NGramModel::fit(const std::vector<TokenSeq>& corpus, const NGramOptions& options) {
  if (options.order < 1) throw_input("n-gram order must be >= 1");
  if (!(options.alpha > 0.0)) throw_input("smoothing alpha must be > 0");
  if (options.vocab_size == 0) throw_input("vocab_size must be > 0");

  NGramModel model;
  model.order_ = options.order;
  model.alpha_ = options.alpha;
  model.vocab_size_ = options.vocab_size;

  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (TokenId t : corpus[s]) {
      if (t < 0 || static_cast<std::size_t>(t) >= options.vocab_size) {
        throw_input("token id " + std::to_string(t) + " out of range in sequence " +
                    std::to_string(s));
      }
    }
  }

  // Counting pass over ordered maps so the finalized rows come out sorted.
  std::vector<std::unordered_map<TokenSeq, std::map<TokenId, std::uint64_t>, KeyHash, KeyEq>> raw(
      options.order);
  for (const auto& seq : corpus) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      for (std::size_t len = 0; len < options.order && len <= i; ++len) {
        TokenSeq key(seq.begin() + static_cast<std::ptrdiff_t>(i - len),
                     seq.begin() + static_cast<std::ptrdiff_t>(i));
        ++raw[len][std::move(key)][seq[i]];
      }
    }
  }

  model.tables_.resize(options.order);
  for (std::size_t len = 0; len < options.order; ++len) {
    auto& table = model.tables_[len];
    table.reserve(raw[len].size());
    for (auto& [key, counts] : raw[len]) {
      Row row;
      row.counts.assign(counts.begin(), counts.end());
      for (const auto& [tok, c] : row.counts) row.total += c;
      table.emplace(key, std::move(row));
    }
  }
  return model;
}

void NGramModel::check_tokens(TokenSpan tokens) const {
  for (TokenId t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_) {
      throw_input("context token " + std::to_string(t) + " outside vocabulary of size " +
                  std::to_string(vocab_size_));
    }
  }
}

Distribution NGramModel::next_distribution(TokenSpan context) const {
  check_tokens(context);
  return window_distribution(context.last(std::min(order_ - 1, context.size())));
}

Distribution NGramModel::window_distribution(TokenSpan window) const {
  const Row* row = nullptr;
  const auto& table = tables_[window.size()];
  if (const auto it = table.find(window); it != table.end()) row = &it->second;

  const double total = row != nullptr ? static_cast<double>(row->total) : 0.0;
  const double denom = total + alpha_ * static_cast<double>(vocab_size_);
  std::vector<Distribution::Entry> seen;
  if (row != nullptr) {
    seen.reserve(row->counts.size());
    for (const auto& [tok, c] : row->counts) seen.emplace_back(tok, (static_cast<double>(c) + alpha_) / denom);
  }
  return Distribution(vocab_size_, alpha_ / denom, std::move(seen));
}

std::vector<Distribution> NGramModel::evaluate_tree(TokenSpan context, const LinearDraft& draft) const {
  check_tokens(context);
  check_tokens(draft.tokens);
  const auto parent = mask_parents(draft);
  const std::size_t width = order_ - 1;

  std::vector<Distribution> out;
  out.reserve(draft.size() + 1);
  out.push_back(window_distribution(context.last(std::min(width, context.size()))));
  TokenSeq window(width);
  for (std::size_t i = 0; i < draft.size(); ++i) {
    // Fill the window right to left: ancestors first, then the context tail.
    std::size_t n = 0;
    for (auto node = static_cast<std::ptrdiff_t>(i); node != kNoParent && n < width;
         node = parent[static_cast<std::size_t>(node)]) {
      window[width - 1 - n++] = draft.tokens[static_cast<std::size_t>(node)];
    }
    for (std::size_t c = context.size(); c > 0 && n < width; --c) window[width - 1 - n++] = context[c - 1];
    out.push_back(window_distribution(TokenSpan(window).last(n)));
  }
  return out;
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_io("cannot open " + path.string() + " for writing");
  out.write(kMagic, 8);
  detail::write_pod(out, kVersion);
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(order_));
  detail::write_pod<std::uint64_t>(out, vocab_size_);
  detail::write_pod(out, alpha_);
  for (std::size_t len = 0; len < order_; ++len) {
    // Sorted keys make the file a deterministic function of the model.
    std::vector<const std::pair<const TokenSeq, Row>*> entries;
    entries.reserve(tables_[len].size());
    for (const auto& e : tables_[len]) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
    detail::write_pod<std::uint64_t>(out, entries.size());
    for (const auto* e : entries) {
      for (TokenId t : e->first) detail::write_pod(out, t);
      detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e->second.counts.size()));
      for (const auto& [tok, c] : e->second.counts) {
        detail::write_pod(out, tok);
        detail::write_pod(out, c);
      }
    }
  }
  if (!out) throw_io("failed writing " + path.string());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  detail::expect_magic(in, kMagic);
  if (detail::read_pod<std::uint32_t>(in) != kVersion) throw_data("unsupported n-gram file version");
  NGramModel model;
  model.order_ = detail::read_pod<std::uint32_t>(in);
  model.vocab_size_ = detail::read_pod<std::uint64_t>(in);
  model.alpha_ = detail::read_pod<double>(in);
  if (model.order_ < 1 || model.vocab_size_ == 0 || !(model.alpha_ > 0.0)) {
    throw_data("corrupt n-gram header in " + path.string());
  }
  model.tables_.resize(model.order_);
  for (std::size_t len = 0; len < model.order_; ++len) {
    const auto n = detail::read_pod<std::uint64_t>(in);
    for (std::uint64_t e = 0; e < n; ++e) {
      TokenSeq key(len);
      for (auto& t : key) t = detail::read_pod<TokenId>(in);
      Row row;
      const auto nnz = detail::read_pod<std::uint32_t>(in);
      row.counts.reserve(nnz);
      for (std::uint32_t c = 0; c < nnz; ++c) {
        const auto tok = detail::read_pod<TokenId>(in);
        const auto count = detail::read_pod<std::uint64_t>(in);
        if (tok < 0 || static_cast<std::size_t>(tok) >= model.vocab_size_) {
          throw_data("token out of range in " + path.string());
        }
        row.counts.emplace_back(tok, count);
        row.total += count;
      }
      model.tables_[len].emplace(std::move(key), std::move(row));
    }
  }
  return model;
}

std::vector<TokenSeq> read_token_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_config("cannot read token corpus " + path.string());
  std::vector<TokenSeq> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TokenSeq seq;
      if (!j.is_array()) throw_data("expected a JSON array of token ids");
      for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw_data("not a token id");
        seq.push_back(v.get<TokenId>());
      }
      out.push_back(std::move(seq));
    } catch (const std::exception& e) {
      throw_data(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rsd
