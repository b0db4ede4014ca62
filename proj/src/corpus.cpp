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

#include "rsd/corpus.hpp"

#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "rsd/error.hpp"

namespace rsd {

using nlohmann::json;

EntityProfile KnowledgeRecord::profile() const {
  EntityProfile p;
  p.entity_id = entity_id;
  p.kind = kind;
  p.embedding = embedding;
  p.attributes = attributes;
  p.interaction_count = interaction_count;
  p.old_knowledge = old_knowledge;
  return p;
}

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields{"entity_id",  "kind",         "attributes",
                                            "interaction_count", "embedding", "prompt",
                                            "old_prompt", "old_knowledge", "new_knowledge"};
  return fields;
}

TokenSeq parse_tokens(const json& j, const char* field, std::size_t vocab_size) {
  if (!j.is_array()) throw_data(std::string("field '") + field + "' must be an array of token ids");
  TokenSeq out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw_data(std::string("field '") + field + "' holds a non-integer");
    const auto t = v.get<long long>();
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
      throw_data(std::string("field '") + field + "' token " + std::to_string(t) +
                 " outside vocabulary of size " + std::to_string(vocab_size));
    }
    out.push_back(static_cast<TokenId>(t));
  }
  return out;
}

KnowledgeRecord parse_record(const json& j, std::size_t vocab_size, std::vector<std::string>& warnings,
                             std::size_t lineno) {
  if (!j.is_object()) throw_data("record must be a JSON object");
  KnowledgeRecord r;
  r.entity_id = j.at("entity_id").is_string() ? j.at("entity_id").get<std::string>()
                                                : j.at("entity_id").dump();
  r.kind = parse_entity_kind(j.value("kind", std::string("user")));
  if (const auto it = j.find("attributes"); it != j.end()) {
    for (const auto& pair : *it) {
      if (!pair.is_array() || pair.size() != 2) throw_data("attributes must be [name, value] pairs");
      r.attributes.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
  }
  r.interaction_count = j.value("interaction_count", std::uint64_t{0});
  if (const auto it = j.find("embedding"); it != j.end() && !it->is_null()) {
    r.embedding = it->get<std::vector<double>>();
  }
  r.prompt = parse_tokens(j.at("prompt"), "prompt", vocab_size);
  if (const auto it = j.find("old_prompt"); it != j.end() && !it->is_null()) {
    r.old_prompt = parse_tokens(*it, "old_prompt", vocab_size);
  }
  if (const auto it = j.find("old_knowledge"); it != j.end()) {
    if (!it->is_array()) throw_data("old_knowledge must be an array");
    // Accept either one token array or a list of them.
    if (!it->empty() && it->front().is_number()) {
      r.old_knowledge.push_back(parse_tokens(*it, "old_knowledge", vocab_size));
    } else {
      for (const auto& text : *it) r.old_knowledge.push_back(parse_tokens(text, "old_knowledge", vocab_size));
    }
  }
  if (const auto it = j.find("new_knowledge"); it != j.end() && !it->is_null()) {
    r.new_knowledge = parse_tokens(*it, "new_knowledge", vocab_size);
  }
  for (const auto& [key, value] : j.items()) {
    if (!known_fields().count(key)) {
      warnings.push_back("line " + std::to_string(lineno) + ": ignoring unknown field '" + key + "'");
    }
  }
  return r;
}

json record_to_json(const KnowledgeRecord& r) {
  json j;
  j["entity_id"] = r.entity_id;
  j["kind"] = std::string(to_string(r.kind));
  json attrs = json::array();
  for (const auto& [k, v] : r.attributes) attrs.push_back({k, v});
  j["attributes"] = attrs;
  j["interaction_count"] = r.interaction_count;
  j["embedding"] = r.embedding ? json(*r.embedding) : json(nullptr);
  j["prompt"] = r.prompt;
  if (r.old_prompt) j["old_prompt"] = *r.old_prompt;
  j["old_knowledge"] = r.old_knowledge;
  if (r.new_knowledge) j["new_knowledge"] = *r.new_knowledge;
  return j;
}

}  // namespace

CorpusReadResult read_corpus(const std::filesystem::path& path, std::size_t vocab_size) {
  std::ifstream in(path);
  if (!in) throw_config("cannot read corpus " + path.string());
  CorpusReadResult out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(parse_record(json::parse(line), vocab_size, out.warnings, lineno));
    } catch (const Error& e) {
      throw_data(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
      throw_data(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<KnowledgeRecord>& records) {
  std::ofstream out(path);
  if (!out) throw_io("cannot open " + path.string() + " for writing");
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  if (!out) throw_io("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic corpus

void SynthSpec::validate() const {
  if (records == 0 || groups == 0 || subcategories == 0) throw_config("synth: records, groups and subcategories must be > 0");
  if (items_per_group == 0 || templates_per_group == 0 || segments_per_text == 0) {
    throw_config("synth: items_per_group, templates_per_group and segments_per_text must be > 0");
  }
  if (personal_rate + shared_template_rate > 1.0) {
    throw_config("synth: personal_rate + shared_template_rate must not exceed 1");
  }
  if (templates_per_group < segments_per_text) {
    throw_config("synth: templates_per_group must be >= segments_per_text (one bank slice per position)");
  }
  if (segment_len_min == 0 || segment_len_min > segment_len_max) throw_config("synth: need 0 < segment_len_min <= segment_len_max");
  for (double r : {overlap_rate, shared_template_rate, personal_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw_config("synth: overlap_rate, shared_template_rate and personal_rate must lie in [0, 1]");
  }
  if (!(2 * history_keep > history_len && history_keep < history_len)) {
    throw_config("synth: need history_len/2 < history_keep < history_len");
  }
  if (!(user_fraction >= 0.0 && user_fraction <= 1.0) || !(cold_start_fraction >= 0.0 && cold_start_fraction <= 1.0)) {
    throw_config("synth: fractions must lie in [0, 1]");
  }
  if (embedding_dim == 0) throw_config("synth: embedding_dim must be > 0");
  const std::size_t reserved = 2 + groups * items_per_group;
  if (vocab_size < reserved + 2 * segment_len_max) {
    throw_config("synth: vocab_size " + std::to_string(vocab_size) + " too small for the requested layout");
  }
  if (eos < 0 || eos > 1) throw_config("synth: eos must be 0 or 1 (reserved ids)");
}

std::vector<KnowledgeRecord> generate_synthetic_corpus(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng](std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const TokenId marker = spec.eos == 0 ? 1 : 0;
  const std::size_t item_base = 2;
  const std::size_t template_base = item_base + spec.groups * spec.items_per_group;
  const std::size_t rest = spec.vocab_size - template_base;
  const std::size_t fresh_base = template_base + rest / 2;
  const std::size_t template_hi = fresh_base - 1;
  const std::size_t fresh_hi = spec.vocab_size - 1;

  auto segment = [&](std::size_t lo, std::size_t hi) {
    TokenSeq s(uniform(spec.segment_len_min, spec.segment_len_max));
    for (auto& t : s) t = static_cast<TokenId>(uniform(lo, hi));
    return s;
  };

  const std::size_t per_position = spec.templates_per_group / spec.segments_per_text;
  // banks[groups] is the bank shared by every group.
  std::vector<std::vector<TokenSeq>> banks(spec.groups + 1);
  for (std::size_t t = 0; t < spec.templates_per_group; ++t) banks[spec.groups].push_back(segment(template_base, template_hi));
  std::vector<std::vector<double>> centers(spec.groups);
  for (std::size_t g = 0; g < spec.groups; ++g) {
    for (std::size_t t = 0; t < spec.templates_per_group; ++t) banks[g].push_back(segment(template_base, template_hi));
    centers[g].resize(spec.embedding_dim);
    for (auto& c : centers[g]) c = normal(rng) * spec.embedding_spread;
  }

  std::vector<KnowledgeRecord> out;
  out.reserve(spec.records);
  for (std::size_t r = 0; r < spec.records; ++r) {
    const std::size_t g = r % spec.groups;
    KnowledgeRecord rec;
    rec.entity_id = "e" + std::to_string(r);
    rec.kind = unit(rng) < spec.user_fraction ? EntityKind::kUser : EntityKind::kItem;
    rec.attributes = {{"category", "c" + std::to_string(g)},
                      {"subcategory", "c" + std::to_string(g) + "s" + std::to_string(uniform(0, spec.subcategories - 1))}};
    const bool cold = unit(rng) < spec.cold_start_fraction;
    rec.interaction_count = cold ? uniform(0, 9) : uniform(10, 500);
    if (!cold) {
      std::vector<double> e(spec.embedding_dim);
      for (std::size_t d = 0; d < e.size(); ++d) e[d] = centers[g][d] + normal(rng) * spec.embedding_noise;
      rec.embedding = std::move(e);
    }

    std::vector<TokenId> history(spec.history_len);
    for (auto& h : history) {
      h = static_cast<TokenId>(item_base + g * spec.items_per_group + uniform(0, spec.items_per_group - 1));
    }
    auto [old_hist, new_hist] = simulate_streaming_split(history, spec.history_keep);
    TokenSeq old_prompt{marker};
    old_prompt.insert(old_prompt.end(), old_hist.begin(), old_hist.end());
    rec.prompt = {marker};
    rec.prompt.insert(rec.prompt.end(), new_hist.begin(), new_hist.end());
    rec.old_prompt = std::move(old_prompt);

    TokenSeq old_text, new_text;
    for (std::size_t s = 0; s < spec.segments_per_text; ++s) {
      // Each text position draws from its own slice of the bank, so a
      // segment's ending context is followed by the next position only.
      const std::size_t slot = s * per_position + uniform(0, per_position - 1);
      const double kind = unit(rng);
      const TokenSeq seg = kind < spec.personal_rate ? segment(fresh_base, fresh_hi)
                           : kind < spec.personal_rate + spec.shared_template_rate ? banks[spec.groups][slot]
                                                                                  : banks[g][slot];
      old_text.insert(old_text.end(), seg.begin(), seg.end());
      if (unit(rng) < spec.overlap_rate) {
        new_text.insert(new_text.end(), seg.begin(), seg.end());
      } else {
        const auto fresh = segment(fresh_base, fresh_hi);
        new_text.insert(new_text.end(), fresh.begin(), fresh.end());
      }
    }
    rec.old_knowledge.push_back(std::move(old_text));
    rec.new_knowledge = std::move(new_text);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<TokenSeq> model_training_corpus(const std::vector<KnowledgeRecord>& records, TokenId eos) {
  std::vector<TokenSeq> out;
  auto emit = [&](const TokenSeq& prompt, const TokenSeq& text) {
    TokenSeq seq = prompt;
    seq.insert(seq.end(), text.begin(), text.end());
    seq.push_back(eos);
    out.push_back(std::move(seq));
  };
  for (const auto& r : records) {
    const TokenSeq& old_prompt = r.old_prompt ? *r.old_prompt : r.prompt;
    for (const auto& text : r.old_knowledge) emit(old_prompt, text);
    if (r.new_knowledge) emit(r.prompt, *r.new_knowledge);
  }
  return out;
}

}  // namespace rsd
