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

#include "rsd.h"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include <json.hpp>

#include "rsd/corpus.hpp"
#include "rsd/decoder.hpp"
#include "rsd/error.hpp"
#include "rsd/experiment.hpp"
#include "rsd/ngram_model.hpp"
#include "rsd/trie.hpp"

struct rsd_model {
  rsd::NGramModel impl;
};

struct rsd_pool {
  rsd::TriePool impl;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

struct BufferTooSmall {};

rsd_status status_of(rsd::ErrorKind kind) {
  switch (kind) {
    case rsd::ErrorKind::kInput: return RSD_ERR_INVALID_ARGUMENT;
    case rsd::ErrorKind::kStructure: return RSD_ERR_STRUCTURE;
    case rsd::ErrorKind::kConfig: return RSD_ERR_CONFIG;
    case rsd::ErrorKind::kData: return RSD_ERR_DATA;
    case rsd::ErrorKind::kIo: return RSD_ERR_IO;
  }
  return RSD_ERR_INTERNAL;
}

template <typename F>
rsd_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return RSD_OK;
  } catch (const BufferTooSmall&) {
    g_last_error = "output buffer too small";
    return RSD_ERR_BUFFER_TOO_SMALL;
  } catch (const rsd::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return RSD_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RSD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RSD_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) rsd::throw_input(what);
}

rsd::ExperimentConfig parse_config(const char* config_json) {
  if (config_json == nullptr || *config_json == '\0') {
    rsd::ExperimentConfig c;
    c.validate();
    return c;
  }
  json j;
  try {
    j = json::parse(config_json);
  } catch (const json::exception& e) {
    rsd::throw_config(std::string("config is not valid JSON: ") + e.what());
  }
  return rsd::ExperimentConfig::from_json(j);
}

rsd::TokenSpan span_of(const int32_t* p, size_t n) { return {p, n}; }

rsd::SpeculativeOptions to_options(const rsd_decode_options& o) {
  rsd::SpeculativeOptions s;
  switch (o.policy) {
    case RSD_POLICY_GREEDY: s.policy.mode = rsd::VerifyMode::kGreedy; break;
    case RSD_POLICY_TOPK: s.policy.mode = rsd::VerifyMode::kTopK; break;
    case RSD_POLICY_TOPP: s.policy.mode = rsd::VerifyMode::kTopP; break;
    case RSD_POLICY_RELAXED: s.policy.mode = rsd::VerifyMode::kRelaxed; break;
    default: rsd::throw_input("unknown policy mode");
  }
  s.policy.k = o.k;
  s.policy.p = o.p;
  s.draft.max_draft_tokens = o.draft_max;
  s.draft.prefix_max = o.prefix_max;
  s.draft.prefix_min = o.prefix_min;
  s.draft.backoff_retry_fraction = o.backoff_retry_fraction;
  s.overlay_depth = o.overlay_depth;
  s.limits = {o.max_new_tokens, o.eos};
  return s;
}

json report_json(const rsd::DecodeReport& r, const rsd::DecodeCounters& c) {
  return {{"tokens_generated", r.tokens_generated},
          {"model_calls", r.model_calls},
          {"fallback_steps", c.fallback_steps},
          {"accepted_draft_tokens", c.accepted_draft_tokens},
          {"aal", r.aal},
          {"tokens_per_step", r.tokens_per_step},
          {"art_seconds", r.art_seconds},
          {"gen_speed_tokens_per_second", r.gen_speed_tokens_per_second},
          {"speedup_vs_autoregressive", r.speedup_vs_autoregressive},
          {"wall_seconds", r.wall_seconds},
          {"degenerate", r.degenerate}};
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) rsd::throw_io("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) rsd::throw_io("failed writing " + path.string());
}

std::string pool_file_name(const std::string& group_id) {
  std::string name;
  for (char ch : group_id) name += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-') ? ch : '_';
  return name + ".trie";
}

}  // namespace

extern "C" {

const char* rsd_version(void) { return "1.0.0"; }

const char* rsd_last_error(void) { return g_last_error.c_str(); }

const char* rsd_status_name(rsd_status status) {
  switch (status) {
    case RSD_OK: return "ok";
    case RSD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RSD_ERR_CONFIG: return "configuration error";
    case RSD_ERR_DATA: return "data error";
    case RSD_ERR_IO: return "i/o error";
    case RSD_ERR_STRUCTURE: return "structural error";
    case RSD_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case RSD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- model -----------------------------------------------------------------

rsd_status rsd_model_fit(const int32_t* tokens, const size_t* lengths, size_t n_sequences, uint32_t order,
                         double alpha, uint32_t vocab_size, rsd_model** out) {
  return guarded([&] {
    require(out != nullptr, "out handle is null");
    require(n_sequences == 0 || (tokens != nullptr && lengths != nullptr), "null corpus buffers");
    std::vector<rsd::TokenSeq> corpus;
    corpus.reserve(n_sequences);
    size_t offset = 0;
    for (size_t i = 0; i < n_sequences; ++i) {
      corpus.emplace_back(tokens + offset, tokens + offset + lengths[i]);
      offset += lengths[i];
    }
    *out = new rsd_model{rsd::NGramModel::fit(corpus, {order, alpha, vocab_size})};
  });
}

rsd_status rsd_model_fit_file(const char* path, uint32_t order, double alpha, uint32_t vocab_size,
                              rsd_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new rsd_model{rsd::NGramModel::fit(rsd::read_token_sequences(path), {order, alpha, vocab_size})};
  });
}

rsd_status rsd_model_save(const rsd_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    model->impl.save(path);
  });
}

rsd_status rsd_model_load(const char* path, rsd_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new rsd_model{rsd::NGramModel::load(path)};
  });
}

void rsd_model_free(rsd_model* model) { delete model; }

size_t rsd_model_vocab_size(const rsd_model* model) { return model != nullptr ? model->impl.vocab_size() : 0; }

rsd_status rsd_model_next_distribution(const rsd_model* model, const int32_t* context, size_t n, double* probs,
                                       size_t probs_len) {
  return guarded([&] {
    require(model != nullptr && probs != nullptr, "null argument");
    require(n == 0 || context != nullptr, "null context");
    if (probs_len < model->impl.vocab_size()) rsd::throw_input("probability buffer shorter than vocabulary");
    const auto d = model->impl.next_distribution(span_of(context, n));
    const auto dense = d.dense();
    std::memcpy(probs, dense.data(), dense.size() * sizeof(double));
  });
}

// ---- pools -----------------------------------------------------------------

rsd_status rsd_pool_create(const char* group_id, uint32_t vocab_size, uint32_t max_branch_depth, rsd_pool** out) {
  return guarded([&] {
    require(out != nullptr, "out handle is null");
    *out = new rsd_pool{rsd::TriePool(group_id != nullptr ? group_id : "", vocab_size, max_branch_depth)};
  });
}

rsd_status rsd_pool_insert_text(rsd_pool* pool, const int32_t* tokens, size_t n) {
  return guarded([&] {
    require(pool != nullptr && (n == 0 || tokens != nullptr), "null argument");
    pool->impl.insert_text(span_of(tokens, n));
  });
}

rsd_status rsd_pool_insert_sequence(rsd_pool* pool, const int32_t* tokens, size_t n) {
  return guarded([&] {
    require(pool != nullptr && (n == 0 || tokens != nullptr), "null argument");
    pool->impl.insert(span_of(tokens, n));
  });
}

rsd_status rsd_pool_save(const rsd_pool* pool, const char* path) {
  return guarded([&] {
    require(pool != nullptr && path != nullptr, "null argument");
    pool->impl.save(path);
  });
}

rsd_status rsd_pool_load(const char* path, rsd_pool** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new rsd_pool{rsd::TriePool::load(path)};
  });
}

void rsd_pool_free(rsd_pool* pool) { delete pool; }

uint64_t rsd_pool_entries(const rsd_pool* pool) { return pool != nullptr ? pool->impl.size_entries() : 0; }

uint64_t rsd_pool_nodes(const rsd_pool* pool) { return pool != nullptr ? pool->impl.trie().node_count() : 0; }

rsd_status rsd_pool_retrieve(const rsd_pool* pool, const int32_t* prefix, size_t prefix_len, uint32_t max_tokens,
                             int32_t* tokens, uint64_t* frequencies, uint32_t* depths, size_t capacity,
                             size_t* out_len) {
  return guarded([&] {
    require(pool != nullptr && prefix != nullptr && out_len != nullptr, "null argument");
    const auto tree = rsd::retrieve_subtree(&pool->impl, nullptr, span_of(prefix, prefix_len), max_tokens);
    *out_len = tree.size();
    if (capacity < tree.size()) {
      throw BufferTooSmall{};
    }
    // DFS order, matching the linearized pseudo-sequence.
    size_t k = 0;
    std::vector<std::pair<size_t, size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& kids = tree.node(node).children;
      if (next < kids.size()) {
        const size_t c = kids[next++];
        const auto& n = tree.node(c);
        if (tokens) tokens[k] = n.token;
        if (frequencies) frequencies[k] = n.frequency;
        if (depths) depths[k] = static_cast<uint32_t>(n.depth);
        ++k;
        stack.emplace_back(c, 0);
      } else {
        stack.pop_back();
      }
    }
  });
}

// ---- decoding --------------------------------------------------------------

void rsd_decode_options_init(rsd_decode_options* o) {
  if (o == nullptr) return;
  const rsd::SpeculativeOptions d;
  o->speculative = 1;
  o->policy = RSD_POLICY_GREEDY;
  o->k = static_cast<uint32_t>(d.policy.k);
  o->p = d.policy.p;
  o->draft_max = static_cast<uint32_t>(d.draft.max_draft_tokens);
  o->prefix_max = static_cast<uint32_t>(d.draft.prefix_max);
  o->prefix_min = static_cast<uint32_t>(d.draft.prefix_min);
  o->backoff_retry_fraction = d.draft.backoff_retry_fraction;
  o->overlay_depth = static_cast<uint32_t>(d.overlay_depth);
  o->max_new_tokens = static_cast<uint32_t>(d.limits.max_new_tokens);
  o->eos = d.limits.eos;
}

rsd_status rsd_decode(const rsd_model* model, const rsd_pool* pool, const int32_t* prompt, size_t prompt_len,
                      const rsd_decode_options* options, int32_t* out_tokens, size_t capacity, size_t* out_len,
                      rsd_decode_stats* stats) {
  return guarded([&] {
    require(model != nullptr && prompt != nullptr && options != nullptr && out_len != nullptr, "null argument");
    const auto opts = to_options(*options);
    const auto res = options->speculative
                         ? rsd::decode_speculative(model->impl, pool ? &pool->impl : nullptr,
                                                   span_of(prompt, prompt_len), opts)
                         : rsd::decode_autoregressive(model->impl, span_of(prompt, prompt_len), opts.limits);
    *out_len = res.tokens.size();
    if (stats != nullptr) {
      const auto r = rsd::compute_metrics(res.counters, 0.0);
      *stats = {res.counters.tokens_generated, res.counters.model_calls, res.counters.fallback_steps,
                res.counters.accepted_draft_tokens, r.aal, res.counters.retrieval_seconds,
                res.counters.wall_seconds, r.gen_speed_tokens_per_second};
    }
    if (capacity < res.tokens.size() || (!res.tokens.empty() && out_tokens == nullptr)) throw BufferTooSmall{};
    std::copy(res.tokens.begin(), res.tokens.end(), out_tokens);
  });
}

// ---- harness ---------------------------------------------------------------

rsd_status rsd_synth(const char* config_json, const char* out_path) {
  return guarded([&] {
    require(out_path != nullptr, "null output path");
    auto config = parse_config(config_json);
    config.corpus.reset();
    config.synth.validate();
    rsd::write_corpus(out_path, rsd::load_or_synthesize(config, config.seeds.front()));
  });
}

rsd_status rsd_build_pools(const char* config_json, const char* corpus_path, const char* out_dir) {
  return guarded([&] {
    require(out_dir != nullptr, "null output directory");
    auto config = parse_config(config_json);
    if (corpus_path != nullptr) config.corpus = corpus_path;
    const auto seed = config.seeds.front();
    const auto records = rsd::load_or_synthesize(config, seed);
    const auto scheme = config.schemes.front();
    const auto cap = config.pool_size_grid.front();

    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) rsd::throw_io("cannot create " + dir.string() + ": " + ec.message());

    const auto model = rsd::fit_reference_model(config, records);
    model.save(dir / "model.bin");
    const auto set = rsd::build_scheme_pools(config, records, scheme, cap, seed);

    json pools = json::object();
    for (const auto& [group, pool] : set.pools) {
      const auto file = pool_file_name(group);
      pool.save(dir / file);
      pools[group] = {{"file", file}, {"entries", pool.size_entries()}, {"nodes", pool.trie().node_count()}};
    }
    json assignment = json::object();
    for (const auto& [entity, label] : set.assignment) {
      assignment[entity] = {{"scheme", std::string(rsd::to_string(label.scheme))}, {"group", label.group_id}};
    }
    write_json(dir / "manifest.json", {{"schema_version", 1},
                                       {"model", "model.bin"},
                                       {"scheme", std::string(rsd::to_string(scheme))},
                                       {"pools", pools},
                                       {"assignment", assignment},
                                       {"config", config.to_json()}});
  });
}

rsd_status rsd_decode_corpus(const char* config_json, const char* pools_dir, const char* corpus_path,
                             const char* out_path) {
  return guarded([&] {
    require(pools_dir != nullptr && corpus_path != nullptr && out_path != nullptr, "null argument");
    const auto config = parse_config(config_json);
    const std::filesystem::path dir(pools_dir);
    std::ifstream mf(dir / "manifest.json");
    if (!mf) rsd::throw_config("cannot read " + (dir / "manifest.json").string());
    json manifest;
    try {
      manifest = json::parse(mf);
    } catch (const json::exception& e) {
      rsd::throw_data("manifest.json: " + std::string(e.what()));
    }
    const auto model = rsd::NGramModel::load(dir / manifest.at("model").get<std::string>());
    std::map<std::string, rsd::TriePool> pools;
    for (const auto& [group, info] : manifest.at("pools").items()) {
      pools.emplace(group, rsd::TriePool::load(dir / info.at("file").get<std::string>()));
    }
    auto corpus = rsd::read_corpus(corpus_path, model.vocab_size());
    const auto& assignment = manifest.at("assignment");

    json records = json::array();
    rsd::DecodeCounters total{};
    total.knowledge_texts = 0;
    const size_t n = std::min(config.eval_records, corpus.records.size());
    for (size_t i = 0; i < n; ++i) {
      const auto& rec = corpus.records[i];
      const rsd::TriePool* pool = nullptr;
      std::string group;
      if (const auto it = assignment.find(rec.entity_id); it != assignment.end()) {
        group = it->at("group").get<std::string>();
        if (const auto p = pools.find(group); p != pools.end()) pool = &p->second;
      }
      rsd::SpeculativeOptions opts;
      opts.policy = config.policies.front();
      opts.draft = config.draft;
      opts.limits = {config.max_new_tokens, config.eos};
      opts.overlay_depth = config.max_branch_depth;
      opts.session_id = rec.entity_id;
      const auto res = rsd::decode_speculative(model, pool, rec.prompt, opts);
      total += res.counters;
      records.push_back({{"entity_id", rec.entity_id},
                         {"group", group.empty() ? json(nullptr) : json(group)},
                         {"tokens", res.tokens},
                         {"report", report_json(rsd::compute_metrics(res.counters, 0.0), res.counters)}});
    }
    write_json(out_path, {{"schema_version", 1},
                          {"config", config.to_json()},
                          {"records", records},
                          {"summary", report_json(rsd::compute_metrics(total, 0.0), total)},
                          {"warnings", corpus.warnings}});
  });
}

rsd_status rsd_run_experiment(const char* config_json, const char* report_path) {
  return guarded([&] {
    require(report_path != nullptr, "null report path");
    const auto config = parse_config(config_json);
    write_json(report_path, rsd::run_experiment(config));
  });
}

}  // extern "C"
