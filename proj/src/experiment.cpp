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

#include "rsd/experiment.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>

#include "rsd/error.hpp"

namespace rsd {

using nlohmann::json;

std::string_view to_string(PoolSchemeChoice scheme) {
  switch (scheme) {
    case PoolSchemeChoice::kGlobal: return "global";
    case PoolSchemeChoice::kCustomized: return "customized";
    case PoolSchemeChoice::kRandom: return "random";
  }
  return "?";
}

PoolSchemeChoice parse_pool_scheme(std::string_view name) {
  if (name == "global") return PoolSchemeChoice::kGlobal;
  if (name == "customized") return PoolSchemeChoice::kCustomized;
  if (name == "random") return PoolSchemeChoice::kRandom;
  throw_config("unknown pool scheme '" + std::string(name) + "'");
}

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw_config(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw_config("unknown config field '" + where + (where.empty() ? "" : ".") + key + "'");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& dst, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception& e) {
    throw_config("config field '" + where + key + "': " + e.what());
  }
}

json policy_json(const VerificationPolicy& p) {
  return {{"mode", std::string(to_string(p.mode))}, {"k", p.k}, {"p", p.p}};
}

VerificationPolicy parse_policy(const json& j) {
  VerificationPolicy p;
  if (j.is_string()) {
    p.mode = parse_verify_mode(j.get<std::string>());
    return p;
  }
  reject_unknown(j, "policies[]", {"mode", "k", "p"});
  std::string mode = "greedy";
  read_field(j, "mode", mode, "policies[].");
  p.mode = parse_verify_mode(mode);
  read_field(j, "k", p.k, "policies[].");
  read_field(j, "p", p.p, "policies[].");
  return p;
}

std::string variant_label(PoolSchemeChoice scheme, const VerificationPolicy& policy) {
  std::string base = scheme == PoolSchemeChoice::kGlobal ? "GRP" : scheme == PoolSchemeChoice::kRandom ? "RRP" : "CRP";
  switch (policy.mode) {
    case VerifyMode::kGreedy: return base;
    case VerifyMode::kRelaxed: return "RV+" + base;
    case VerifyMode::kTopK: return "TopK+" + base;
    case VerifyMode::kTopP: return "TopP+" + base;
  }
  return base;
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  return s;
}

// Per-seed aggregate over the evaluation records.
struct RunStats {
  DecodeCounters totals{};
  std::vector<TokenSeq> streams;
  double mean_gen_speed = 0.0;
  double mean_aal = 0.0;
  double mean_art = 0.0;
  double mean_calls_per_token = 0.0;
  double mean_tokens_per_step = 0.0;
};

void finish(RunStats& s, const std::vector<DecodeReport>& reports,
            const std::vector<DecodeCounters>& counters) {
  const double n = static_cast<double>(std::max<std::size_t>(reports.size(), 1));
  for (std::size_t i = 0; i < reports.size(); ++i) {
    s.mean_gen_speed += reports[i].gen_speed_tokens_per_second / n;
    s.mean_aal += reports[i].aal / n;
    s.mean_art += reports[i].art_seconds / n;
    s.mean_tokens_per_step += reports[i].tokens_per_step / n;
    const auto& c = counters[i];
    if (c.tokens_generated > 0) {
      s.mean_calls_per_token += static_cast<double>(c.model_calls) / static_cast<double>(c.tokens_generated) / n;
    }
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j, "", {"corpus", "synth", "vocab_size", "eos", "ngram", "schemes", "router", "collaborative_groups",
                         "kmeans", "attribute_size_threshold", "pool_size_grid", "max_branch_depth", "draft",
                         "policies", "max_new_tokens", "seeds", "eval_records"});
  ExperimentConfig c;
  if (const auto it = j.find("corpus"); it != j.end() && !it->is_null()) c.corpus = it->get<std::string>();
  read_field(j, "vocab_size", c.vocab_size, "");
  read_field(j, "eos", c.eos, "");
  c.synth.vocab_size = c.vocab_size;
  c.synth.eos = c.eos;
  if (const auto it = j.find("synth"); it != j.end()) {
    reject_unknown(*it, "synth", {"records", "groups", "subcategories", "items_per_group", "templates_per_group",
                                  "segments_per_text", "segment_len_min", "segment_len_max", "overlap_rate",
                                  "shared_template_rate", "personal_rate",
                                  "history_len", "history_keep", "user_fraction", "cold_start_fraction",
                                  "embedding_dim", "embedding_spread", "embedding_noise"});
    auto& s = c.synth;
    const std::string w = "synth.";
    read_field(*it, "records", s.records, w);
    read_field(*it, "groups", s.groups, w);
    read_field(*it, "subcategories", s.subcategories, w);
    read_field(*it, "items_per_group", s.items_per_group, w);
    read_field(*it, "templates_per_group", s.templates_per_group, w);
    read_field(*it, "segments_per_text", s.segments_per_text, w);
    read_field(*it, "segment_len_min", s.segment_len_min, w);
    read_field(*it, "segment_len_max", s.segment_len_max, w);
    read_field(*it, "overlap_rate", s.overlap_rate, w);
    read_field(*it, "shared_template_rate", s.shared_template_rate, w);
    read_field(*it, "personal_rate", s.personal_rate, w);
    read_field(*it, "history_len", s.history_len, w);
    read_field(*it, "history_keep", s.history_keep, w);
    read_field(*it, "user_fraction", s.user_fraction, w);
    read_field(*it, "cold_start_fraction", s.cold_start_fraction, w);
    read_field(*it, "embedding_dim", s.embedding_dim, w);
    read_field(*it, "embedding_spread", s.embedding_spread, w);
    read_field(*it, "embedding_noise", s.embedding_noise, w);
  }
  if (const auto it = j.find("ngram"); it != j.end()) {
    reject_unknown(*it, "ngram", {"order", "alpha"});
    read_field(*it, "order", c.ngram_order, "ngram.");
    read_field(*it, "alpha", c.ngram_alpha, "ngram.");
  }
  if (const auto it = j.find("schemes"); it != j.end()) {
    c.schemes.clear();
    for (const auto& s : *it) c.schemes.push_back(parse_pool_scheme(s.get<std::string>()));
  }
  if (const auto it = j.find("router"); it != j.end()) {
    reject_unknown(*it, "router", {"strategy", "interaction_threshold"});
    std::string strategy(to_string(c.grouping.strategy));
    read_field(*it, "strategy", strategy, "router.");
    c.grouping.strategy = parse_router_strategy(strategy);
    read_field(*it, "interaction_threshold", c.grouping.interaction_threshold, "router.");
  }
  read_field(j, "collaborative_groups", c.grouping.kmeans.num_groups, "");
  if (const auto it = j.find("kmeans"); it != j.end()) {
    reject_unknown(*it, "kmeans", {"max_iters", "tol"});
    read_field(*it, "max_iters", c.grouping.kmeans.max_iters, "kmeans.");
    read_field(*it, "tol", c.grouping.kmeans.tol, "kmeans.");
  }
  read_field(j, "attribute_size_threshold", c.grouping.attribute_size_threshold, "");
  if (const auto it = j.find("pool_size_grid"); it != j.end()) {
    c.pool_size_grid.clear();
    for (const auto& v : *it) {
      if (v.is_null()) {
        c.pool_size_grid.emplace_back(std::nullopt);
      } else if (v.is_number_integer() && v.get<long long>() >= 0) {
        c.pool_size_grid.emplace_back(v.get<std::size_t>());
      } else {
        throw_config("pool_size_grid entries must be non-negative integers or null");
      }
    }
  }
  read_field(j, "max_branch_depth", c.max_branch_depth, "");
  if (const auto it = j.find("draft"); it != j.end()) {
    reject_unknown(*it, "draft", {"max_draft_tokens", "prefix_max", "prefix_min", "backoff_retry_fraction"});
    read_field(*it, "max_draft_tokens", c.draft.max_draft_tokens, "draft.");
    read_field(*it, "prefix_max", c.draft.prefix_max, "draft.");
    read_field(*it, "prefix_min", c.draft.prefix_min, "draft.");
    read_field(*it, "backoff_retry_fraction", c.draft.backoff_retry_fraction, "draft.");
  }
  if (const auto it = j.find("policies"); it != j.end()) {
    if (!it->is_array()) throw_config("policies must be an array");
    c.policies.clear();
    for (const auto& p : *it) c.policies.push_back(parse_policy(p));
  }
  read_field(j, "max_new_tokens", c.max_new_tokens, "");
  if (const auto it = j.find("seeds"); it != j.end()) {
    c.seeds.clear();
    for (const auto& s : *it) {
      if (!s.is_number_integer()) throw_config("seeds must be integers");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  read_field(j, "eval_records", c.eval_records, "");
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw_config("schemes grid is empty");
  if (pool_size_grid.empty()) throw_config("pool_size_grid is empty");
  if (policies.empty()) throw_config("policies grid is empty");
  if (seeds.empty()) throw_config("seeds must be given explicitly");
  if (vocab_size < 4) throw_config("vocab_size too small");
  if (eos < 0 || static_cast<std::size_t>(eos) >= vocab_size) throw_config("eos outside vocabulary");
  if (ngram_order < 1) throw_config("ngram.order must be >= 1");
  if (!(ngram_alpha > 0.0)) throw_config("ngram.alpha must be > 0");
  if (max_branch_depth < 1) throw_config("max_branch_depth must be >= 1");
  if (eval_records < 1) throw_config("eval_records must be >= 1");
  if (grouping.kmeans.num_groups < 1) throw_config("collaborative_groups must be >= 1");
  try {
    draft.validate();
    for (const auto& p : policies) p.validate();
  } catch (const Error& e) {
    throw_config(e.what());
  }
  if (!corpus) synth.validate();
}

json ExperimentConfig::to_json() const {
  json pools = json::array();
  for (const auto& cap : pool_size_grid) pools.push_back(cap ? json(*cap) : json(nullptr));
  json schemes_j = json::array();
  for (auto s : schemes) schemes_j.push_back(std::string(to_string(s)));
  json policies_j = json::array();
  for (const auto& p : policies) policies_j.push_back(policy_json(p));
  return {
      {"corpus", corpus ? json(corpus->string()) : json(nullptr)},
      {"synth",
       {{"records", synth.records},
        {"groups", synth.groups},
        {"subcategories", synth.subcategories},
        {"items_per_group", synth.items_per_group},
        {"templates_per_group", synth.templates_per_group},
        {"segments_per_text", synth.segments_per_text},
        {"segment_len_min", synth.segment_len_min},
        {"segment_len_max", synth.segment_len_max},
        {"overlap_rate", synth.overlap_rate},
        {"shared_template_rate", synth.shared_template_rate},
        {"personal_rate", synth.personal_rate},
        {"history_len", synth.history_len},
        {"history_keep", synth.history_keep},
        {"user_fraction", synth.user_fraction},
        {"cold_start_fraction", synth.cold_start_fraction},
        {"embedding_dim", synth.embedding_dim},
        {"embedding_spread", synth.embedding_spread},
        {"embedding_noise", synth.embedding_noise}}},
      {"vocab_size", vocab_size},
      {"eos", eos},
      {"ngram", {{"order", ngram_order}, {"alpha", ngram_alpha}}},
      {"schemes", schemes_j},
      {"router",
       {{"strategy", std::string(to_string(grouping.strategy))},
        {"interaction_threshold", grouping.interaction_threshold}}},
      {"collaborative_groups", grouping.kmeans.num_groups},
      {"kmeans", {{"max_iters", grouping.kmeans.max_iters}, {"tol", grouping.kmeans.tol}}},
      {"attribute_size_threshold", grouping.attribute_size_threshold},
      {"pool_size_grid", pools},
      {"max_branch_depth", max_branch_depth},
      {"draft",
       {{"max_draft_tokens", draft.max_draft_tokens},
        {"prefix_max", draft.prefix_max},
        {"prefix_min", draft.prefix_min},
        {"backoff_retry_fraction", draft.backoff_retry_fraction}}},
      {"policies", policies_j},
      {"max_new_tokens", max_new_tokens},
      {"seeds", seeds},
      {"eval_records", eval_records},
  };
}

std::vector<KnowledgeRecord> load_or_synthesize(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.corpus) {
    auto result = read_corpus(*config.corpus, config.vocab_size);
    for (const auto& w : result.warnings) std::clog << "warning: " << w << '\n';
    if (result.records.empty()) throw_data("corpus " + config.corpus->string() + " holds no records");
    return std::move(result.records);
  }
  SynthSpec spec = config.synth;
  spec.vocab_size = config.vocab_size;
  spec.eos = config.eos;
  spec.seed = seed;
  return generate_synthetic_corpus(spec);
}

std::size_t count_groups(const GroupAssignment& assignment) {
  std::set<std::string> groups;
  for (const auto& [id, label] : assignment) groups.insert(label.group_id);
  return groups.size();
}

PoolSet build_scheme_pools(const ExperimentConfig& config, const std::vector<KnowledgeRecord>& records,
                           PoolSchemeChoice scheme, std::optional<std::size_t> pool_cap, std::uint64_t seed) {
  std::vector<EntityProfile> profiles;
  profiles.reserve(records.size());
  for (const auto& r : records) profiles.push_back(r.profile());

  auto grouping = config.grouping;
  grouping.kmeans.seed = seed;
  PoolSet out;
  switch (scheme) {
    case PoolSchemeChoice::kGlobal:
      out.assignment = assign_single_group(profiles);
      break;
    case PoolSchemeChoice::kCustomized:
      out.assignment = assign_groups(profiles, grouping);
      break;
    case PoolSchemeChoice::kRandom:
      out.assignment = assign_random_groups(profiles, count_groups(assign_groups(profiles, grouping)), seed);
      break;
  }
  out.pools = build_pools(profiles, out.assignment, {config.vocab_size, config.max_branch_depth, pool_cap, seed});
  return out;
}

const TriePool* PoolSet::pool_for(const std::string& entity_id) const {
  const auto a = assignment.find(entity_id);
  if (a == assignment.end()) return nullptr;
  const auto p = pools.find(a->second.group_id);
  return p == pools.end() ? nullptr : &p->second;
}

NGramModel fit_reference_model(const ExperimentConfig& config, const std::vector<KnowledgeRecord>& records) {
  return NGramModel::fit(model_training_corpus(records, config.eos),
                         {config.ngram_order, config.ngram_alpha, config.vocab_size});
}

std::uint64_t token_digest(const std::vector<TokenSeq>& streams) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& s : streams) {
    mix(s.size());
    for (TokenId t : s) mix(static_cast<std::uint32_t>(t));
  }
  return h;
}

json run_experiment(const ExperimentConfig& config) {
  config.validate();

  struct PointKey {
    PoolSchemeChoice scheme;
    std::optional<std::size_t> cap;
    VerificationPolicy policy;
  };
  std::vector<PointKey> points;
  for (auto scheme : config.schemes)
    for (const auto& cap : config.pool_size_grid)
      for (const auto& policy : config.policies) points.push_back({scheme, cap, policy});

  std::vector<std::vector<RunStats>> per_point(points.size());
  std::vector<RunStats> baselines;
  std::vector<std::vector<json>> pool_info(points.size());

  for (std::uint64_t seed : config.seeds) {
    const auto records = load_or_synthesize(config, seed);
    const std::size_t n_eval = std::min(config.eval_records, records.size());

    std::optional<NGramModel> model;
    RunStats baseline;
    double baseline_speed = 0.0;

    std::size_t point = 0;
    for (auto scheme : config.schemes) {
      for (const auto& cap : config.pool_size_grid) {
        const auto work = build_scheme_pools(config, records, scheme, cap, seed);
        if (!model) {
          model = fit_reference_model(config, records);
          std::vector<DecodeReport> reports;
          std::vector<DecodeCounters> counters;
          for (std::size_t i = 0; i < n_eval; ++i) {
            auto res = decode_autoregressive(*model, records[i].prompt, {config.max_new_tokens, config.eos});
            baseline.totals += res.counters;
            counters.push_back(res.counters);
            reports.push_back(compute_metrics(res.counters, 0.0));
            baseline.streams.push_back(std::move(res.tokens));
          }
          finish(baseline, reports, counters);
          baseline_speed = baseline.totals.wall_seconds > 0
                               ? static_cast<double>(baseline.totals.tokens_generated) / baseline.totals.wall_seconds
                               : 0.0;
        }
        std::uint64_t entries = 0, nodes = 0;
        for (const auto& [g, pool] : work.pools) {
          entries += pool.size_entries();
          nodes += pool.trie().node_count();
        }
        for (const auto& policy : config.policies) {
          RunStats stats;
          std::vector<DecodeReport> reports;
          std::vector<DecodeCounters> counters;
          for (std::size_t i = 0; i < n_eval; ++i) {
            const auto& rec = records[i];
            const TriePool* pool = work.pool_for(rec.entity_id);
            SpeculativeOptions opts;
            opts.policy = policy;
            opts.draft = config.draft;
            opts.limits = {config.max_new_tokens, config.eos};
            opts.overlay_depth = config.max_branch_depth;
            opts.session_id = rec.entity_id;
            auto res = decode_speculative(*model, pool, rec.prompt, opts);
            stats.totals += res.counters;
            counters.push_back(res.counters);
            reports.push_back(compute_metrics(res.counters, baseline_speed));
            stats.streams.push_back(std::move(res.tokens));
          }
          finish(stats, reports, counters);
          per_point[point].push_back(std::move(stats));
          pool_info[point].push_back({{"seed", seed},
                                      {"pools", work.pools.size()},
                                      {"entries", entries},
                                      {"nodes", nodes}});
          ++point;
        }
      }
    }
    baselines.push_back(std::move(baseline));
  }

  json rows = json::array();
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& key = points[p];
    const auto& runs = per_point[p];
    std::vector<double> speed, speedup, aal, art, ratio, cpt, tps;
    json per_seed = json::array();
    bool lossless = true;
    for (std::size_t s = 0; s < runs.size(); ++s) {
      const auto& r = runs[s];
      const auto& b = baselines[s];
      const double base_speed = b.mean_gen_speed;
      speed.push_back(r.mean_gen_speed);
      speedup.push_back(base_speed > 0 ? r.mean_gen_speed / base_speed : 0.0);
      aal.push_back(r.mean_aal);
      art.push_back(r.mean_art);
      ratio.push_back(r.totals.wall_seconds > 0 ? r.totals.retrieval_seconds / r.totals.wall_seconds : 0.0);
      cpt.push_back(r.mean_calls_per_token);
      tps.push_back(r.mean_tokens_per_step);
      const bool same = r.streams == b.streams;
      lossless = lossless && same;
      per_seed.push_back({{"seed", config.seeds[s]},
                          {"tokens_generated", r.totals.tokens_generated},
                          {"model_calls", r.totals.model_calls},
                          {"accepted_draft_tokens", r.totals.accepted_draft_tokens},
                          {"fallback_steps", r.totals.fallback_steps},
                          {"token_digest", token_digest(r.streams)},
                          {"baseline_tokens_generated", b.totals.tokens_generated},
                          {"baseline_model_calls", b.totals.model_calls},
                          {"baseline_token_digest", token_digest(b.streams)},
                          {"identical_to_baseline", same},
                          {"pool", pool_info[p][s]}});
    }
    auto metric = [](const std::vector<double>& xs) {
      const auto s = summarize(xs);
      return json{{"mean", s.mean}, {"std", s.stddev}};
    };
    json row_config = config.to_json();
    row_config["schemes"] = json::array({std::string(to_string(key.scheme))});
    row_config["pool_size_grid"] = json::array({key.cap ? json(*key.cap) : json(nullptr)});
    row_config["policies"] = json::array({policy_json(key.policy)});
    rows.push_back({{"variant", variant_label(key.scheme, key.policy)},
                    {"scheme", std::string(to_string(key.scheme))},
                    {"policy", policy_json(key.policy)},
                    {"pool_cap", key.cap ? json(*key.cap) : json(nullptr)},
                    {"gen_speed_tokens_per_second", metric(speed)},
                    {"speedup_vs_autoregressive", metric(speedup)},
                    {"aal", metric(aal)},
                    {"tokens_per_step", metric(tps)},
                    {"art_seconds", metric(art)},
                    {"retrieval_time_ratio", metric(ratio)},
                    {"calls_per_token", metric(cpt)},
                    {"identical_to_baseline", lossless},
                    {"per_seed", per_seed},
                    {"config", row_config}});
  }
  return {{"schema_version", 1}, {"config", config.to_json()}, {"rows", rows}};
}

}  // namespace rsd
