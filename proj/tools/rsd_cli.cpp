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

// Command-line front end; talks to the engine only through rsd.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsd.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int exit_code(rsd_status st) {
  switch (st) {
    case RSD_OK: return kExitOk;
    case RSD_ERR_INVALID_ARGUMENT:
    case RSD_ERR_CONFIG: return kExitConfig;
    case RSD_ERR_DATA:
    case RSD_ERR_STRUCTURE:
    case RSD_ERR_IO: return kExitData;
    default: return kExitInternal;
  }
}

int report(rsd_status st, const char* what) {
  if (st != RSD_OK) std::cerr << "rsd " << what << ": " << rsd_status_name(st) << ": " << rsd_last_error() << '\n';
  return exit_code(st);
}

struct CommonFlags {
  std::string config_path;
  std::optional<long long> seed;
  std::string output;
  std::optional<std::string> policy;
  std::optional<unsigned> k;
  std::optional<double> p;
  std::optional<unsigned> draft_max;
  std::optional<std::string> pool_scheme;
  std::optional<unsigned> max_new_tokens;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool output_required) {
  cmd->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Seed (replaces the config's seed list)");
  auto* out = cmd->add_option("--output", f.output, "Output path");
  if (output_required) out->required();
  cmd->add_option("--policy", f.policy, "Verification policy")
      ->check(CLI::IsMember({"greedy", "topk", "topp", "relaxed"}));
  cmd->add_option("--k", f.k, "Top-k width for topk/relaxed");
  cmd->add_option("--p", f.p, "Probability threshold for topp/relaxed");
  cmd->add_option("--draft-max", f.draft_max, "Maximum draft tokens K");
  cmd->add_option("--pool-scheme", f.pool_scheme, "Retrieval pool scheme")
      ->check(CLI::IsMember({"global", "customized", "random"}));
  cmd->add_option("--max-new-tokens", f.max_new_tokens, "Generation budget per record");
}

// Config file, then flag overrides. Throws std::runtime_error on unreadable
// or malformed config files.
json merged_config(const CommonFlags& f) {
  json c = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw std::runtime_error("cannot read config " + f.config_path);
    c = json::parse(in);
  }
  if (f.seed) c["seeds"] = json::array({*f.seed});
  if (f.policy || f.k || f.p) {
    json pol = json::object();
    if (c.contains("policies") && c["policies"].is_array() && !c["policies"].empty() && c["policies"][0].is_object()) {
      pol = c["policies"][0];
    }
    if (f.policy) pol["mode"] = *f.policy;
    if (f.k) pol["k"] = *f.k;
    if (f.p) pol["p"] = *f.p;
    c["policies"] = json::array({pol});
  }
  if (f.draft_max) c["draft"]["max_draft_tokens"] = *f.draft_max;
  if (f.pool_scheme) c["schemes"] = json::array({*f.pool_scheme});
  if (f.max_new_tokens) c["max_new_tokens"] = *f.max_new_tokens;
  return c;
}

std::vector<int32_t> parse_token_list(const std::string& text) {
  std::vector<int32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<int32_t>(std::stoll(item)));
  }
  return out;
}

rsd_policy_mode policy_mode(const std::string& name) {
  if (name == "topk") return RSD_POLICY_TOPK;
  if (name == "topp") return RSD_POLICY_TOPP;
  if (name == "relaxed") return RSD_POLICY_RELAXED;
  return RSD_POLICY_GREEDY;
}

// Single-prompt decode through the handle API.
int decode_prompt(const CommonFlags& f, const std::string& model_path, const std::string& pool_path,
                  const std::string& prompt_text, bool autoregressive) {
  rsd_model* model = nullptr;
  if (auto st = rsd_model_load(model_path.c_str(), &model); st != RSD_OK) return report(st, "decode");
  rsd_pool* pool = nullptr;
  if (!pool_path.empty()) {
    if (auto st = rsd_pool_load(pool_path.c_str(), &pool); st != RSD_OK) {
      rsd_model_free(model);
      return report(st, "decode");
    }
  }
  rsd_decode_options opts;
  rsd_decode_options_init(&opts);
  opts.speculative = autoregressive ? 0 : 1;
  if (f.policy) opts.policy = policy_mode(*f.policy);
  if (f.k) opts.k = *f.k;
  if (f.p) opts.p = *f.p;
  if (f.draft_max) opts.draft_max = *f.draft_max;
  if (f.max_new_tokens) opts.max_new_tokens = *f.max_new_tokens;

  std::vector<int32_t> prompt;
  try {
    prompt = parse_token_list(prompt_text);
  } catch (const std::exception&) {
    std::cerr << "rsd decode: --prompt must be a comma-separated list of token ids\n";
    rsd_pool_free(pool);
    rsd_model_free(model);
    return kExitConfig;
  }
  std::vector<int32_t> tokens(opts.max_new_tokens);
  size_t n = 0;
  rsd_decode_stats stats{};
  const auto st = rsd_decode(model, pool, prompt.data(), prompt.size(), &opts, tokens.data(), tokens.size(), &n,
                             &stats);
  rsd_pool_free(pool);
  rsd_model_free(model);
  if (st != RSD_OK) return report(st, "decode");
  tokens.resize(n);
  const json doc = {{"tokens", tokens},
                    {"report",
                     {{"tokens_generated", stats.tokens_generated},
                      {"model_calls", stats.model_calls},
                      {"fallback_steps", stats.fallback_steps},
                      {"accepted_draft_tokens", stats.accepted_draft_tokens},
                      {"aal", stats.aal},
                      {"art_seconds", stats.retrieval_seconds},
                      {"wall_seconds", stats.wall_seconds},
                      {"gen_speed_tokens_per_second", stats.gen_speed_tokens_per_second}}}};
  if (f.output.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream out(f.output);
    out << doc.dump(2) << '\n';
    if (!out) {
      std::cerr << "rsd decode: cannot write " << f.output << '\n';
      return kExitData;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-based speculative decoding engine and benchmark harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rsd_version()));

  CommonFlags synth_f, build_f, decode_f, bench_f;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic knowledge corpus (JSON Lines)");
  add_common(synth, synth_f, true);

  auto* build = app.add_subcommand("build-pools", "Fit the reference model and build retrieval pools");
  add_common(build, build_f, true);
  std::string build_corpus;
  build->add_option("--corpus", build_corpus, "Corpus JSON Lines (synthesized when omitted)");

  auto* decode = app.add_subcommand("decode", "Decode corpus records or a single prompt");
  add_common(decode, decode_f, false);
  std::string pools_dir, decode_corpus, model_path, pool_path, prompt_text;
  bool autoregressive = false;
  decode->add_option("--pools", pools_dir, "Directory written by build-pools");
  decode->add_option("--corpus", decode_corpus, "Corpus JSON Lines to decode");
  decode->add_option("--model", model_path, "Model file (single-prompt mode)");
  decode->add_option("--pool", pool_path, "Pool file (single-prompt mode)");
  decode->add_option("--prompt", prompt_text, "Comma-separated prompt token ids (single-prompt mode)");
  decode->add_flag("--autoregressive", autoregressive, "Baseline decoding without drafts");

  auto* bench = app.add_subcommand("bench", "Run the experiment grid and write a JSON report");
  add_common(bench, bench_f, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto config_string = [](const CommonFlags& f, std::string& out) -> bool {
    try {
      out = merged_config(f).dump();
      return true;
    } catch (const std::exception& e) {
      std::cerr << "rsd: configuration error: " << e.what() << '\n';
      return false;
    }
  };

  std::string cfg;
  if (*synth) {
    if (!config_string(synth_f, cfg)) return kExitConfig;
    return report(rsd_synth(cfg.c_str(), synth_f.output.c_str()), "synth");
  }
  if (*build) {
    if (!config_string(build_f, cfg)) return kExitConfig;
    return report(rsd_build_pools(cfg.c_str(), build_corpus.empty() ? nullptr : build_corpus.c_str(),
                                  build_f.output.c_str()),
                  "build-pools");
  }
  if (*decode) {
    if (!prompt_text.empty()) {
      if (model_path.empty()) {
        std::cerr << "rsd decode: --prompt needs --model\n";
        return kExitConfig;
      }
      return decode_prompt(decode_f, model_path, pool_path, prompt_text, autoregressive);
    }
    if (pools_dir.empty() || decode_corpus.empty() || decode_f.output.empty()) {
      std::cerr << "rsd decode: need --pools, --corpus and --output (or --model with --prompt)\n";
      return kExitConfig;
    }
    if (!config_string(decode_f, cfg)) return kExitConfig;
    return report(rsd_decode_corpus(cfg.c_str(), pools_dir.c_str(), decode_corpus.c_str(), decode_f.output.c_str()),
                  "decode");
  }
  if (!config_string(bench_f, cfg)) return kExitConfig;
  return report(rsd_run_experiment(cfg.c_str(), bench_f.output.c_str()), "bench");
}
