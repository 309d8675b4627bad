#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "augcal/runner.hpp"

#ifndef AUGCAL_DATA_DIR
#define AUGCAL_DATA_DIR "data"
#endif

namespace {

using namespace augcal;

struct CliOverrides {
  std::map<std::string, std::string> values;

  void add_option(CLI::App* cmd, const std::string& key,
                  const std::string& flag, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

void add_run_options(CLI::App* cmd, CliOverrides& overrides,
                     std::string& config_path) {
  cmd->add_option("--config", config_path,
                  "key=value config file; flags override file values");
  overrides.add_option(cmd, "dataset", "--dataset",
                       "dataset kind: strategyqa|prf_law|gsm8k|canonical");
  overrides.add_option(cmd, "data", "--data", "dataset file path");
  overrides.add_option(cmd, "strategy", "--strategy",
                       "sampling|paraphrase|sr|rs|rd|ri|bt|randaugment|taa");
  overrides.add_option(cmd, "magnitude", "--magnitude",
                       "augmentation magnitude (0.1|0.2|0.3) or 'search'");
  overrides.add_option(cmd, "nr", "--nr",
                       "RandAugment transformation count (1|2|3) or 'search'");
  overrides.add_option(cmd, "n", "--n", "augmentation fan-out (default 5)");
  overrides.add_option(cmd, "repeats", "--repeats",
                       "independent repeats to average (default 3)");
  overrides.add_option(cmd, "seed", "--seed", "base seed (default 42)");
  overrides.add_option(cmd, "split_seed", "--split-seed",
                       "validation/test split seed (default 42)");
  overrides.add_option(cmd, "bins", "--bins", "ECE bin count (default 10)");
  overrides.add_option(cmd, "endpoint_url", "--endpoint-url",
                       "chat-completions base URL");
  overrides.add_option(cmd, "model", "--model", "model identifier");
  overrides.add_option(cmd, "api_key_env", "--api-key-env",
                       "environment variable holding the API key");
  overrides.add_option(cmd, "timeout_seconds", "--timeout",
                       "request timeout in seconds");
  overrides.add_option(cmd, "max_retries", "--max-retries",
                       "retries after the first attempt");
  overrides.add_option(cmd, "max_parallel", "--max-parallel",
                       "maximum concurrent requests");
  overrides.add_option(cmd, "temperature", "--temperature",
                       "prediction temperature (default 0.7)");
  overrides.add_option(cmd, "cache_dir", "--cache-dir",
                       "response cache directory (empty: no cache)");
  overrides.add_option(cmd, "out", "--out", "output directory");
  overrides.add_option(cmd, "lexicon", "--lexicon", "synonym lexicon file");
  overrides.add_option(cmd, "stopwords", "--stopwords", "stopword file");
  overrides.add_option(cmd, "translate_url", "--translate-url",
                       "translation endpoint base URL (empty: identity)");
  overrides.add_option(cmd, "failure_budget", "--failure-budget",
                       "abort when the item failure rate exceeds this");
  cmd->add_flag_callback(
      "--mock",
      [&overrides]() { overrides.values["mock"] = "true"; },
      "use the deterministic offline mock instead of the network");
}

RunConfig build_config(const std::string& config_path,
                       const CliOverrides& overrides) {
  RunConfig config;
  config.endpoint.model = "gpt-3.5-turbo";
  if (!config_path.empty())
    for (const auto& [key, value] : parse_config_file(config_path))
      apply_config_entry(config, key, value);
  for (const auto& [key, value] : overrides.values)
    apply_config_entry(config, key, value);
  if (config.lexicon_path.empty())
    config.lexicon_path = std::string(AUGCAL_DATA_DIR) + "/synonyms.txt";
  if (config.stopwords_path.empty())
    config.stopwords_path = std::string(AUGCAL_DATA_DIR) + "/stopwords.txt";
  return config;
}

// Owns the clients referenced by a PipelineContext.
struct Runtime {
  SynonymLexicon lexicon;
  StopwordList stopwords;
  std::unique_ptr<ChatClient> client;
  std::unique_ptr<ResponseCache> cache;
  std::unique_ptr<Translator> translator_raw;
  std::unique_ptr<Translator> translator;
  PipelineContext ctx;
};

std::unique_ptr<Runtime> make_runtime(const RunConfig& config) {
  auto rt = std::make_unique<Runtime>();
  rt->lexicon = SynonymLexicon::load(config.lexicon_path);
  rt->stopwords = StopwordList::load(config.stopwords_path);

  if (config.use_mock) {
    rt->client = std::make_unique<MockChatClient>(
        MockChatClient::hashed_responder(config.seed,
                                         /*index_sensitive=*/true));
  } else {
    if (config.endpoint.base_url.empty())
      throw std::runtime_error(
          "no --endpoint-url configured (or pass --mock for offline runs)");
    rt->client = std::make_unique<HttpChatClient>(config.endpoint);
  }

  if (!config.cache_dir.empty())
    rt->cache = std::make_unique<ResponseCache>(config.cache_dir);

  if (!config.use_mock && !config.translate_url.empty()) {
    EndpointConfig tcfg = config.endpoint;
    tcfg.base_url = config.translate_url;
    rt->translator = std::make_unique<HttpTranslator>(tcfg, rt->cache.get());
  } else {
    rt->translator = std::make_unique<IdentityTranslator>();
  }

  rt->ctx.client = rt->client.get();
  rt->ctx.cache = rt->cache.get();
  rt->ctx.lexicon = &rt->lexicon;
  rt->ctx.stopwords = &rt->stopwords;
  rt->ctx.translator = rt->translator.get();
  rt->ctx.workers = config.endpoint.max_parallel;
  return rt;
}

void print_result(const RunResult& result) {
  std::printf("strategy:            %s\n", result.resolved.label().c_str());
  if (!result.source_label.empty())
    std::printf("transferred from:    %s\n", result.source_label.c_str());
  std::printf("test items:          %zu\n", result.split.test_ids.size());
  std::printf("ECE (x100):          %.2f\n", result.avg_ece * 100.0);
  std::printf("accuracy:            %.4f\n", result.avg_accuracy);
  if (result.avg_mean_confidence_incorrect.has_value())
    std::printf("mean conf incorrect: %.4f\n",
                *result.avg_mean_confidence_incorrect);
  else
    std::printf("mean conf incorrect: n/a\n");
  std::printf("report written to:   %s\n", result.config.out_dir.c_str());
}

int cmd_import(const std::string& dataset, const std::string& data,
               const std::string& out) {
  auto items = import_dataset(dataset_kind_from_name(dataset), data);
  save_canonical(items, out);
  std::printf("imported %zu items -> %s\n", items.size(), out.c_str());
  return 0;
}

int cmd_run(const RunConfig& config, bool expect_search) {
  if (config.data_path.empty())
    throw std::runtime_error("no --data configured");
  if (expect_search && !config.strategy.needs_search())
    throw std::runtime_error(
        "'search' needs a strategy with open parameters; use 'estimate' for "
        "fully specified strategies");
  if (!expect_search && config.strategy.needs_search())
    throw std::runtime_error(
        "'estimate' needs a fully specified strategy; use 'search' to "
        "resolve parameters on the validation split");

  auto items = import_dataset(config.dataset, config.data_path);
  auto rt = make_runtime(config);
  RunResult result = run_experiment(config, items, rt->ctx);
  emit_report(result, config.out_dir);
  print_result(result);
  return 0;
}

int cmd_transfer(const RunConfig& config) {
  if (config.params_path.empty())
    throw std::runtime_error("transfer requires --params");
  if (config.data_path.empty())
    throw std::runtime_error("no --data configured");
  auto items = import_dataset(config.dataset, config.data_path);
  auto rt = make_runtime(config);
  RunResult result =
      run_transfer(config.params_path, config, items, rt->ctx);
  emit_report(result, config.out_dir);
  print_result(result);
  return 0;
}

int cmd_report(const std::string& records_path, std::size_t bins) {
  std::ifstream in(records_path);
  if (!in)
    throw std::runtime_error("cannot open records file: " + records_path);

  std::map<int, std::vector<ConfidenceRecord>> by_repeat;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json entry = nlohmann::json::parse(line);
    ConfidenceRecord record;
    record.question_id = entry.at("id").get<std::string>();
    record.kind = task_kind_from_name(entry.at("kind").get<std::string>());
    record.majority.canonical = entry.at("majority").get<std::string>();
    record.majority.valid = entry.at("majority_valid").get<bool>();
    record.confidence = entry.at("confidence").get<double>();
    record.gold.canonical = entry.at("gold").get<std::string>();
    record.gold.valid = true;
    record.correct = entry.at("correct").get<bool>();
    by_repeat[entry.value("repeat", 0)].push_back(std::move(record));
  }
  if (by_repeat.empty())
    throw std::runtime_error("no records in " + records_path);

  double ece_sum = 0.0, acc_sum = 0.0;
  for (const auto& [repeat, records] : by_repeat) {
    CalibrationReport report = make_report(records, bins);
    std::printf("repeat %d: records=%zu ECE(x100)=%.2f accuracy=%.4f", repeat,
                records.size(), report.ece * 100.0, report.accuracy);
    if (report.mean_confidence_incorrect.has_value())
      std::printf(" mean_conf_incorrect=%.4f\n",
                  *report.mean_confidence_incorrect);
    else
      std::printf(" mean_conf_incorrect=n/a\n");
    ece_sum += report.ece;
    acc_sum += report.accuracy;
  }
  auto repeats = static_cast<double>(by_repeat.size());
  std::printf("averaged: ECE(x100)=%.2f accuracy=%.4f\n",
              ece_sum / repeats * 100.0, acc_sum / repeats);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Black-box LLM confidence estimation via augmentation consistency"};
  app.require_subcommand(1);

  // import
  auto* import_cmd =
      app.add_subcommand("import", "convert an upstream dataset to canonical"
                                   " line-delimited form");
  std::string import_dataset_name, import_data, import_out;
  import_cmd->add_option("--dataset", import_dataset_name,
                         "strategyqa|prf_law|gsm8k")->required();
  import_cmd->add_option("--data", import_data, "upstream file")->required();
  import_cmd->add_option("--out", import_out, "canonical output file")
      ->required();

  // estimate / search / transfer share the run options
  auto* estimate_cmd = app.add_subcommand(
      "estimate", "run a fully specified strategy and report calibration");
  CliOverrides estimate_overrides;
  std::string estimate_config;
  add_run_options(estimate_cmd, estimate_overrides, estimate_config);

  auto* search_cmd = app.add_subcommand(
      "search", "resolve strategy parameters on the validation split, then "
                "evaluate the test split");
  CliOverrides search_overrides;
  std::string search_config;
  add_run_options(search_cmd, search_overrides, search_config);

  auto* transfer_cmd = app.add_subcommand(
      "transfer", "apply parameters saved by a previous search run");
  CliOverrides transfer_overrides;
  std::string transfer_config;
  add_run_options(transfer_cmd, transfer_overrides, transfer_config);
  std::string transfer_params;
  transfer_cmd->add_option("--params", transfer_params,
                           "params.json from a previous run");

  // report
  auto* report_cmd = app.add_subcommand(
      "report", "recompute calibration metrics from a records.jsonl dump");
  std::string report_records;
  std::size_t report_bins = 10;
  report_cmd->add_option("--records", report_records, "records.jsonl path")
      ->required();
  report_cmd->add_option("--bins", report_bins, "ECE bin count (default 10)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (import_cmd->parsed())
      return cmd_import(import_dataset_name, import_data, import_out);
    if (estimate_cmd->parsed())
      return cmd_run(build_config(estimate_config, estimate_overrides),
                     /*expect_search=*/false);
    if (search_cmd->parsed())
      return cmd_run(build_config(search_config, search_overrides),
                     /*expect_search=*/true);
    if (transfer_cmd->parsed()) {
      RunConfig config = build_config(transfer_config, transfer_overrides);
      if (!transfer_params.empty()) config.params_path = transfer_params;
      return cmd_transfer(config);
    }
    if (report_cmd->parsed()) return cmd_report(report_records, report_bins);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
