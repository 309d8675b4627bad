#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "augcal/calibration.hpp"
#include "augcal/datasets.hpp"
#include "augcal/gateway.hpp"
#include "augcal/policy.hpp"

namespace augcal {

enum class StrategyKind { Sampling, Paraphrase, SingleOp, RandAugment, Taa };

// A strategy selection, possibly carrying unresolved "search" placeholders
// (empty optionals). Searchable: single-op magnitude, RandAugment (n_r, m),
// TAA combinations. The knobs are orthogonal so configuration keys can be
// applied in any order.
struct StrategySpec {
  StrategyKind kind = StrategyKind::Sampling;

  AugmentOpKind op = AugmentOpKind::SynonymReplacement;  // SingleOp
  std::optional<Magnitude> magnitude;  // SingleOp m and RandAugment M
  std::optional<int> n_r;              // RandAugment
  std::optional<TaaCombination> taa;   // Taa (pooled)

  bool needs_search() const;
  std::string label() const;

  // Valid only when kind == RandAugment and both knobs are set.
  RandAugmentParams randaugment_params() const;

  static StrategySpec sampling();
  static StrategySpec paraphrase();
  static StrategySpec single_op(AugmentOpKind op,
                                std::optional<Magnitude> m = std::nullopt);
  static StrategySpec randaug(std::optional<RandAugmentParams> params);
  static StrategySpec taa_pooled(std::optional<TaaCombination> pooled);

  // Parses the CLI strategy name ("sampling", "paraphrase", "sr", "rs",
  // "rd", "ri", "bt", "randaugment", "taa" and long names).
  static StrategySpec parse(const std::string& name);
};

struct RunConfig {
  DatasetKind dataset = DatasetKind::Canonical;
  std::string data_path;
  EndpointConfig endpoint;
  StrategySpec strategy;
  int n = 5;                            // augmentation fan-out
  double prediction_temperature = 0.7;  // all prediction calls
                                        // (paraphrase generation is fixed at 0)
  int repeats = 3;
  std::uint64_t seed = 42;              // repeat r runs with seed + r
  std::uint64_t split_seed = 42;        // fixed across repeats
  std::size_t bins = 10;
  std::string cache_dir;
  std::string out_dir = "out";
  bool use_mock = false;
  std::string lexicon_path;
  std::string stopwords_path;
  std::string translate_url;            // empty: identity translator
  double failure_budget = 0.10;
  std::string params_path;              // transfer input
};

// Everything estimate() needs besides the items: clients, cache, lexicon.
struct PipelineContext {
  ChatClient* client = nullptr;
  ResponseCache* cache = nullptr;  // may be null
  const SynonymLexicon* lexicon = nullptr;
  const StopwordList* stopwords = nullptr;
  Translator* translator = nullptr;
  int workers = 4;
};

struct EstimateOptions {
  int n = 5;
  double prediction_temperature = 0.7;
  int repeat_index = 0;  // folded into prediction request indices
  std::uint64_t seed = 42;
  std::size_t bins = 10;
  double failure_budget = 0.10;
};

struct EstimateResult {
  std::vector<ConfidenceRecord> records;
  std::vector<PredictionRecord> predictions;
  CalibrationReport report;
  std::vector<std::string> failed_ids;
};

// The n question variants for one item. Streams derive from
// (seed, item id, augmentation index) so adding items never perturbs other
// items' variants. The strategy must be fully resolved.
std::vector<std::string> build_variants(const QAItem& item,
                                        const StrategySpec& strategy, int n,
                                        const PipelineContext& ctx,
                                        std::uint64_t seed);

// Fan-out pipeline over items: variants -> prompts -> completions ->
// extraction -> aggregation -> calibration. Items failing after gateway
// retries are excluded and reported; more than failure_budget of the items
// failing aborts the run.
EstimateResult estimate(const std::vector<QAItem>& items,
                        const StrategySpec& strategy,
                        const PipelineContext& ctx,
                        const EstimateOptions& opts);

struct MagnitudeSearchEntry {
  Magnitude m;
  double ece = 0.0;
};

struct RepeatOutcome {
  std::uint64_t seed = 0;
  CalibrationReport report;
  std::vector<ConfidenceRecord> records;
  std::vector<PredictionRecord> predictions;
  std::vector<std::string> failed_ids;
};

struct RunResult {
  std::vector<RepeatOutcome> repeats;
  double avg_ece = 0.0;
  double avg_accuracy = 0.0;
  std::optional<double> avg_mean_confidence_incorrect;
  StrategySpec resolved;
  std::optional<RandAugmentSearchResult> randaugment_search;
  std::optional<TaaSearchResult> taa_search;
  std::optional<std::vector<MagnitudeSearchEntry>> magnitude_search;
  SplitAssignment split;
  std::string source_label;  // transfer provenance, empty for direct runs
  RunConfig config;
};

// Split 1:1, resolve any search placeholders on the validation half (scored
// by validation ECE), then evaluate the test half `repeats` times with
// derived seeds and average the metrics.
RunResult run_experiment(const RunConfig& config,
                         const std::vector<QAItem>& items,
                         const PipelineContext& ctx);

// Applies parameters saved by a previous search run, skipping search.
RunResult run_transfer(const std::string& params_path,
                       const RunConfig& target_config,
                       const std::vector<QAItem>& items,
                       const PipelineContext& ctx);

// Parameter-transfer file, format_version 1.
void save_params(const RunResult& result, const std::string& path);
struct LoadedParams {
  StrategySpec resolved;
  std::string source_label;
};
LoadedParams load_params(const std::string& path);

// Writes summary.txt, summary.json, bins.tsv, records.jsonl,
// predictions.jsonl, config.txt, and (for parameterized strategies)
// params.json. Byte-deterministic given the result.
void emit_report(const RunResult& result, const std::string& out_dir);

// Key-value config file (`key = value`, '#' comments). Later sources
// override earlier ones; CLI flags override file values.
std::map<std::string, std::string> parse_config_file(const std::string& path);
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

// Serializes the effective config as a reloadable key-value document.
std::string config_snapshot(const RunConfig& config);

}  // namespace augcal
