#include "augcal/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "augcal/rng.hpp"

namespace augcal {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// StrategySpec

bool StrategySpec::needs_search() const {
  switch (kind) {
    case StrategyKind::Sampling:
    case StrategyKind::Paraphrase:
      return false;
    case StrategyKind::SingleOp:
      // Back-translation takes no magnitude.
      return op != AugmentOpKind::BackTranslation && !magnitude.has_value();
    case StrategyKind::RandAugment:
      return !magnitude.has_value() || !n_r.has_value();
    case StrategyKind::Taa:
      return !taa.has_value();
  }
  return false;
}

RandAugmentParams StrategySpec::randaugment_params() const {
  if (kind != StrategyKind::RandAugment || !n_r.has_value() ||
      !magnitude.has_value())
    throw std::logic_error("randaugment parameters are not resolved");
  return RandAugmentParams{*n_r, *magnitude};
}

std::string StrategySpec::label() const {
  char buf[64];
  switch (kind) {
    case StrategyKind::Sampling: return "sampling";
    case StrategyKind::Paraphrase: return "paraphrase";
    case StrategyKind::SingleOp:
      if (op == AugmentOpKind::BackTranslation) return "back_translation";
      if (magnitude.has_value()) {
        std::snprintf(buf, sizeof(buf), "%s(m=%.1f)",
                      std::string(op_kind_name(op)).c_str(),
                      magnitude->alpha);
        return buf;
      }
      return std::string(op_kind_name(op)) + "(m=search)";
    case StrategyKind::RandAugment:
      return needs_search() ? "randaugment(search)"
                            : randaugment_params().label();
    case StrategyKind::Taa:
      if (taa.has_value()) {
        std::snprintf(buf, sizeof(buf), "taa(pooled %zu policies)",
                      taa->policies.size());
        return buf;
      }
      return "taa(search)";
  }
  return "unknown";
}

StrategySpec StrategySpec::sampling() {
  StrategySpec s;
  s.kind = StrategyKind::Sampling;
  return s;
}

StrategySpec StrategySpec::paraphrase() {
  StrategySpec s;
  s.kind = StrategyKind::Paraphrase;
  return s;
}

StrategySpec StrategySpec::single_op(AugmentOpKind op,
                                     std::optional<Magnitude> m) {
  StrategySpec s;
  s.kind = StrategyKind::SingleOp;
  s.op = op;
  s.magnitude = m;
  return s;
}

StrategySpec StrategySpec::randaug(std::optional<RandAugmentParams> params) {
  StrategySpec s;
  s.kind = StrategyKind::RandAugment;
  if (params.has_value()) {
    s.n_r = params->n_r;
    s.magnitude = params->m;
  }
  return s;
}

StrategySpec StrategySpec::taa_pooled(std::optional<TaaCombination> pooled) {
  StrategySpec s;
  s.kind = StrategyKind::Taa;
  s.taa = std::move(pooled);
  return s;
}

StrategySpec StrategySpec::parse(const std::string& name) {
  if (name == "sampling") return sampling();
  if (name == "paraphrase") return paraphrase();
  if (name == "sr" || name == "synonym_replacement")
    return single_op(AugmentOpKind::SynonymReplacement);
  if (name == "rs" || name == "random_swap")
    return single_op(AugmentOpKind::RandomSwap);
  if (name == "rd" || name == "random_deletion")
    return single_op(AugmentOpKind::RandomDeletion);
  if (name == "ri" || name == "random_insertion")
    return single_op(AugmentOpKind::RandomInsertion);
  if (name == "bt" || name == "back_translation")
    return single_op(AugmentOpKind::BackTranslation);
  if (name == "ra" || name == "randaugment") return randaug(std::nullopt);
  if (name == "taa") return taa_pooled(std::nullopt);
  throw std::invalid_argument("unknown strategy: " + name);
}

namespace {

std::string strategy_config_name(const StrategySpec& s) {
  switch (s.kind) {
    case StrategyKind::Sampling: return "sampling";
    case StrategyKind::Paraphrase: return "paraphrase";
    case StrategyKind::SingleOp: return std::string(op_kind_name(s.op));
    case StrategyKind::RandAugment: return "randaugment";
    case StrategyKind::Taa: return "taa";
  }
  return "sampling";
}

}  // namespace

// ---------------------------------------------------------------------------
// Variants

std::vector<std::string> build_variants(const QAItem& item,
                                        const StrategySpec& strategy, int n,
                                        const PipelineContext& ctx,
                                        std::uint64_t seed) {
  if (strategy.needs_search())
    throw std::invalid_argument(
        "build_variants: strategy has unresolved search placeholders");

  std::vector<std::string> variants;
  variants.reserve(static_cast<std::size_t>(n));
  RngStream item_stream = RngStream(seed).derive(item.id);

  for (int i = 0; i < n; ++i) {
    RngStream variant_stream =
        item_stream.derive(static_cast<std::uint64_t>(i));
    AugmentContext actx{ctx.lexicon, ctx.stopwords, ctx.translator};
    switch (strategy.kind) {
      case StrategyKind::Sampling:
        variants.push_back(item.question);
        break;
      case StrategyKind::Paraphrase:
        variants.push_back(
            augcal::paraphrase(ctx.cache, *ctx.client, item.question, i));
        break;
      case StrategyKind::SingleOp: {
        Magnitude m = strategy.magnitude.value_or(Magnitude{0.1});
        RngStream op_stream = variant_stream.derive(std::uint64_t{0});
        variants.push_back(
            apply_op(strategy.op, m, item.question, actx, op_stream));
        break;
      }
      case StrategyKind::RandAugment:
        variants.push_back(randaugment_apply(strategy.randaugment_params(),
                                             item.question, actx,
                                             variant_stream));
        break;
      case StrategyKind::Taa:
        variants.push_back(
            taa_apply(*strategy.taa, item.question, actx, variant_stream));
        break;
    }
  }
  return variants;
}

// ---------------------------------------------------------------------------
// Estimation pipeline

namespace {

struct ItemOutcome {
  bool failed = false;
  std::string error;
  ConfidenceRecord record;
  std::vector<PredictionRecord> predictions;
};

ItemOutcome process_item(const QAItem& item, const StrategySpec& strategy,
                         const PipelineContext& ctx,
                         const EstimateOptions& opts) {
  ItemOutcome outcome;
  std::vector<std::string> variants =
      build_variants(item, strategy, opts.n, ctx, opts.seed);

  std::vector<NormalizedAnswer> answers;
  for (int i = 0; i < opts.n; ++i) {
    Prompt prompt = render_prompt(item, variants[static_cast<std::size_t>(i)]);
    ChatRequest req;
    req.system = prompt.system;
    req.user = prompt.user;
    req.temperature = opts.prediction_temperature;
    req.request_index = opts.repeat_index * opts.n + i;
    std::string raw = cached_complete(ctx.cache, *ctx.client, req);
    NormalizedAnswer answer = extract_answer(raw, item.kind);

    PredictionRecord prediction;
    prediction.question_id = item.id;
    prediction.index = i;
    prediction.augmented_text = variants[static_cast<std::size_t>(i)];
    prediction.raw_response = raw;
    prediction.answer = answer;
    outcome.predictions.push_back(std::move(prediction));
    answers.push_back(std::move(answer));
  }

  auto [majority, confidence] = aggregate_consistency(answers, item.kind);
  outcome.record.question_id = item.id;
  outcome.record.kind = item.kind;
  outcome.record.majority = majority;
  outcome.record.confidence = confidence;
  outcome.record.gold = item.gold;
  outcome.record.correct = answers_equal(majority, item.gold, item.kind);
  return outcome;
}

}  // namespace

EstimateResult estimate(const std::vector<QAItem>& items,
                        const StrategySpec& strategy,
                        const PipelineContext& ctx,
                        const EstimateOptions& opts) {
  if (items.empty())
    throw std::invalid_argument("estimate: no items to evaluate");
  if (strategy.needs_search())
    throw std::invalid_argument(
        "estimate: strategy has unresolved search placeholders");
  if (opts.n < 1) throw std::invalid_argument("estimate: n must be >= 1");

  std::vector<ItemOutcome> outcomes(items.size());
  std::atomic<std::size_t> cursor{0};
  int workers = std::max(1, std::min<int>(ctx.workers,
                                          static_cast<int>(items.size())));

  auto worker = [&]() {
    while (true) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= items.size()) break;
      try {
        outcomes[i] = process_item(items[i], strategy, ctx, opts);
      } catch (const std::exception& e) {
        outcomes[i].failed = true;
        outcomes[i].error = e.what();
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  EstimateResult result;
  std::string first_error;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (outcomes[i].failed) {
      result.failed_ids.push_back(items[i].id);
      if (first_error.empty())
        first_error = items[i].id + ": " + outcomes[i].error;
      continue;
    }
    result.records.push_back(std::move(outcomes[i].record));
    for (auto& p : outcomes[i].predictions)
      result.predictions.push_back(std::move(p));
  }

  double failure_rate = static_cast<double>(result.failed_ids.size()) /
                        static_cast<double>(items.size());
  if (failure_rate > opts.failure_budget)
    throw std::runtime_error(
        "estimate aborted: " + std::to_string(result.failed_ids.size()) +
        " of " + std::to_string(items.size()) +
        " items failed (budget " + std::to_string(opts.failure_budget) +
        "); first failure: " + first_error);
  if (result.records.empty())
    throw std::runtime_error("estimate: every item failed; first failure: " +
                             first_error);

  result.report = make_report(result.records, opts.bins);
  result.report.failed_items = result.failed_ids.size();
  return result;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

EstimateOptions options_for(const RunConfig& config, std::uint64_t seed,
                            int repeat_index) {
  EstimateOptions opts;
  opts.n = config.n;
  opts.prediction_temperature = config.prediction_temperature;
  opts.repeat_index = repeat_index;
  opts.seed = seed;
  opts.bins = config.bins;
  opts.failure_budget = config.failure_budget;
  return opts;
}

StrategySpec resolve_by_search(const RunConfig& config,
                               const std::vector<QAItem>& validation,
                               const PipelineContext& ctx,
                               RunResult& result) {
  StrategySpec resolved = config.strategy;
  EstimateOptions vopts = options_for(config, config.seed, 0);

  switch (config.strategy.kind) {
    case StrategyKind::SingleOp: {
      std::vector<MagnitudeSearchEntry> table;
      for (double alpha : kMagnitudeGrid) {
        StrategySpec candidate =
            StrategySpec::single_op(config.strategy.op, Magnitude{alpha});
        double score = estimate(validation, candidate, ctx, vopts).report.ece;
        table.push_back({Magnitude{alpha}, score});
      }
      std::size_t best = 0;
      for (std::size_t i = 1; i < table.size(); ++i)
        if (table[i].ece < table[best].ece) best = i;
      resolved.magnitude = table[best].m;
      result.magnitude_search = std::move(table);
      break;
    }
    case StrategyKind::RandAugment: {
      RandAugmentSearchResult search =
          grid_search_randaugment([&](const RandAugmentParams& params) {
            return estimate(validation, StrategySpec::randaug(params), ctx,
                            vopts)
                .report.ece;
          });
      search.seed = config.seed;
      resolved.n_r = search.best.n_r;
      resolved.magnitude = search.best.m;
      result.randaugment_search = std::move(search);
      break;
    }
    case StrategyKind::Taa: {
      RngStream rng = RngStream(config.seed).derive("taa_search");
      TaaSearchResult search = search_taa(
          [&](const TaaCombination& combination) {
            return estimate(validation,
                            StrategySpec::taa_pooled(combination), ctx, vopts)
                .report.ece;
          },
          kTaaSearchIterations, rng);
      search.seed = config.seed;
      resolved.taa = pool_combinations(search.retained);
      result.taa_search = std::move(search);
      break;
    }
    default:
      break;
  }
  return resolved;
}

}  // namespace

RunResult run_experiment(const RunConfig& config,
                         const std::vector<QAItem>& items,
                         const PipelineContext& ctx) {
  if (config.n < 1) throw std::invalid_argument("run: n must be >= 1");
  if (config.repeats < 1)
    throw std::invalid_argument("run: repeats must be >= 1");

  RunResult result;
  result.config = config;
  result.split = split_validation_test(items, config.split_seed);

  std::vector<QAItem> validation = select_items(items, result.split.validation_ids);
  std::vector<QAItem> test = select_items(items, result.split.test_ids);

  result.resolved = config.strategy.needs_search()
                        ? resolve_by_search(config, validation, ctx, result)
                        : config.strategy;

  for (int r = 0; r < config.repeats; ++r) {
    std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    EstimateResult eval =
        estimate(test, result.resolved, ctx, options_for(config, seed, r));
    RepeatOutcome outcome;
    outcome.seed = seed;
    outcome.report = std::move(eval.report);
    outcome.records = std::move(eval.records);
    outcome.predictions = std::move(eval.predictions);
    outcome.failed_ids = std::move(eval.failed_ids);
    result.repeats.push_back(std::move(outcome));
  }

  double ece_sum = 0.0, acc_sum = 0.0, mci_sum = 0.0;
  std::size_t mci_count = 0;
  for (const auto& repeat : result.repeats) {
    ece_sum += repeat.report.ece;
    acc_sum += repeat.report.accuracy;
    if (repeat.report.mean_confidence_incorrect.has_value()) {
      mci_sum += *repeat.report.mean_confidence_incorrect;
      ++mci_count;
    }
  }
  auto repeats = static_cast<double>(result.repeats.size());
  result.avg_ece = ece_sum / repeats;
  result.avg_accuracy = acc_sum / repeats;
  if (mci_count > 0)
    result.avg_mean_confidence_incorrect =
        mci_sum / static_cast<double>(mci_count);
  return result;
}

// ---------------------------------------------------------------------------
// Parameter transfer

namespace {

json taa_combination_to_json(const TaaCombination& combination) {
  json policies = json::array();
  for (const auto& policy : combination.policies) {
    json ops = json::array();
    for (const auto& op : policy.ops)
      ops.push_back({{"kind", std::string(op_kind_name(op.kind))},
                     {"prob", op.prob},
                     {"m", op.m.alpha}});
    policies.push_back(ops);
  }
  return policies;
}

TaaCombination taa_combination_from_json(const json& policies) {
  TaaCombination combination;
  for (const auto& policy_json : policies) {
    TaaPolicy policy;
    for (const auto& op_json : policy_json) {
      TaaEditOp op;
      op.kind = op_kind_from_name(op_json.at("kind").get<std::string>());
      op.prob = op_json.at("prob").get<double>();
      op.m = Magnitude{op_json.at("m").get<double>()};
      policy.ops.push_back(op);
    }
    combination.policies.push_back(std::move(policy));
  }
  return combination;
}

constexpr int kParamsFormatVersion = 1;

}  // namespace

void save_params(const RunResult& result, const std::string& path) {
  const StrategySpec& resolved = result.resolved;
  json doc;
  doc["format_version"] = kParamsFormatVersion;
  doc["source"] = {
      {"dataset", std::string(dataset_kind_name(result.config.dataset))},
      {"model", result.config.endpoint.model},
      {"data", result.config.data_path},
      {"seed", result.config.seed}};

  switch (resolved.kind) {
    case StrategyKind::SingleOp:
      doc["strategy"] = "single_op";
      doc["single_op"] = {{"op", std::string(op_kind_name(resolved.op))}};
      if (resolved.magnitude.has_value())
        doc["single_op"]["m"] = resolved.magnitude->alpha;
      break;
    case StrategyKind::RandAugment: {
      RandAugmentParams params = resolved.randaugment_params();
      doc["strategy"] = "randaugment";
      doc["randaugment"] = {{"n_r", params.n_r}, {"m", params.m.alpha}};
      break;
    }
    case StrategyKind::Taa:
      doc["strategy"] = "taa";
      doc["taa"] = {{"policies", taa_combination_to_json(*resolved.taa)}};
      break;
    default:
      throw std::invalid_argument(
          "save_params: strategy carries no transferable parameters: " +
          resolved.label());
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write params file: " + path);
  out << doc.dump(2) << '\n';
}

LoadedParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open params file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  int version = doc.value("format_version", -1);
  if (version != kParamsFormatVersion)
    throw std::runtime_error(path + ": params format_version " +
                             std::to_string(version) + " unsupported (want " +
                             std::to_string(kParamsFormatVersion) + ")");

  LoadedParams loaded;
  std::string strategy = doc.at("strategy").get<std::string>();
  if (strategy == "single_op") {
    const json& spec = doc.at("single_op");
    auto op = op_kind_from_name(spec.at("op").get<std::string>());
    std::optional<Magnitude> m;
    if (spec.contains("m")) m = Magnitude{spec.at("m").get<double>()};
    loaded.resolved = StrategySpec::single_op(op, m);
  } else if (strategy == "randaugment") {
    const json& spec = doc.at("randaugment");
    loaded.resolved = StrategySpec::randaug(RandAugmentParams{
        spec.at("n_r").get<int>(), Magnitude{spec.at("m").get<double>()}});
  } else if (strategy == "taa") {
    loaded.resolved = StrategySpec::taa_pooled(
        taa_combination_from_json(doc.at("taa").at("policies")));
  } else {
    throw std::runtime_error(path + ": unknown strategy: " + strategy);
  }

  if (doc.contains("source")) {
    const json& source = doc.at("source");
    loaded.source_label = "dataset=" +
                          source.value("dataset", std::string("?")) +
                          ", model=" + source.value("model", std::string("?"));
  }
  return loaded;
}

RunResult run_transfer(const std::string& params_path,
                       const RunConfig& target_config,
                       const std::vector<QAItem>& items,
                       const PipelineContext& ctx) {
  LoadedParams loaded = load_params(params_path);
  RunConfig config = target_config;
  config.strategy = loaded.resolved;
  RunResult result = run_experiment(config, items, ctx);
  result.source_label = loaded.source_label;
  return result;
}

// ---------------------------------------------------------------------------
// Report emission

namespace {

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string ece_x100(double ece) { return format_double(ece * 100.0, "%.2f"); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
}

json report_to_json(const CalibrationReport& report) {
  json bins = json::array();
  for (const auto& bin : report.bins)
    bins.push_back({{"left", bin.left},
                    {"right", bin.right},
                    {"count", bin.count},
                    {"mean_confidence", bin.mean_confidence},
                    {"accuracy", bin.accuracy}});
  json doc = {{"ece", report.ece},
              {"ece_x100", report.ece * 100.0},
              {"accuracy", report.accuracy},
              {"record_count", report.record_count},
              {"failed_items", report.failed_items},
              {"bins", bins}};
  if (report.mean_confidence_incorrect.has_value())
    doc["mean_confidence_incorrect"] = *report.mean_confidence_incorrect;
  else
    doc["mean_confidence_incorrect"] = nullptr;
  return doc;
}

}  // namespace

void emit_report(const RunResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);

  // summary.txt
  {
    std::ostringstream out;
    out << "run summary\n";
    out << "===========\n";
    out << "strategy:   " << result.resolved.label() << "\n";
    out << "dataset:    "
        << dataset_kind_name(result.config.dataset) << " ("
        << result.config.data_path << ")\n";
    out << "model:      " << (result.config.use_mock
                                  ? "mock"
                                  : result.config.endpoint.model)
        << "\n";
    if (!result.source_label.empty())
      out << "source:     " << result.source_label << " (transferred)\n";
    out << "split:      " << result.split.validation_ids.size()
        << " validation / " << result.split.test_ids.size()
        << " test (seed " << result.split.seed << ")\n";
    out << "n:          " << result.config.n << "\n";
    out << "bins:       " << result.config.bins << "\n";
    out << "\nper-repeat metrics\n";
    out << "repeat\tseed\tECE(x100)\taccuracy\tmean_conf_incorrect\tfailed\n";
    for (std::size_t r = 0; r < result.repeats.size(); ++r) {
      const auto& repeat = result.repeats[r];
      out << r << "\t" << repeat.seed << "\t" << ece_x100(repeat.report.ece)
          << "\t" << format_double(repeat.report.accuracy, "%.4f") << "\t"
          << (repeat.report.mean_confidence_incorrect.has_value()
                  ? format_double(*repeat.report.mean_confidence_incorrect,
                                  "%.4f")
                  : "n/a")
          << "\t" << repeat.failed_ids.size() << "\n";
    }
    out << "\naveraged over " << result.repeats.size() << " repeat(s)\n";
    out << "ECE (x100):           " << ece_x100(result.avg_ece) << "\n";
    out << "accuracy:             "
        << format_double(result.avg_accuracy, "%.4f") << "\n";
    out << "mean conf incorrect:  "
        << (result.avg_mean_confidence_incorrect.has_value()
                ? format_double(*result.avg_mean_confidence_incorrect, "%.4f")
                : "n/a")
        << "\n";
    write_file(dir / "summary.txt", out.str());
  }

  // summary.json
  {
    json repeats = json::array();
    for (std::size_t r = 0; r < result.repeats.size(); ++r) {
      json entry = {{"repeat", r},
                    {"seed", result.repeats[r].seed},
                    {"failed_ids", result.repeats[r].failed_ids},
                    {"report", report_to_json(result.repeats[r].report)}};
      repeats.push_back(entry);
    }
    json doc = {{"strategy", result.resolved.label()},
                {"dataset", std::string(dataset_kind_name(result.config.dataset))},
                {"model", result.config.use_mock ? "mock"
                                                 : result.config.endpoint.model},
                {"n", result.config.n},
                {"bins", result.config.bins},
                {"seed", result.config.seed},
                {"split_seed", result.config.split_seed},
                {"avg", {{"ece", result.avg_ece},
                         {"ece_x100", result.avg_ece * 100.0},
                         {"accuracy", result.avg_accuracy}}},
                {"repeats", repeats}};
    if (result.avg_mean_confidence_incorrect.has_value())
      doc["avg"]["mean_confidence_incorrect"] =
          *result.avg_mean_confidence_incorrect;
    else
      doc["avg"]["mean_confidence_incorrect"] = nullptr;
    if (!result.source_label.empty()) doc["source"] = result.source_label;
    if (result.magnitude_search.has_value()) {
      json table = json::array();
      for (const auto& entry : *result.magnitude_search)
        table.push_back({{"m", entry.m.alpha}, {"ece", entry.ece}});
      doc["magnitude_search"] = table;
    }
    if (result.randaugment_search.has_value()) {
      json table = json::array();
      for (const auto& entry : result.randaugment_search->table)
        table.push_back({{"n_r", entry.params.n_r},
                         {"m", entry.params.m.alpha},
                         {"ece", entry.ece}});
      doc["randaugment_search"] = {
          {"best", {{"n_r", result.randaugment_search->best.n_r},
                    {"m", result.randaugment_search->best.m.alpha}}},
          {"table", table}};
    }
    if (result.taa_search.has_value()) {
      json table = json::array();
      for (const auto& entry : result.taa_search->table)
        table.push_back({{"label", entry.combination.label()},
                         {"ece", entry.ece}});
      doc["taa_search"] = {{"table", table},
                           {"retained", result.taa_search->retained.size()}};
    }
    write_file(dir / "summary.json", doc.dump(2) + "\n");
  }

  // bins.tsv
  {
    std::ostringstream out;
    out << "repeat\tbin\tleft\tright\tcount\tmean_confidence\taccuracy\n";
    for (std::size_t r = 0; r < result.repeats.size(); ++r) {
      const auto& bins = result.repeats[r].report.bins;
      for (std::size_t b = 0; b < bins.size(); ++b) {
        out << r << "\t" << b << "\t" << format_double(bins[b].left, "%.6f")
            << "\t" << format_double(bins[b].right, "%.6f") << "\t"
            << bins[b].count << "\t"
            << format_double(bins[b].mean_confidence, "%.6f") << "\t"
            << format_double(bins[b].accuracy, "%.6f") << "\n";
      }
    }
    write_file(dir / "bins.tsv", out.str());
  }

  // records.jsonl
  {
    std::ostringstream out;
    for (std::size_t r = 0; r < result.repeats.size(); ++r) {
      for (const auto& record : result.repeats[r].records) {
        json entry = {{"repeat", r},
                      {"id", record.question_id},
                      {"kind", std::string(task_kind_name(record.kind))},
                      {"majority", record.majority.canonical},
                      {"majority_valid", record.majority.valid},
                      {"confidence", record.confidence},
                      {"gold", record.gold.canonical},
                      {"correct", record.correct}};
        out << entry.dump() << "\n";
      }
    }
    write_file(dir / "records.jsonl", out.str());
  }

  // predictions.jsonl
  {
    std::ostringstream out;
    for (std::size_t r = 0; r < result.repeats.size(); ++r) {
      for (const auto& prediction : result.repeats[r].predictions) {
        json entry = {{"repeat", r},
                      {"id", prediction.question_id},
                      {"index", prediction.index},
                      {"text", prediction.augmented_text},
                      {"raw", prediction.raw_response},
                      {"answer", prediction.answer.canonical},
                      {"answer_valid", prediction.answer.valid}};
        out << entry.dump() << "\n";
      }
    }
    write_file(dir / "predictions.jsonl", out.str());
  }

  write_file(dir / "config.txt", config_snapshot(result.config));

  if (result.resolved.kind == StrategyKind::SingleOp ||
      result.resolved.kind == StrategyKind::RandAugment ||
      result.resolved.kind == StrategyKind::Taa) {
    save_params(result, (dir / "params.json").string());
  }
}

// ---------------------------------------------------------------------------
// Config files

std::map<std::string, std::string> parse_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);

  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = line;
    auto first = stripped.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (stripped[first] == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected `key = value`");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string()
                                    : s.substr(b, e - b + 1);
    };
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty key");
    entries[key] = value;
  }
  return entries;
}

namespace {

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("expected a boolean, got: " + value);
}

}  // namespace

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "dataset") config.dataset = dataset_kind_from_name(value);
  else if (key == "data") config.data_path = value;
  else if (key == "strategy") {
    StrategySpec parsed = StrategySpec::parse(value);
    // magnitude/nr knobs apply independently of key order
    parsed.magnitude = config.strategy.magnitude;
    parsed.n_r = config.strategy.n_r;
    config.strategy = parsed;
  } else if (key == "magnitude") {
    if (value == "search") config.strategy.magnitude = std::nullopt;
    else config.strategy.magnitude = Magnitude::validated(std::stod(value));
  } else if (key == "nr") {
    if (value == "search") {
      config.strategy.n_r = std::nullopt;
    } else {
      int n_r = std::stoi(value);
      if (n_r < 1 || n_r > 3)
        throw std::invalid_argument("nr must be in {1, 2, 3}");
      config.strategy.n_r = n_r;
    }
  } else if (key == "n") config.n = std::stoi(value);
  else if (key == "repeats") config.repeats = std::stoi(value);
  else if (key == "seed") config.seed = std::stoull(value);
  else if (key == "split_seed") config.split_seed = std::stoull(value);
  else if (key == "bins") config.bins = static_cast<std::size_t>(std::stoul(value));
  else if (key == "endpoint_url") config.endpoint.base_url = value;
  else if (key == "model") config.endpoint.model = value;
  else if (key == "api_key_env") config.endpoint.api_key_env = value;
  else if (key == "timeout_seconds") config.endpoint.timeout_seconds = std::stod(value);
  else if (key == "max_retries") config.endpoint.max_retries = std::stoi(value);
  else if (key == "max_parallel") config.endpoint.max_parallel = std::stoi(value);
  else if (key == "initial_backoff_ms") config.endpoint.initial_backoff_ms = std::stoi(value);
  else if (key == "temperature") config.prediction_temperature = std::stod(value);
  else if (key == "cache_dir") config.cache_dir = value;
  else if (key == "out") config.out_dir = value;
  else if (key == "mock") config.use_mock = parse_bool(value);
  else if (key == "lexicon") config.lexicon_path = value;
  else if (key == "stopwords") config.stopwords_path = value;
  else if (key == "translate_url") config.translate_url = value;
  else if (key == "failure_budget") config.failure_budget = std::stod(value);
  else if (key == "params") config.params_path = value;
  else throw std::invalid_argument("unknown config key: " + key);
}

std::string config_snapshot(const RunConfig& config) {
  std::ostringstream out;
  out << "dataset = " << dataset_kind_name(config.dataset) << "\n";
  out << "data = " << config.data_path << "\n";
  out << "strategy = " << strategy_config_name(config.strategy) << "\n";
  if (config.strategy.kind == StrategyKind::SingleOp &&
      config.strategy.op != AugmentOpKind::BackTranslation) {
    out << "magnitude = "
        << (config.strategy.magnitude.has_value()
                ? format_double(config.strategy.magnitude->alpha, "%.1f")
                : "search")
        << "\n";
  }
  if (config.strategy.kind == StrategyKind::RandAugment) {
    out << "nr = "
        << (config.strategy.n_r.has_value()
                ? std::to_string(*config.strategy.n_r)
                : "search")
        << "\n";
    out << "magnitude = "
        << (config.strategy.magnitude.has_value()
                ? format_double(config.strategy.magnitude->alpha, "%.1f")
                : "search")
        << "\n";
  }
  out << "n = " << config.n << "\n";
  out << "repeats = " << config.repeats << "\n";
  out << "seed = " << config.seed << "\n";
  out << "split_seed = " << config.split_seed << "\n";
  out << "bins = " << config.bins << "\n";
  out << "endpoint_url = " << config.endpoint.base_url << "\n";
  out << "model = " << config.endpoint.model << "\n";
  out << "api_key_env = " << config.endpoint.api_key_env << "\n";
  out << "timeout_seconds = "
      << format_double(config.endpoint.timeout_seconds, "%.3f") << "\n";
  out << "max_retries = " << config.endpoint.max_retries << "\n";
  out << "max_parallel = " << config.endpoint.max_parallel << "\n";
  out << "initial_backoff_ms = " << config.endpoint.initial_backoff_ms << "\n";
  out << "temperature = "
      << format_double(config.prediction_temperature, "%.3f") << "\n";
  out << "cache_dir = " << config.cache_dir << "\n";
  out << "out = " << config.out_dir << "\n";
  out << "mock = " << (config.use_mock ? "true" : "false") << "\n";
  out << "lexicon = " << config.lexicon_path << "\n";
  out << "stopwords = " << config.stopwords_path << "\n";
  out << "translate_url = " << config.translate_url << "\n";
  out << "failure_budget = " << format_double(config.failure_budget, "%.3f")
      << "\n";
  if (!config.params_path.empty())
    out << "params = " << config.params_path << "\n";
  return out.str();
}

}  // namespace augcal
