#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "augcal/rng.hpp"
#include "augcal/runner.hpp"

using namespace augcal;
namespace fs = std::filesystem;

namespace {

SynonymLexicon test_lexicon() {
  SynonymLexicon lex;
  lex.add("cat", {"feline", "kitty"});
  lex.add("dog", {"hound", "puppy"});
  lex.add("run", {"sprint", "dash"});
  lex.add("fast", {"quick", "rapid"});
  lex.add("big", {"large", "huge"});
  lex.add("house", {"home", "dwelling"});
  lex.add("red", {"crimson", "scarlet"});
  lex.add("old", {"ancient", "aged"});
  return lex;
}

StopwordList test_stopwords() {
  StopwordList list;
  for (const char* w : {"the", "a", "is", "and", "does", "in"}) list.add(w);
  return list;
}

std::vector<QAItem> choice_items(std::size_t n, char gold = 'A') {
  const char* stems[] = {"does the big cat run fast in the red house",
                         "is the old dog fast and big in the house",
                         "does the red cat run in the old house",
                         "is the big dog old and fast in the house"};
  std::vector<QAItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    QAItem item;
    item.id = "q" + std::to_string(i);
    item.question = std::string(stems[i % 4]) + " " + std::to_string(i) + "?";
    item.kind = TaskKind::MultipleChoice;
    item.options = {{'A', "Yes"}, {'B', "No"}, {'C', "Maybe"}};
    item.gold = NormalizedAnswer::letter(gold);
    items.push_back(item);
  }
  return items;
}

struct TestEnv {
  SynonymLexicon lexicon = test_lexicon();
  StopwordList stopwords = test_stopwords();
  IdentityTranslator translator;

  PipelineContext ctx(ChatClient& client, int workers = 4) {
    PipelineContext c;
    c.client = &client;
    c.lexicon = &lexicon;
    c.stopwords = &stopwords;
    c.translator = &translator;
    c.workers = workers;
    return c;
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir.string();
}

RunConfig base_config() {
  RunConfig config;
  config.dataset = DatasetKind::Canonical;
  config.data_path = "in-memory";
  config.endpoint.model = "mock-model";
  config.n = 5;
  config.repeats = 1;
  config.seed = 42;
  config.split_seed = 42;
  config.bins = 10;
  config.use_mock = true;
  return config;
}

}  // namespace

TEST_CASE("strategy parsing and labels") {
  CHECK(StrategySpec::parse("sampling").kind == StrategyKind::Sampling);
  CHECK(StrategySpec::parse("paraphrase").kind == StrategyKind::Paraphrase);
  CHECK(StrategySpec::parse("sr").op == AugmentOpKind::SynonymReplacement);
  CHECK(StrategySpec::parse("random_deletion").op ==
        AugmentOpKind::RandomDeletion);
  CHECK(StrategySpec::parse("randaugment").kind == StrategyKind::RandAugment);
  CHECK(StrategySpec::parse("taa").kind == StrategyKind::Taa);
  CHECK_THROWS_AS(StrategySpec::parse("nope"), std::invalid_argument);

  CHECK(StrategySpec::parse("sr").needs_search());
  CHECK_FALSE(StrategySpec::parse("bt").needs_search());
  CHECK_FALSE(StrategySpec::parse("sampling").needs_search());
  CHECK(StrategySpec::parse("randaugment").needs_search());

  CHECK(StrategySpec::single_op(AugmentOpKind::RandomSwap, Magnitude{0.2})
            .label() == "random_swap(m=0.2)");
  CHECK(StrategySpec::randaug(RandAugmentParams{2, Magnitude{0.3}}).label() ==
        "randaugment(n_r=2, m=0.3)");
}

TEST_CASE("sampling variants are n copies of the question") {
  TestEnv env;
  MockChatClient mock([](const ChatRequest&) { return "Answer: A"; });
  auto ctx = env.ctx(mock);
  auto items = choice_items(1);
  auto variants =
      build_variants(items[0], StrategySpec::sampling(), 5, ctx, 42);
  REQUIRE(variants.size() == 5);
  for (const auto& v : variants) CHECK(v == items[0].question);
}

TEST_CASE("single-op variants on a one-token question stay unchanged") {
  TestEnv env;
  MockChatClient mock([](const ChatRequest&) { return "Answer: A"; });
  auto ctx = env.ctx(mock);
  QAItem item;
  item.id = "one";
  item.question = "hello";
  item.kind = TaskKind::MultipleChoice;
  item.options = {{'A', "Yes"}, {'B', "No"}};
  item.gold = NormalizedAnswer::letter('A');

  auto variants = build_variants(
      item, StrategySpec::single_op(AugmentOpKind::RandomSwap, Magnitude{0.1}),
      5, ctx, 42);
  for (const auto& v : variants) CHECK(v == "hello");
}

TEST_CASE("randaugment variants replay from derived streams") {
  TestEnv env;
  MockChatClient mock([](const ChatRequest&) { return "Answer: A"; });
  auto ctx = env.ctx(mock);
  auto items = choice_items(3);
  RandAugmentParams params{2, Magnitude{0.2}};

  auto variants = build_variants(items[1], StrategySpec::randaug(params), 5,
                                 ctx, 900);
  AugmentContext actx{&env.lexicon, &env.stopwords, &env.translator};
  for (int i = 0; i < 5; ++i) {
    RngStream stream = RngStream(900)
                           .derive(items[1].id)
                           .derive(static_cast<std::uint64_t>(i));
    CHECK(variants[static_cast<std::size_t>(i)] ==
          randaugment_apply(params, items[1].question, actx, stream));
  }
}

TEST_CASE("adding items does not perturb existing variants") {
  TestEnv env;
  MockChatClient mock([](const ChatRequest&) { return "Answer: A"; });
  auto ctx = env.ctx(mock);
  auto strategy =
      StrategySpec::single_op(AugmentOpKind::SynonymReplacement, Magnitude{0.3});
  auto small = choice_items(2);
  auto big = choice_items(4);
  for (std::size_t i = 0; i < small.size(); ++i)
    CHECK(build_variants(small[i], strategy, 5, ctx, 7) ==
          build_variants(big[i], strategy, 5, ctx, 7));
}

TEST_CASE("paraphrase variants come from the paraphrase endpoint") {
  TestEnv env;
  MockChatClient mock([](const ChatRequest& req) {
    if (req.system == kParaphraseInstruction)
      return "P" + std::to_string(req.request_index) + ": " + req.user;
    return std::string("Answer: A");
  });
  auto ctx = env.ctx(mock);
  auto items = choice_items(1);
  auto variants =
      build_variants(items[0], StrategySpec::paraphrase(), 3, ctx, 42);
  CHECK(variants[0] == "P0: " + items[0].question);
  CHECK(variants[1] == "P1: " + items[0].question);
  CHECK(variants[2] == "P2: " + items[0].question);
}

TEST_CASE("unresolved strategies are rejected") {
  TestEnv env;
  MockChatClient mock([](const ChatRequest&) { return "Answer: A"; });
  auto ctx = env.ctx(mock);
  auto items = choice_items(2);
  CHECK_THROWS_AS(build_variants(items[0], StrategySpec::parse("sr"), 5, ctx,
                                 42),
                  std::invalid_argument);
  EstimateOptions opts;
  CHECK_THROWS_AS(estimate(items, StrategySpec::parse("randaugment"), ctx,
                           opts),
                  std::invalid_argument);
}

TEST_CASE("a unanimous correct mock yields perfect calibration") {
  TestEnv env;
  MockChatClient mock([](const ChatRequest&) {
    return "Explanation: sure.\nAnswer: A";
  });
  auto ctx = env.ctx(mock);
  auto items = choice_items(6, 'A');

  EstimateOptions opts;
  opts.seed = 42;
  auto result = estimate(items, StrategySpec::sampling(), ctx, opts);
  REQUIRE(result.records.size() == 6);
  for (const auto& record : result.records) {
    CHECK(record.confidence == 1.0);
    CHECK(record.correct);
  }
  CHECK(result.report.accuracy == 1.0);
  CHECK(result.report.ece == 0.0);
  CHECK(result.predictions.size() == 30);
}

TEST_CASE("per-index answers aggregate to the majority with C from Eq-style counting") {
  TestEnv env;
  // A, A, B, A, C over the five indices; gold B.
  MockChatClient mock([](const ChatRequest& req) {
    const char* answers = "AABAC";
    return std::string("Answer: ") + answers[req.request_index % 5];
  });
  auto ctx = env.ctx(mock);
  auto items = choice_items(4, 'B');

  EstimateOptions opts;
  auto result = estimate(items, StrategySpec::sampling(), ctx, opts);
  for (const auto& record : result.records) {
    CHECK(record.majority.canonical == "A");
    CHECK(record.confidence == doctest::Approx(0.6));
    CHECK_FALSE(record.correct);
  }
  CHECK(*result.report.mean_confidence_incorrect == doctest::Approx(0.6));
}

TEST_CASE("prediction calls use temperature 0.7 and paraphrase generation 0") {
  TestEnv env;
  std::vector<double> temps;
  std::mutex mu;
  MockChatClient mock([&](const ChatRequest& req) {
    {
      std::lock_guard<std::mutex> lock(mu);
      temps.push_back(req.temperature);
    }
    if (req.system == kParaphraseInstruction) return req.user;
    return std::string("Answer: A");
  });
  auto ctx = env.ctx(mock, 1);
  auto items = choice_items(1);

  EstimateOptions opts;
  opts.n = 2;
  estimate(items, StrategySpec::paraphrase(), ctx, opts);
  REQUIRE(temps.size() == 4);  // 2 paraphrase + 2 prediction calls
  CHECK(temps[0] == 0.0);
  CHECK(temps[1] == 0.0);
  CHECK(temps[2] == 0.7);
  CHECK(temps[3] == 0.7);
}

TEST_CASE("estimate matches an independent end-to-end recomputation") {
  TestEnv env;
  MockChatClient mock(MockChatClient::hashed_responder(3, true));
  auto ctx = env.ctx(mock);
  auto items = choice_items(20, 'B');

  EstimateOptions opts;
  opts.seed = 5;
  auto strategy =
      StrategySpec::single_op(AugmentOpKind::SynonymReplacement, Magnitude{0.2});
  auto result = estimate(items, strategy, ctx, opts);

  // Recompute every metric from the prediction records alone.
  std::vector<ConfidenceRecord> rebuilt;
  for (const auto& item : items) {
    std::vector<NormalizedAnswer> answers;
    for (const auto& p : result.predictions)
      if (p.question_id == item.id)
        answers.push_back(extract_answer(p.raw_response, item.kind));
    REQUIRE(answers.size() == 5);
    auto [majority, confidence] = aggregate_consistency(answers, item.kind);
    ConfidenceRecord record;
    record.question_id = item.id;
    record.kind = item.kind;
    record.majority = majority;
    record.confidence = confidence;
    record.gold = item.gold;
    record.correct = answers_equal(majority, item.gold, item.kind);
    rebuilt.push_back(record);
  }
  auto report = make_report(rebuilt, opts.bins);
  CHECK(report.ece == result.report.ece);
  CHECK(report.accuracy == result.report.accuracy);
  REQUIRE(rebuilt.size() == result.records.size());
  for (std::size_t i = 0; i < rebuilt.size(); ++i) {
    CHECK(rebuilt[i].confidence == result.records[i].confidence);
    CHECK(rebuilt[i].correct == result.records[i].correct);
  }
}

TEST_CASE("estimate is identical across worker counts") {
  TestEnv env;
  MockChatClient mock(MockChatClient::hashed_responder(9, true));
  auto items = choice_items(12, 'A');
  EstimateOptions opts;
  opts.seed = 11;

  auto strategy = StrategySpec::randaug(RandAugmentParams{2, Magnitude{0.2}});
  auto serial_ctx = env.ctx(mock, 1);
  auto serial = estimate(items, strategy, serial_ctx, opts);
  auto parallel_ctx = env.ctx(mock, 8);
  auto parallel = estimate(items, strategy, parallel_ctx, opts);

  CHECK(serial.report.ece == parallel.report.ece);
  CHECK(serial.report.accuracy == parallel.report.accuracy);
  REQUIRE(serial.predictions.size() == parallel.predictions.size());
  for (std::size_t i = 0; i < serial.predictions.size(); ++i) {
    CHECK(serial.predictions[i].augmented_text ==
          parallel.predictions[i].augmented_text);
    CHECK(serial.predictions[i].raw_response ==
          parallel.predictions[i].raw_response);
  }
}

TEST_CASE("failures above the budget abort, below it are excluded") {
  TestEnv env;
  auto items = choice_items(12, 'A');

  // One failing item out of 12 (8.3%) stays under the 10% budget.
  MockChatClient one_bad([&items](const ChatRequest& req) {
    if (req.user.find(items[3].question) != std::string::npos)
      throw GatewayError(GatewayError::Kind::Transport, "scripted failure");
    return std::string("Answer: A");
  });
  auto ctx = env.ctx(one_bad);
  EstimateOptions opts;
  auto result = estimate(items, StrategySpec::sampling(), ctx, opts);
  CHECK(result.records.size() == 11);
  REQUIRE(result.failed_ids.size() == 1);
  CHECK(result.failed_ids[0] == "q3");
  CHECK(result.report.failed_items == 1);

  // Two failing items (16.7%) exceed the budget and abort.
  MockChatClient two_bad([&items](const ChatRequest& req) {
    if (req.user.find(items[3].question) != std::string::npos ||
        req.user.find(items[7].question) != std::string::npos)
      throw GatewayError(GatewayError::Kind::Transport, "scripted failure");
    return std::string("Answer: A");
  });
  auto ctx2 = env.ctx(two_bad);
  CHECK_THROWS_WITH_AS(estimate(items, StrategySpec::sampling(), ctx2, opts),
                       doctest::Contains("aborted"), std::runtime_error);
}

TEST_CASE("repeats with a prompt-deterministic mock are identical") {
  TestEnv env;
  MockChatClient mock(MockChatClient::hashed_responder(1, false));
  auto ctx = env.ctx(mock);
  auto items = choice_items(8, 'A');

  RunConfig config = base_config();
  config.strategy = StrategySpec::sampling();
  config.repeats = 3;

  auto result = run_experiment(config, items, ctx);
  REQUIRE(result.repeats.size() == 3);
  CHECK(result.repeats[0].report.ece == result.repeats[1].report.ece);
  CHECK(result.repeats[1].report.ece == result.repeats[2].report.ece);
  CHECK(result.avg_ece == result.repeats[0].report.ece);
  CHECK(result.avg_accuracy == result.repeats[0].report.accuracy);
}

TEST_CASE("a single repeat averages to itself") {
  TestEnv env;
  MockChatClient mock(MockChatClient::hashed_responder(2, true));
  auto ctx = env.ctx(mock);
  auto items = choice_items(8, 'A');

  RunConfig config = base_config();
  config.strategy =
      StrategySpec::single_op(AugmentOpKind::RandomDeletion, Magnitude{0.2});
  config.repeats = 1;

  auto result = run_experiment(config, items, ctx);
  REQUIRE(result.repeats.size() == 1);
  CHECK(result.avg_ece == result.repeats[0].report.ece);
  CHECK(result.avg_accuracy == result.repeats[0].report.accuracy);
}

TEST_CASE("randaugment search resolves to the planted optimum") {
  TestEnv env;
  auto items = choice_items(12, 'A');
  RunConfig config = base_config();
  config.strategy = StrategySpec::randaug(std::nullopt);
  config.repeats = 1;

  // Plant (1, 0.1): precompute its validation variants; the mock answers
  // gold consistently only for those texts, so every other grid point shows
  // a strictly positive ECE.
  RandAugmentParams planted{1, Magnitude{0.1}};
  auto split = split_validation_test(items, config.split_seed);
  auto validation = select_items(items, split.validation_ids);

  MockChatClient probe([](const ChatRequest&) { return "Answer: A"; });
  auto probe_ctx = env.ctx(probe);
  std::set<std::string> planted_texts;
  for (const auto& item : validation)
    for (const auto& text : build_variants(
             item, StrategySpec::randaug(planted), config.n, probe_ctx,
             config.seed))
      planted_texts.insert(text);

  MockChatClient mock([planted_texts](const ChatRequest& req) {
    for (const auto& text : planted_texts)
      if (req.user.find("\n\n" + text + "\n") != std::string::npos)
        return std::string("Answer: A");
    return std::string("Answer: ") +
           (req.request_index % 2 == 0 ? "B" : "C");
  });
  auto ctx = env.ctx(mock);

  auto result = run_experiment(config, items, ctx);
  REQUIRE(result.randaugment_search.has_value());
  CHECK(result.randaugment_search->best.n_r == planted.n_r);
  CHECK(result.randaugment_search->best.m.alpha == planted.m.alpha);
  CHECK(result.resolved.randaugment_params().n_r == planted.n_r);
  CHECK(result.randaugment_search->table.size() == 9);
}

TEST_CASE("magnitude search enumerates the menu and keeps the argmin") {
  TestEnv env;
  auto items = choice_items(10, 'A');
  RunConfig config = base_config();
  config.strategy = StrategySpec::single_op(AugmentOpKind::SynonymReplacement);
  config.repeats = 1;

  MockChatClient mock(MockChatClient::hashed_responder(4, true));
  auto ctx = env.ctx(mock);
  auto result = run_experiment(config, items, ctx);

  REQUIRE(result.magnitude_search.has_value());
  REQUIRE(result.magnitude_search->size() == 3);
  REQUIRE(result.resolved.magnitude.has_value());
  double best = result.resolved.magnitude->alpha;
  double best_ece = 2.0;
  for (const auto& entry : *result.magnitude_search)
    if (entry.ece < best_ece) {
      best_ece = entry.ece;
      CHECK(Magnitude::is_allowed(entry.m.alpha));
    }
  for (const auto& entry : *result.magnitude_search)
    CHECK(best_ece <= entry.ece);
  bool matches = false;
  for (const auto& entry : *result.magnitude_search)
    if (entry.m.alpha == best && entry.ece == best_ece) matches = true;
  CHECK(matches);
}

TEST_CASE("transfer reproduces a direct parameterized run bit-exactly") {
  TestEnv env;
  auto items = choice_items(14, 'B');
  MockChatClient mock(MockChatClient::hashed_responder(6, true));
  auto ctx = env.ctx(mock);

  // Run A: search, emit params.
  RunConfig config_a = base_config();
  config_a.strategy = StrategySpec::randaug(std::nullopt);
  auto result_a = run_experiment(config_a, items, ctx);
  auto params_path =
      (fs::temp_directory_path() / "augcal_params_test.json").string();
  save_params(result_a, params_path);

  // Run B, directly parameterized with A's resolved params.
  RunConfig config_b = base_config();
  config_b.seed = 1000;  // different pipeline seed, same split
  config_b.strategy =
      StrategySpec::randaug(result_a.resolved.randaugment_params());
  auto direct = run_experiment(config_b, items, ctx);

  // Transfer path: same target config, parameters from the file.
  RunConfig config_b_transfer = base_config();
  config_b_transfer.seed = 1000;
  config_b_transfer.strategy = StrategySpec::sampling();  // will be replaced
  auto transferred = run_transfer(params_path, config_b_transfer, items, ctx);

  CHECK_FALSE(transferred.source_label.empty());
  REQUIRE(direct.repeats.size() == transferred.repeats.size());
  CHECK(direct.avg_ece == transferred.avg_ece);
  CHECK(direct.avg_accuracy == transferred.avg_accuracy);
  for (std::size_t r = 0; r < direct.repeats.size(); ++r) {
    CHECK(direct.repeats[r].report.ece == transferred.repeats[r].report.ece);
    CHECK(direct.repeats[r].report.accuracy ==
          transferred.repeats[r].report.accuracy);
  }
}

TEST_CASE("params files round trip and reject other versions") {
  RunConfig config = base_config();
  RunResult result;
  result.config = config;
  result.resolved = StrategySpec::randaug(RandAugmentParams{2, Magnitude{0.3}});

  auto path = (fs::temp_directory_path() / "augcal_params_rt.json").string();
  save_params(result, path);
  auto loaded = load_params(path);
  CHECK(loaded.resolved.kind == StrategyKind::RandAugment);
  CHECK(loaded.resolved.randaugment_params().n_r == 2);
  CHECK(loaded.resolved.randaugment_params().m.alpha == 0.3);
  CHECK(loaded.source_label.find("mock-model") != std::string::npos);

  CHECK_THROWS_AS(load_params("/nonexistent/params.json"),
                  std::runtime_error);

  std::ofstream bad(path);
  bad << R"({"format_version": 99, "strategy": "randaugment"})";
  bad.close();
  CHECK_THROWS_WITH_AS(load_params(path), doctest::Contains("format_version"),
                       std::runtime_error);
}

TEST_CASE("taa params round trip preserves the pooled policies") {
  RunResult result;
  result.config = base_config();
  RngStream rng(15);
  TaaCombination pooled = pool_combinations({sample_taa_combination(rng),
                                             sample_taa_combination(rng),
                                             sample_taa_combination(rng)});
  result.resolved = StrategySpec::taa_pooled(pooled);

  auto path = (fs::temp_directory_path() / "augcal_params_taa.json").string();
  save_params(result, path);
  auto loaded = load_params(path);
  REQUIRE(loaded.resolved.taa.has_value());
  CHECK(loaded.resolved.taa->label() == pooled.label());
}

TEST_CASE("emit_report formats metrics in the x100 convention") {
  RunResult result;
  result.config = base_config();
  result.config.out_dir = fresh_dir("augcal_emit");
  result.resolved = StrategySpec::sampling();

  std::vector<ConfidenceRecord> records;
  ConfidenceRecord r;
  r.question_id = "q0";
  r.kind = TaskKind::MultipleChoice;
  r.majority = NormalizedAnswer::letter('A');
  r.confidence = 0.8;
  r.gold = NormalizedAnswer::letter('A');
  r.correct = true;
  records.push_back(r);

  RepeatOutcome outcome;
  outcome.seed = 42;
  outcome.records = records;
  outcome.report = make_report(records, 10);
  outcome.report.ece = 0.2055;  // forced for the formatting check
  result.repeats.push_back(outcome);
  result.avg_ece = 0.2055;
  result.avg_accuracy = 1.0;

  emit_report(result, result.config.out_dir);
  auto summary = read_file(fs::path(result.config.out_dir) / "summary.txt");
  CHECK(summary.find("20.55") != std::string::npos);
  CHECK(summary.find("n/a") != std::string::npos);

  // Re-emission is byte-identical.
  auto second_dir = fresh_dir("augcal_emit2");
  emit_report(result, second_dir);
  for (const char* name : {"summary.txt", "summary.json", "bins.tsv",
                           "records.jsonl", "predictions.jsonl",
                           "config.txt"}) {
    CHECK(read_file(fs::path(result.config.out_dir) / name) ==
          read_file(fs::path(second_dir) / name));
  }
}

TEST_CASE("emitted artifacts let reports be rebuilt offline") {
  TestEnv env;
  MockChatClient mock(MockChatClient::hashed_responder(21, true));
  auto ctx = env.ctx(mock);
  auto items = choice_items(10, 'A');

  RunConfig config = base_config();
  config.strategy = StrategySpec::sampling();
  config.out_dir = fresh_dir("augcal_rebuild");
  auto result = run_experiment(config, items, ctx);
  emit_report(result, config.out_dir);

  auto records_text =
      read_file(fs::path(config.out_dir) / "records.jsonl");
  std::istringstream lines(records_text);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++count;
  CHECK(count == result.repeats[0].records.size());

  auto predictions_text =
      read_file(fs::path(config.out_dir) / "predictions.jsonl");
  std::istringstream plines(predictions_text);
  count = 0;
  while (std::getline(plines, line))
    if (!line.empty()) ++count;
  CHECK(count == result.repeats[0].predictions.size());
}

TEST_CASE("config files parse, apply, and override in order") {
  auto path = (fs::temp_directory_path() / "augcal_config_test.cfg").string();
  {
    std::ofstream out(path);
    out << "# comment\n";
    out << "dataset = gsm8k\n";
    out << "strategy = rd\n";
    out << "magnitude = 0.2\n";
    out << "n = 7\n";
    out << "repeats = 2\n";
    out << "mock = true\n";
  }
  auto entries = parse_config_file(path);
  CHECK(entries.at("dataset") == "gsm8k");

  RunConfig config;
  for (const auto& [key, value] : entries)
    apply_config_entry(config, key, value);
  CHECK(config.dataset == DatasetKind::Gsm8k);
  CHECK(config.strategy.kind == StrategyKind::SingleOp);
  CHECK(config.strategy.op == AugmentOpKind::RandomDeletion);
  CHECK(config.strategy.magnitude->alpha == 0.2);
  CHECK(config.n == 7);
  CHECK(config.use_mock);

  // CLI-style override wins over the file value.
  apply_config_entry(config, "magnitude", "search");
  CHECK(config.strategy.needs_search());
  apply_config_entry(config, "magnitude", "0.3");
  CHECK(config.strategy.magnitude->alpha == 0.3);

  CHECK_THROWS_AS(apply_config_entry(config, "bogus_key", "1"),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_config_entry(config, "magnitude", "0.5"),
                  std::invalid_argument);
}

TEST_CASE("config snapshots reload to the same snapshot") {
  RunConfig config = base_config();
  config.strategy =
      StrategySpec::single_op(AugmentOpKind::SynonymReplacement, Magnitude{0.2});
  config.endpoint.base_url = "http://localhost:9999";
  auto snapshot = config_snapshot(config);

  auto path = (fs::temp_directory_path() / "augcal_snapshot.cfg").string();
  {
    std::ofstream out(path);
    out << snapshot;
  }
  RunConfig reloaded;
  for (const auto& [key, value] : parse_config_file(path))
    apply_config_entry(reloaded, key, value);
  CHECK(config_snapshot(reloaded) == snapshot);
}
