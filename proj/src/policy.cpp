#include "augcal/policy.hpp"

#include <algorithm>
#include <cstdio>

namespace augcal {

std::string RandAugmentParams::label() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "randaugment(n_r=%d, m=%.1f)", n_r, m.alpha);
  return buf;
}

std::string TaaCombination::label() const {
  std::string out = "taa[";
  for (std::size_t p = 0; p < policies.size(); ++p) {
    if (p > 0) out += "; ";
    for (std::size_t o = 0; o < policies[p].ops.size(); ++o) {
      const TaaEditOp& op = policies[p].ops[o];
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s%s(p=%.1f, m=%.1f)", o > 0 ? "," : "",
                    std::string(op_kind_name(op.kind)).c_str(), op.prob,
                    op.m.alpha);
      out += buf;
    }
  }
  out += "]";
  return out;
}

std::string randaugment_apply(const RandAugmentParams& params,
                              const std::string& text,
                              const AugmentContext& ctx, RngStream& rng) {
  // Partial Fisher-Yates over the five kinds: without replacement.
  AugmentOpKind kinds[] = {kAllOpKinds[0], kAllOpKinds[1], kAllOpKinds[2],
                           kAllOpKinds[3], kAllOpKinds[4]};
  RngStream select = rng.derive("select");
  int total = static_cast<int>(std::size(kinds));
  for (int i = 0; i < params.n_r; ++i) {
    int j = i + static_cast<int>(select.uniform_int(
                    static_cast<std::uint64_t>(total - i)));
    std::swap(kinds[i], kinds[j]);
  }

  std::string out = text;
  for (int j = 0; j < params.n_r; ++j) {
    RngStream op_stream = rng.derive(static_cast<std::uint64_t>(j));
    out = apply_op(kinds[j], params.m, out, ctx, op_stream);
  }
  return out;
}

std::string taa_apply(const TaaCombination& combination,
                      const std::string& text, const AugmentContext& ctx,
                      RngStream& rng) {
  if (combination.policies.empty())
    throw std::invalid_argument("taa_apply: combination has no policies");

  RngStream pick = rng.derive("pick");
  const TaaPolicy& policy =
      combination.policies[pick.uniform_int(combination.policies.size())];

  std::string out = text;
  for (std::size_t j = 0; j < policy.ops.size(); ++j) {
    const TaaEditOp& op = policy.ops[j];
    RngStream op_stream = rng.derive(static_cast<std::uint64_t>(j));
    if (op_stream.uniform_real() < op.prob)
      out = apply_op(op.kind, op.m, out, ctx, op_stream);
  }
  return out;
}

TaaCombination sample_taa_combination(RngStream& rng) {
  TaaCombination combination;
  for (int p = 0; p < kTaaPoliciesPerCombination; ++p) {
    TaaPolicy policy;
    for (int o = 0; o < kTaaOpsPerPolicy; ++o) {
      TaaEditOp op;
      op.kind = kAllOpKinds[rng.uniform_int(std::size(kAllOpKinds))];
      op.prob = kTaaProbabilityGrid[rng.uniform_int(
          std::size(kTaaProbabilityGrid))];
      op.m = Magnitude{
          kMagnitudeGrid[rng.uniform_int(std::size(kMagnitudeGrid))]};
      policy.ops.push_back(op);
    }
    combination.policies.push_back(std::move(policy));
  }
  return combination;
}

TaaCombination pool_combinations(
    const std::vector<TaaCombination>& retained) {
  TaaCombination pooled;
  for (const auto& combination : retained)
    for (const auto& policy : combination.policies)
      pooled.policies.push_back(policy);
  return pooled;
}

RandAugmentSearchResult grid_search_randaugment(
    const std::function<double(const RandAugmentParams&)>& evaluate) {
  RandAugmentSearchResult result;
  std::vector<std::pair<std::string, double>> partial;

  for (int n_r : kRandAugmentCounts) {
    for (double alpha : kMagnitudeGrid) {
      RandAugmentParams params{n_r, Magnitude{alpha}};
      double score = 0.0;
      try {
        score = evaluate(params);
      } catch (const std::exception& e) {
        throw SearchAborted(
            "grid search aborted at " + params.label() + ": " + e.what(),
            std::move(partial));
      }
      partial.emplace_back(params.label(), score);
      result.table.push_back({params, score});
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.table.size(); ++i)
    if (result.table[i].ece < result.table[best].ece) best = i;
  result.best = result.table[best].params;
  return result;
}

TaaSearchResult search_taa(
    const std::function<double(const TaaCombination&)>& evaluate,
    int iterations, RngStream& rng, int retain) {
  if (iterations < 1)
    throw std::invalid_argument("search_taa: iterations must be >= 1");

  // Sample every candidate up front so the draw sequence is independent of
  // evaluation scheduling.
  std::vector<TaaCombination> candidates;
  candidates.reserve(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    RngStream sample_stream = rng.derive("sample").derive(
        static_cast<std::uint64_t>(i));
    candidates.push_back(sample_taa_combination(sample_stream));
  }

  TaaSearchResult result;
  std::vector<std::pair<std::string, double>> partial;
  for (const auto& candidate : candidates) {
    double score = 0.0;
    try {
      score = evaluate(candidate);
    } catch (const std::exception& e) {
      throw SearchAborted(std::string("TAA search aborted: ") + e.what(),
                          std::move(partial));
    }
    partial.emplace_back(candidate.label(), score);
    result.table.push_back({candidate, score});
  }

  // Stable sort keeps earlier-sampled candidates first on ties.
  std::vector<std::size_t> order(result.table.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return result.table[a].ece < result.table[b].ece;
                   });
  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(retain),
                                           order.size());
  for (std::size_t i = 0; i < keep; ++i)
    result.retained.push_back(result.table[order[i]].combination);
  return result;
}

}  // namespace augcal
