#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "augcal/augment.hpp"

namespace augcal {

struct RandAugmentParams {
  int n_r = 1;        // transformations per sample, in {1, 2, 3}
  Magnitude m{0.1};

  std::string label() const;
};

inline constexpr int kRandAugmentCounts[] = {1, 2, 3};
inline constexpr double kMagnitudeGrid[] = {0.1, 0.2, 0.3};
// TAA probability grid: deciles.
inline constexpr double kTaaProbabilityGrid[] = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                 0.6, 0.7, 0.8, 0.9, 1.0};
inline constexpr int kTaaPoliciesPerCombination = 4;   // N_t
inline constexpr int kTaaOpsPerPolicy = 2;             // T
inline constexpr int kTaaSearchIterations = 50;
inline constexpr int kTaaRetained = 3;

// One editing operation: a transformation, a call probability, a magnitude.
struct TaaEditOp {
  AugmentOpKind kind = AugmentOpKind::SynonymReplacement;
  double prob = 1.0;
  Magnitude m{0.1};
};

// An ordered sequence of T editing operations applied as O_T ∘ ... ∘ O_1.
struct TaaPolicy {
  std::vector<TaaEditOp> ops;
};

// N_t policies sampled together; one policy is drawn per augmentation.
// Pooled inference combinations (the retained 3 x N_t policies) use the
// same type.
struct TaaCombination {
  std::vector<TaaPolicy> policies;

  std::string label() const;
};

// Draws n_r distinct operator kinds (canonical order: SR, RS, RD, RI, BT)
// and applies them sequentially, each at magnitude m. Op j consumes the
// substream rng.derive(j); the kind draw consumes rng.derive("select").
std::string randaugment_apply(const RandAugmentParams& params,
                              const std::string& text,
                              const AugmentContext& ctx, RngStream& rng);

// Picks one policy uniformly (stream rng.derive("pick")), then walks its
// ops in order, applying op j with probability op.prob via substream
// rng.derive(j).
std::string taa_apply(const TaaCombination& combination,
                      const std::string& text, const AugmentContext& ctx,
                      RngStream& rng);

// Uniformly samples a combination over the kind, probability, and magnitude
// grids.
TaaCombination sample_taa_combination(RngStream& rng);

// Pools the policies of several combinations into one.
TaaCombination pool_combinations(const std::vector<TaaCombination>& retained);

struct GridSearchEntry {
  RandAugmentParams params;
  double ece = 0.0;
};

struct RandAugmentSearchResult {
  RandAugmentParams best;
  std::vector<GridSearchEntry> table;  // canonical order: n_r asc, then m asc
  std::uint64_t seed = 0;
};

struct TaaSearchEntry {
  TaaCombination combination;
  double ece = 0.0;
};

struct TaaSearchResult {
  std::vector<TaaCombination> retained;  // top-N by ascending ECE
  std::vector<TaaSearchEntry> table;     // in sampling order
  std::uint64_t seed = 0;
};

// Search failure; carries the candidates scored before the abort.
class SearchAborted : public std::runtime_error {
 public:
  SearchAborted(const std::string& what,
                std::vector<std::pair<std::string, double>> partial)
      : std::runtime_error(what), partial_table(std::move(partial)) {}

  std::vector<std::pair<std::string, double>> partial_table;
};

// Evaluates all 9 (n_r, m) grid points and returns the argmin by validation
// ECE; ties break toward the earlier candidate in canonical order.
RandAugmentSearchResult grid_search_randaugment(
    const std::function<double(const RandAugmentParams&)>& evaluate);

// Samples `iterations` random combinations, scores each, and retains the
// top `retain` by ascending ECE (earlier-sampled wins ties).
TaaSearchResult search_taa(
    const std::function<double(const TaaCombination&)>& evaluate,
    int iterations, RngStream& rng, int retain = kTaaRetained);

}  // namespace augcal
