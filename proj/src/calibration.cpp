#include "augcal/calibration.hpp"

#include <cmath>
#include <stdexcept>

namespace augcal {

std::pair<NormalizedAnswer, double> aggregate_consistency(
    const std::vector<NormalizedAnswer>& answers, TaskKind kind) {
  if (answers.empty())
    throw std::invalid_argument("aggregate_consistency: empty answer list");

  // Group valid answers by answers_equal, keeping first-occurrence order.
  struct Group {
    const NormalizedAnswer* representative;
    std::size_t count;
  };
  std::vector<Group> groups;
  for (const auto& answer : answers) {
    if (!answer.valid) continue;
    bool placed = false;
    for (auto& g : groups) {
      if (answers_equal(*g.representative, answer, kind)) {
        ++g.count;
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({&answer, 1});
  }

  double n = static_cast<double>(answers.size());
  if (groups.empty())
    return {NormalizedAnswer::invalid(), 1.0 / n};

  const Group* best = &groups.front();
  for (const auto& g : groups)
    if (g.count > best->count) best = &g;  // ties keep the earlier group
  return {*best->representative, static_cast<double>(best->count) / n};
}

namespace {

std::size_t bin_index(double confidence, std::size_t num_bins) {
  auto idx = static_cast<long>(
      std::ceil(confidence * static_cast<double>(num_bins))) - 1;
  if (idx < 0) idx = 0;  // confidence 0 lands in the first bin
  if (idx >= static_cast<long>(num_bins)) idx = static_cast<long>(num_bins) - 1;
  return static_cast<std::size_t>(idx);
}

}  // namespace

std::vector<CalibrationBin> reliability_bins(
    const std::vector<ConfidenceRecord>& records, std::size_t num_bins) {
  if (records.empty())
    throw std::invalid_argument("reliability_bins: empty record list");
  if (num_bins < 1)
    throw std::invalid_argument("reliability_bins: num_bins must be >= 1");

  std::vector<CalibrationBin> bins(num_bins);
  std::vector<double> conf_sum(num_bins, 0.0);
  std::vector<std::size_t> correct(num_bins, 0);
  for (std::size_t b = 0; b < num_bins; ++b) {
    bins[b].left = static_cast<double>(b) / static_cast<double>(num_bins);
    bins[b].right = static_cast<double>(b + 1) / static_cast<double>(num_bins);
  }
  for (const auto& r : records) {
    std::size_t b = bin_index(r.confidence, num_bins);
    ++bins[b].count;
    conf_sum[b] += r.confidence;
    if (r.correct) ++correct[b];
  }
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (bins[b].count == 0) continue;
    auto cnt = static_cast<double>(bins[b].count);
    bins[b].mean_confidence = conf_sum[b] / cnt;
    bins[b].accuracy = static_cast<double>(correct[b]) / cnt;
  }
  return bins;
}

double ece(const std::vector<ConfidenceRecord>& records,
           std::size_t num_bins) {
  auto bins = reliability_bins(records, num_bins);
  double total = static_cast<double>(records.size());
  double sum = 0.0;
  for (const auto& bin : bins) {
    if (bin.count == 0) continue;
    sum += (static_cast<double>(bin.count) / total) *
           std::fabs(bin.accuracy - bin.mean_confidence);
  }
  return sum;
}

double accuracy(const std::vector<ConfidenceRecord>& records) {
  if (records.empty()) throw std::invalid_argument("accuracy: empty records");
  std::size_t correct = 0;
  for (const auto& r : records)
    if (r.correct) ++correct;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::optional<double> mean_confidence_incorrect(
    const std::vector<ConfidenceRecord>& records) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (r.correct) continue;
    sum += r.confidence;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

CalibrationReport make_report(const std::vector<ConfidenceRecord>& records,
                              std::size_t num_bins) {
  CalibrationReport report;
  report.bins = reliability_bins(records, num_bins);
  report.ece = ece(records, num_bins);
  report.accuracy = accuracy(records);
  report.mean_confidence_incorrect = mean_confidence_incorrect(records);
  report.record_count = records.size();
  return report;
}

}  // namespace augcal
