#pragma once

#include <optional>
#include <string>
#include <vector>

#include "augcal/extraction.hpp"

namespace augcal {

// One LLM response for one augmented variant of a question.
struct PredictionRecord {
  std::string question_id;
  int index = 0;  // augmentation index, 0..n-1
  std::string augmented_text;
  std::string raw_response;
  NormalizedAnswer answer;
};

// Per-question aggregate: majority answer, consistency confidence,
// correctness against gold.
struct ConfidenceRecord {
  std::string question_id;
  TaskKind kind = TaskKind::MultipleChoice;
  NormalizedAnswer majority;
  double confidence = 0.0;  // in (0, 1], multiples of 1/n
  NormalizedAnswer gold;
  bool correct = false;
};

struct CalibrationBin {
  double left = 0.0;   // interval (left, right]
  double right = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;  // 0 for empty bins
  double accuracy = 0.0;         // 0 for empty bins
};

struct CalibrationReport {
  double ece = 0.0;
  double accuracy = 0.0;
  std::optional<double> mean_confidence_incorrect;
  std::vector<CalibrationBin> bins;
  std::size_t record_count = 0;
  std::size_t failed_items = 0;  // items excluded after retry exhaustion
};

// Consistency aggregation: majority = most frequent valid answer (equality
// via answers_equal, frequency ties broken by earliest first occurrence);
// confidence = count(majority) / n with n counting all answers including
// invalid ones. All-invalid lists aggregate to (invalid, 1/n).
std::pair<NormalizedAnswer, double> aggregate_consistency(
    const std::vector<NormalizedAnswer>& answers, TaskKind kind);

// Equal-width bins over (0,1]; confidence c lands in bin ceil(c*b)-1, with
// c=0 assigned to the first bin.
std::vector<CalibrationBin> reliability_bins(
    const std::vector<ConfidenceRecord>& records, std::size_t num_bins);

// ECE = sum over bins of (|B|/N) * |acc(B) - conf(B)|.
double ece(const std::vector<ConfidenceRecord>& records, std::size_t num_bins);

double accuracy(const std::vector<ConfidenceRecord>& records);

// Mean confidence over incorrect records; absent when every record is
// correct.
std::optional<double> mean_confidence_incorrect(
    const std::vector<ConfidenceRecord>& records);

CalibrationReport make_report(const std::vector<ConfidenceRecord>& records,
                              std::size_t num_bins);

}  // namespace augcal
