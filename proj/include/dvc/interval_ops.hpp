#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvc/types.hpp"

namespace dvc {

/// Temporal intersection-over-union. Symmetric, in [0, 1], 0 when disjoint.
double tiou(const TimeInterval& a, const TimeInterval& b);

struct MatchResult {
  std::size_t pred_index = 0;
  std::optional<std::size_t> gt_index;  // absent iff no groundtruth overlaps
  double tiou = 0.0;
};

/// Groundtruth index with the largest tIoU against `pred`; ties go to the
/// smaller index. Throws ValidationError on an empty groundtruth list.
MatchResult best_match(const TimeInterval& pred, std::span<const TimeInterval> gts);

/// Per-video proposal evaluation at one threshold.
struct ThresholdCounts {
  std::size_t matched_predictions = 0;
  std::size_t matched_groundtruth = 0;
};

struct VideoProposalEval {
  std::string video_id;
  std::size_t num_predictions = 0;
  std::size_t num_groundtruth = 0;
  std::vector<ThresholdCounts> counts;  // one per threshold
  bool no_predictions = false;
};

struct PRTable {
  std::vector<double> thresholds;
  std::vector<double> precision;  // corpus mean over videos, per threshold
  std::vector<double> recall;
  double avg_proposals_per_video = 0.0;
  std::size_t num_videos = 0;
  std::size_t zero_prediction_videos = 0;  // counted with precision 0
  std::vector<VideoProposalEval> per_video;
};

/// Per-threshold counts for one video. Each prediction is matched
/// independently (no one-to-one assignment).
VideoProposalEval evaluate_video_proposals(const std::string& video_id, std::span<const TimeInterval> preds,
                                           std::span<const TimeInterval> gt_union,
                                           std::span<const double> thresholds);

/// Corpus precision / recall. Every groundtruth video is evaluated against the
/// union of its annotation sets; videos without predictions score 0.
PRTable precision_recall(const Corpus& corpus, std::span<const double> thresholds, std::size_t jobs = 1);

/// Threshold validation shared by evaluation entry points: non-empty, each in (0, 1].
void validate_thresholds(std::span<const double> thresholds);

}  // namespace dvc
