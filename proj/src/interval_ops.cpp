#include "dvc/interval_ops.hpp"

#include <algorithm>
#include <cmath>

#include "dvc/error.hpp"
#include "dvc/parallel.hpp"

namespace dvc {

double tiou(const TimeInterval& a, const TimeInterval& b) {
  const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
  if (inter <= 0.0) return 0.0;
  const double uni = a.length() + b.length() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

MatchResult best_match(const TimeInterval& pred, std::span<const TimeInterval> gts) {
  if (gts.empty()) throw ValidationError("best_match: empty groundtruth list");
  MatchResult best;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const double v = tiou(pred, gts[g]);
    if (v > best.tiou) {
      best.tiou = v;
      best.gt_index = g;
    }
  }
  return best;
}

void validate_thresholds(std::span<const double> thresholds) {
  if (thresholds.empty()) throw ValidationError("tiou: at least one threshold is required");
  for (double t : thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("tiou thresholds must lie in (0, 1]");
  }
}

VideoProposalEval evaluate_video_proposals(const std::string& video_id, std::span<const TimeInterval> preds,
                                           std::span<const TimeInterval> gt_union,
                                           std::span<const double> thresholds) {
  VideoProposalEval out;
  out.video_id = video_id;
  out.num_predictions = preds.size();
  out.num_groundtruth = gt_union.size();
  out.no_predictions = preds.empty();

  // Best overlap seen by each prediction and by each groundtruth interval.
  std::vector<double> pred_best(preds.size(), 0.0);
  std::vector<double> gt_best(gt_union.size(), 0.0);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gt_union.size(); ++g) {
      const double v = tiou(preds[p], gt_union[g]);
      pred_best[p] = std::max(pred_best[p], v);
      gt_best[g] = std::max(gt_best[g], v);
    }
  }

  out.counts.reserve(thresholds.size());
  for (double t : thresholds) {
    ThresholdCounts c;
    c.matched_predictions = static_cast<std::size_t>(std::count_if(pred_best.begin(), pred_best.end(),
                                                                   [t](double v) { return v >= t; }));
    c.matched_groundtruth = static_cast<std::size_t>(std::count_if(gt_best.begin(), gt_best.end(),
                                                                   [t](double v) { return v >= t; }));
    out.counts.push_back(c);
  }
  return out;
}

PRTable precision_recall(const Corpus& corpus, std::span<const double> thresholds, std::size_t jobs) {
  validate_thresholds(thresholds);

  std::vector<const VideoRecord*> records;
  for (const auto& [vid, rec] : corpus.videos) {
    if (!rec.annotations.empty()) records.push_back(&rec);
  }

  PRTable table;
  table.thresholds.assign(thresholds.begin(), thresholds.end());
  table.per_video.resize(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const VideoRecord& rec = *records[i];
    std::vector<TimeInterval> preds;
    preds.reserve(rec.predictions.size());
    for (const auto& p : rec.predictions) preds.push_back(p.interval);
    table.per_video[i] = evaluate_video_proposals(rec.meta.video_id, preds, rec.groundtruth_union(), thresholds);
  });

  table.num_videos = records.size();
  table.precision.assign(thresholds.size(), 0.0);
  table.recall.assign(thresholds.size(), 0.0);
  if (records.empty()) return table;

  double total_proposals = 0.0;
  for (const auto& v : table.per_video) {
    total_proposals += static_cast<double>(v.num_predictions);
    if (v.no_predictions) ++table.zero_prediction_videos;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (v.num_predictions > 0) {
        table.precision[t] += static_cast<double>(v.counts[t].matched_predictions) / v.num_predictions;
      }
      if (v.num_groundtruth > 0) {
        table.recall[t] += static_cast<double>(v.counts[t].matched_groundtruth) / v.num_groundtruth;
      }
    }
  }
  const double n = static_cast<double>(records.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    table.precision[t] /= n;
    table.recall[t] /= n;
  }
  table.avg_proposals_per_video = total_proposals / n;
  return table;
}

}  // namespace dvc
