#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dvc {

// Slack allowed when an annotated end time overshoots the video duration.
inline constexpr double kDurationSlack = 1e-6;

/// A [start, end] span in seconds.
struct TimeInterval {
  double start_s = 0.0;
  double end_s = 0.0;

  double length() const { return end_s - start_s; }
  double center() const { return 0.5 * (start_s + end_s); }
  bool valid() const { return start_s >= 0.0 && start_s < end_s; }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Half-open range of segment indices [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct VideoMeta {
  std::string video_id;
  double duration_s = 0.0;
  double fps = 25.0;
  std::size_t frames_per_segment = 64;

  double segment_duration() const { return static_cast<double>(frames_per_segment) / fps; }
  std::size_t segment_count() const;

  // Throws ValidationError when duration, fps or segment size are out of range.
  void validate() const;
};

/// Maps a time span onto the segments it touches. Always non-empty and
/// clamped to [0, segment_count).
IndexRange segment_range(const TimeInterval& interval, const VideoMeta& meta);

/// Dense row-major matrix of per-segment features.
struct FeatureTable {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  FeatureTable() = default;
  FeatureTable(std::size_t rows, std::size_t dim) : rows(rows), dim(dim), values(rows * dim, 0.0f) {}

  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<float> row(std::size_t i) { return {values.data() + i * dim, dim}; }

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

struct SegmentGrid {
  VideoMeta meta;
  std::optional<FeatureTable> features;
  std::string feature_tag = "basic";

  bool has_features() const { return features.has_value(); }
  std::size_t dim() const { return features ? features->dim : 0; }

  // Checks that the feature table, if any, has one row per segment.
  void validate() const;
};

/// One groundtruth segmentation of a video.
struct AnnotationSet {
  std::vector<TimeInterval> intervals;
  std::vector<std::string> sentences;

  std::size_t size() const { return intervals.size(); }
};

struct PredictionEntry {
  TimeInterval interval;
  std::optional<std::string> sentence;
  std::optional<double> proposal_score;
  std::optional<double> caption_logprob;
};

struct VideoRecord {
  VideoMeta meta;
  std::vector<AnnotationSet> annotations;
  std::vector<PredictionEntry> predictions;

  // Concatenation of every annotation set's intervals, in set order.
  std::vector<TimeInterval> groundtruth_union() const;
};

/// Videos keyed (and therefore iterated) by video id.
struct Corpus {
  std::map<std::string, VideoRecord> videos;

  const VideoRecord& at(const std::string& video_id) const;
  bool contains(const std::string& video_id) const { return videos.count(video_id) != 0; }
  std::size_t size() const { return videos.size(); }
};

/// Predictions as read from a submission file, keyed by video id.
using PredictionMap = std::map<std::string, std::vector<PredictionEntry>>;

}  // namespace dvc
