#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvc/types.hpp"

namespace dvc {

enum class Direction { kUni, kBi };
enum class PoolMode { kMean, kMax };

struct LocalContext {
  IndexRange before;
  IndexRange after;
};

/// Windows of window_ratio * |event| seconds immediately before and after the
/// event, clipped to the video and trimmed so they never share a segment with
/// the event itself. Empty at the video boundaries.
LocalContext local_context(const TimeInterval& event, const VideoMeta& meta, double window_ratio);

/// True on every segment outside segment_range(event).
std::vector<bool> global_context(const TimeInterval& event, const VideoMeta& meta);

/// Indices of the other events visible to `target`: earlier events only (uni)
/// or all other events (bi), in temporal order. `events` must be sorted by start.
std::vector<std::size_t> event_neighbors(std::span<const TimeInterval> events, std::size_t target, Direction direction);

/// Captions of events [0, target). Captioning is sequential: history for event
/// i is only defined once events 0..i-1 have captions.
std::vector<std::string> sentence_history(std::span<const std::string> captions, std::size_t target);

/// Element-wise mean or max over the selected rows; nullopt when the
/// selection is empty (callers substitute a zero vector).
std::optional<std::vector<double>> pool_features(const SegmentGrid& grid, std::span<const std::size_t> rows,
                                                 PoolMode mode);
std::optional<std::vector<double>> pool_features(const SegmentGrid& grid, IndexRange range, PoolMode mode);
std::optional<std::vector<double>> pool_features(const SegmentGrid& grid, const std::vector<bool>& mask, PoolMode mode);

struct EventContextBundle {
  std::size_t event_index = 0;
  TimeInterval event;
  IndexRange event_range;
  IndexRange local_before;
  IndexRange local_after;
  std::vector<bool> global_mask;
  std::vector<std::size_t> neighbor_events;
  std::vector<std::string> sentence_history;

  // Pooled vectors; zero vectors of dimension D stand in for empty contexts.
  std::vector<double> event_feature;
  std::vector<double> before_feature;
  std::vector<double> after_feature;
  std::vector<double> global_feature;
  bool empty_before = false;
  bool empty_after = false;
  bool empty_global = false;
};

struct ContextOptions {
  double window_ratio = 0.5;
  Direction direction = Direction::kBi;
  PoolMode pool = PoolMode::kMean;

  void validate() const;
};

/// One bundle per event. Events are processed in start-time order; `captions`
/// (optional, aligned with `events`) feeds the sentence history. Pooled
/// vectors are filled only when the grid carries features.
std::vector<EventContextBundle> build_context_bundles(const SegmentGrid& grid, std::span<const TimeInterval> events,
                                                      std::span<const std::string> captions,
                                                      const ContextOptions& options);

}  // namespace dvc
