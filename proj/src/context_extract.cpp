#include "dvc/context_extract.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dvc/error.hpp"

namespace dvc {

LocalContext local_context(const TimeInterval& event, const VideoMeta& meta, double window_ratio) {
  if (!(window_ratio > 0.0)) throw ValidationError("window ratio must be > 0");
  const IndexRange ev = segment_range(event, meta);
  const double width = window_ratio * event.length();
  LocalContext out;

  const double before_start = std::max(0.0, event.start_s - width);
  if (event.start_s > before_start) {
    const IndexRange r = segment_range({before_start, event.start_s}, meta);
    out.before = {r.begin, std::min(r.end, ev.begin)};
    if (out.before.empty()) out.before = {};
  }
  const double after_end = std::min(meta.duration_s, event.end_s + width);
  if (after_end > event.end_s) {
    const IndexRange r = segment_range({event.end_s, after_end}, meta);
    out.after = {std::max(r.begin, ev.end), r.end};
    if (out.after.empty()) out.after = {};
  }
  return out;
}

std::vector<bool> global_context(const TimeInterval& event, const VideoMeta& meta) {
  const IndexRange ev = segment_range(event, meta);
  std::vector<bool> mask(meta.segment_count(), true);
  for (std::size_t i = ev.begin; i < ev.end; ++i) mask[i] = false;
  return mask;
}

std::vector<std::size_t> event_neighbors(std::span<const TimeInterval> events, std::size_t target, Direction direction) {
  if (target >= events.size()) throw ValidationError("event_neighbors: target index out of range");
  std::vector<std::size_t> out;
  const std::size_t stop = direction == Direction::kUni ? target : events.size();
  for (std::size_t i = 0; i < stop; ++i) {
    if (i != target) out.push_back(i);
  }
  return out;
}

std::vector<std::string> sentence_history(std::span<const std::string> captions, std::size_t target) {
  if (target > captions.size()) {
    throw ValidationError("sentence_history: event " + std::to_string(target) + " requested before earlier events were captioned");
  }
  return {captions.begin(), captions.begin() + static_cast<std::ptrdiff_t>(target)};
}

std::optional<std::vector<double>> pool_features(const SegmentGrid& grid, std::span<const std::size_t> rows,
                                                 PoolMode mode) {
  if (!grid.features) throw ValidationError("pool_features: grid for " + grid.meta.video_id + " has no features");
  if (rows.empty()) return std::nullopt;
  const FeatureTable& table = *grid.features;

  std::vector<double> out(table.dim, mode == PoolMode::kMax ? -INFINITY : 0.0);
  for (std::size_t r : rows) {
    if (r >= table.rows) throw ValidationError("pool_features: row index out of range");
    auto row = table.row(r);
    for (std::size_t d = 0; d < table.dim; ++d) {
      if (mode == PoolMode::kMax) {
        out[d] = std::max(out[d], static_cast<double>(row[d]));
      } else {
        out[d] += row[d];
      }
    }
  }
  if (mode == PoolMode::kMean) {
    for (double& v : out) v /= static_cast<double>(rows.size());
  }
  return out;
}

std::optional<std::vector<double>> pool_features(const SegmentGrid& grid, IndexRange range, PoolMode mode) {
  std::vector<std::size_t> rows(range.size());
  std::iota(rows.begin(), rows.end(), range.begin);
  return pool_features(grid, rows, mode);
}

std::optional<std::vector<double>> pool_features(const SegmentGrid& grid, const std::vector<bool>& mask, PoolMode mode) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rows.push_back(i);
  }
  return pool_features(grid, rows, mode);
}

void ContextOptions::validate() const {
  if (!(window_ratio > 0.0)) throw ValidationError("window-ratio must be > 0");
}

std::vector<EventContextBundle> build_context_bundles(const SegmentGrid& grid, std::span<const TimeInterval> events,
                                                      std::span<const std::string> captions,
                                                      const ContextOptions& options) {
  options.validate();
  if (!captions.empty() && captions.size() != events.size()) {
    throw ValidationError("contexts: caption count does not match event count");
  }

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events[a].start_s < events[b].start_s; });
  std::vector<TimeInterval> sorted;
  std::vector<std::string> sorted_captions;
  for (std::size_t i : order) {
    sorted.push_back(events[i]);
    if (!captions.empty()) sorted_captions.push_back(captions[i]);
  }

  const std::size_t dim = grid.dim();
  auto pooled = [&](auto&& selection, bool& empty_flag) {
    if (!grid.features) return std::vector<double>{};
    auto v = pool_features(grid, selection, options.pool);
    empty_flag = !v.has_value();
    return v ? *v : std::vector<double>(dim, 0.0);
  };

  std::vector<EventContextBundle> out;
  out.reserve(sorted.size());
  for (std::size_t t = 0; t < sorted.size(); ++t) {
    EventContextBundle b;
    b.event_index = order[t];
    b.event = sorted[t];
    b.event_range = segment_range(sorted[t], grid.meta);
    const LocalContext local = local_context(sorted[t], grid.meta, options.window_ratio);
    b.local_before = local.before;
    b.local_after = local.after;
    b.global_mask = global_context(sorted[t], grid.meta);
    for (std::size_t n : event_neighbors(sorted, t, options.direction)) b.neighbor_events.push_back(order[n]);
    if (!sorted_captions.empty()) b.sentence_history = sentence_history(sorted_captions, t);

    bool unused = false;
    b.event_feature = pooled(b.event_range, unused);
    b.before_feature = pooled(b.local_before, b.empty_before);
    b.after_feature = pooled(b.local_after, b.empty_after);
    b.global_feature = pooled(b.global_mask, b.empty_global);
    if (!grid.features) {
      b.empty_before = b.local_before.empty();
      b.empty_after = b.local_after.empty();
      b.empty_global = std::none_of(b.global_mask.begin(), b.global_mask.end(), [](bool m) { return m; });
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace dvc
