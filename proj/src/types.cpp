#include "dvc/types.hpp"

#include <algorithm>
#include <cmath>

#include "dvc/error.hpp"

namespace dvc {

namespace {

// Absorbs float noise in time -> segment-position conversions so that an
// exact multiple of the segment duration never rounds to the next segment.
constexpr double kPositionEps = 1e-9;

double segment_position(double t, const VideoMeta& meta) {
  return t * meta.fps / static_cast<double>(meta.frames_per_segment);
}

}  // namespace

std::size_t VideoMeta::segment_count() const {
  const double pos = segment_position(duration_s, *this);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(pos - kPositionEps)));
}

void VideoMeta::validate() const {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw ValidationError("video " + video_id + ": duration must be > 0");
  }
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw ValidationError("video " + video_id + ": fps must be > 0");
  }
  if (frames_per_segment < 1) {
    throw ValidationError("video " + video_id + ": frames_per_segment must be >= 1");
  }
}

IndexRange segment_range(const TimeInterval& interval, const VideoMeta& meta) {
  const std::size_t count = meta.segment_count();
  const double lo = std::max(0.0, segment_position(interval.start_s, meta));
  const double hi = std::max(0.0, segment_position(interval.end_s, meta));

  auto begin = static_cast<std::size_t>(std::floor(lo + kPositionEps));
  auto end = static_cast<std::size_t>(std::ceil(hi - kPositionEps));
  begin = std::min(begin, count - 1);
  end = std::clamp(end, begin + 1, count);
  return {begin, end};
}

void SegmentGrid::validate() const {
  meta.validate();
  if (!features) return;
  if (features->rows != meta.segment_count()) {
    throw FormatError("video " + meta.video_id + ": feature rows " + std::to_string(features->rows) +
                      " != segment count " + std::to_string(meta.segment_count()));
  }
  if (features->values.size() != features->rows * features->dim) {
    throw FormatError("video " + meta.video_id + ": feature table size mismatch");
  }
}

std::vector<TimeInterval> VideoRecord::groundtruth_union() const {
  std::vector<TimeInterval> out;
  for (const auto& set : annotations) {
    out.insert(out.end(), set.intervals.begin(), set.intervals.end());
  }
  return out;
}

const VideoRecord& Corpus::at(const std::string& video_id) const {
  auto it = videos.find(video_id);
  if (it == videos.end()) throw ValidationError("unknown video_id " + video_id);
  return it->second;
}

}  // namespace dvc
