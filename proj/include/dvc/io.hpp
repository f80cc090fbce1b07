#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvc/types.hpp"
#include "json.hpp"

namespace dvc {

using Json = nlohmann::json;

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc, int indent = 2);

/// Per-video metadata as found in a sidecar file. Missing fields fall back to
/// the groundtruth duration and the VideoMeta defaults.
struct MetaOverride {
  std::optional<double> duration_s;
  std::optional<double> fps;
  std::optional<std::size_t> frames_per_segment;
};
using MetadataMap = std::map<std::string, MetaOverride>;

MetadataMap load_metadata(const std::filesystem::path& path);
void save_metadata(const std::map<std::string, VideoMeta>& metas, const std::filesystem::path& path);

/// Resolves complete VideoMeta records; every entry must carry a duration.
std::map<std::string, VideoMeta> resolve_metadata(const MetadataMap& overrides);

/// Reads an ActivityNet-Captions style groundtruth file. Each video receives
/// one AnnotationSet. `sidecar` may override fps / segment size per video.
Corpus load_ground_truth(const std::filesystem::path& path, const MetadataMap* sidecar = nullptr);

/// Loads several groundtruth files and merges them so that each video carries
/// one AnnotationSet per file that mentions it.
Corpus load_ground_truth(std::span<const std::filesystem::path> paths, const MetadataMap* sidecar = nullptr);

/// Appends `other`'s annotation sets to `into`. Durations must agree.
void merge_annotations(Corpus& into, const Corpus& other);

/// Writes annotation set `set_index` of every video that has one.
void save_ground_truth(const Corpus& corpus, std::size_t set_index, const std::filesystem::path& path);

PredictionMap load_predictions(const std::filesystem::path& path);
PredictionMap predictions_from_json(const Json& doc);
Json predictions_to_json(const PredictionMap& predictions);
void save_predictions(const PredictionMap& predictions, const std::filesystem::path& path);

/// Validates predictions against the corpus and stores them per video.
/// Unknown video ids are skipped (and reported through `warnings`) unless
/// `strict` is set, in which case they are a FormatError. Returns the number
/// of skipped videos.
std::size_t attach_predictions(Corpus& corpus, const PredictionMap& predictions, bool strict = false,
                               std::vector<std::string>* warnings = nullptr);

/// Checks an interval against a duration, clamping end overshoot within
/// kDurationSlack. `where` names the offending entry in error messages.
TimeInterval checked_interval(double start, double end, std::optional<double> duration, const std::string& where);

/// Contents of one per-video feature file.
struct FeatureRecord {
  std::string video_id;
  std::string feature_tag = "basic";
  FeatureTable table;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

enum class FeatureEncoding { kBinary, kJson };

/// Binary layout (little endian): "DVCF", u32 version, u32 id length, id bytes,
/// u32 tag length, tag bytes, u64 segment_count, u64 D, float32 rows.
void save_features(const FeatureRecord& record, const std::filesystem::path& path,
                   FeatureEncoding encoding = FeatureEncoding::kBinary);

/// Detects the encoding from the leading magic bytes.
FeatureRecord load_features(const std::filesystem::path& path);

/// Loads every *.bin / *.json feature file of a directory (or a single file).
std::map<std::string, FeatureRecord> load_feature_source(const std::filesystem::path& path);

/// Builds a grid for `meta`, attaching features when a record is available.
SegmentGrid make_grid(const VideoMeta& meta, const FeatureRecord* features);

namespace detail {

void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f32(std::string& out, float v);
void put_f64(std::string& out, double v);

/// Sequential little-endian reader over an in-memory byte buffer.
class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string str(std::size_t n);
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const char* take(std::size_t n);

  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace detail

}  // namespace dvc
