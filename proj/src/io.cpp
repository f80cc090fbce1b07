#include "dvc/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dvc/error.hpp"

namespace dvc {

namespace fs = std::filesystem;

namespace {

constexpr char kFeatureMagic[4] = {'D', 'V', 'C', 'F'};
constexpr std::uint32_t kFeatureVersion = 1;

double number_field(const Json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError(where + ": expected a number");
  return j.get<double>();
}

std::string index_tag(const std::string& video_id, std::size_t i) {
  return video_id + "[" + std::to_string(i) + "]";
}

}  // namespace

namespace detail {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

const char* ByteReader::take(std::size_t n) {
  if (bytes_.size() - pos_ < n) throw FormatError(source_ + ": truncated binary data");
  const char* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

std::uint32_t ByteReader::u32() {
  const auto* p = reinterpret_cast<const unsigned char*>(take(4));
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t ByteReader::u64() {
  const auto* p = reinterpret_cast<const unsigned char*>(take(8));
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str(std::size_t n) { return std::string(take(n), n); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

Json read_json(const fs::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& doc, int indent) {
  detail::write_file(path, doc.dump(indent) + "\n");
}

TimeInterval checked_interval(double start, double end, std::optional<double> duration, const std::string& where) {
  if (!std::isfinite(start) || !std::isfinite(end)) throw FormatError("non-finite interval " + where);
  if (start < 0.0) throw FormatError("negative start " + where);
  if (start == end) throw FormatError("zero-length interval " + where);
  if (start > end) throw FormatError("inverted interval " + where);
  if (duration) {
    if (end > *duration + kDurationSlack) throw FormatError("interval exceeds duration " + where);
    end = std::min(end, *duration);
    if (start >= end) throw FormatError("interval starts at or after video end " + where);
  }
  return {start, end};
}

MetadataMap load_metadata(const fs::path& path) {
  const Json doc = read_json(path);
  if (!doc.is_object()) throw FormatError(path.string() + ": metadata must be an object");
  MetadataMap out;
  for (const auto& [vid, entry] : doc.items()) {
    MetaOverride m;
    if (entry.is_number()) {
      m.fps = entry.get<double>();
    } else if (entry.is_object()) {
      if (entry.contains("duration")) m.duration_s = number_field(entry["duration"], vid + ".duration");
      if (entry.contains("fps")) m.fps = number_field(entry["fps"], vid + ".fps");
      if (entry.contains("frames_per_segment")) {
        const double f = number_field(entry["frames_per_segment"], vid + ".frames_per_segment");
        if (f < 1 || f != std::floor(f)) throw FormatError(vid + ": frames_per_segment must be a positive integer");
        m.frames_per_segment = static_cast<std::size_t>(f);
      }
    } else {
      throw FormatError(path.string() + ": bad metadata entry for " + vid);
    }
    out.emplace(vid, m);
  }
  return out;
}

void save_metadata(const std::map<std::string, VideoMeta>& metas, const fs::path& path) {
  Json doc = Json::object();
  for (const auto& [vid, m] : metas) {
    doc[vid] = {{"duration", m.duration_s}, {"fps", m.fps}, {"frames_per_segment", m.frames_per_segment}};
  }
  write_json(path, doc);
}

std::map<std::string, VideoMeta> resolve_metadata(const MetadataMap& overrides) {
  std::map<std::string, VideoMeta> out;
  for (const auto& [vid, o] : overrides) {
    if (!o.duration_s) throw FormatError("metadata for " + vid + " lacks a duration");
    VideoMeta m;
    m.video_id = vid;
    m.duration_s = *o.duration_s;
    if (o.fps) m.fps = *o.fps;
    if (o.frames_per_segment) m.frames_per_segment = *o.frames_per_segment;
    m.validate();
    out.emplace(vid, m);
  }
  return out;
}

Corpus load_ground_truth(const fs::path& path, const MetadataMap* sidecar) {
  const Json doc = read_json(path);
  if (!doc.is_object()) throw FormatError(path.string() + ": groundtruth must be an object keyed by video id");

  Corpus corpus;
  for (const auto& [vid, entry] : doc.items()) {
    if (!entry.is_object()) throw FormatError(path.string() + ": entry " + vid + " is not an object");
    for (const char* key : {"duration", "timestamps", "sentences"}) {
      if (!entry.contains(key)) throw FormatError(vid + ": missing field '" + key + "'");
    }
    VideoRecord rec;
    rec.meta.video_id = vid;
    rec.meta.duration_s = number_field(entry["duration"], vid + ".duration");
    if (sidecar) {
      if (auto it = sidecar->find(vid); it != sidecar->end()) {
        if (it->second.fps) rec.meta.fps = *it->second.fps;
        if (it->second.frames_per_segment) rec.meta.frames_per_segment = *it->second.frames_per_segment;
      }
    }
    try {
      rec.meta.validate();
    } catch (const ValidationError& e) {
      throw FormatError(e.what());
    }

    const Json& ts = entry["timestamps"];
    const Json& ss = entry["sentences"];
    if (!ts.is_array() || !ss.is_array()) throw FormatError(vid + ": timestamps and sentences must be arrays");
    if (ts.size() != ss.size()) {
      throw FormatError(vid + ": " + std::to_string(ts.size()) + " timestamps but " + std::to_string(ss.size()) +
                        " sentences");
    }
    if (ts.empty()) throw FormatError(vid + ": annotation set is empty");

    AnnotationSet set;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string where = index_tag(vid, i);
      if (!ts[i].is_array() || ts[i].size() != 2) throw FormatError("malformed timestamp " + where);
      set.intervals.push_back(checked_interval(number_field(ts[i][0], where), number_field(ts[i][1], where),
                                               rec.meta.duration_s, where));
      if (!ss[i].is_string()) throw FormatError("sentence is not a string " + where);
      set.sentences.push_back(ss[i].get<std::string>());
    }
    rec.annotations.push_back(std::move(set));
    corpus.videos.emplace(vid, std::move(rec));
  }
  return corpus;
}

Corpus load_ground_truth(std::span<const fs::path> paths, const MetadataMap* sidecar) {
  Corpus corpus;
  for (const auto& p : paths) merge_annotations(corpus, load_ground_truth(p, sidecar));
  return corpus;
}

void merge_annotations(Corpus& into, const Corpus& other) {
  for (const auto& [vid, rec] : other.videos) {
    auto it = into.videos.find(vid);
    if (it == into.videos.end()) {
      into.videos.emplace(vid, rec);
      continue;
    }
    if (std::abs(it->second.meta.duration_s - rec.meta.duration_s) > 1e-3) {
      throw FormatError(vid + ": groundtruth files disagree on duration");
    }
    it->second.annotations.insert(it->second.annotations.end(), rec.annotations.begin(), rec.annotations.end());
  }
}

void save_ground_truth(const Corpus& corpus, std::size_t set_index, const fs::path& path) {
  Json doc = Json::object();
  for (const auto& [vid, rec] : corpus.videos) {
    if (set_index >= rec.annotations.size()) continue;
    const AnnotationSet& set = rec.annotations[set_index];
    Json ts = Json::array();
    for (const auto& iv : set.intervals) ts.push_back({iv.start_s, iv.end_s});
    doc[vid] = {{"duration", rec.meta.duration_s}, {"timestamps", ts}, {"sentences", set.sentences}};
  }
  write_json(path, doc);
}

PredictionMap predictions_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_object()) {
    throw FormatError("predictions: expected an object with a 'results' map");
  }
  PredictionMap out;
  for (const auto& [vid, list] : doc["results"].items()) {
    if (!list.is_array()) throw FormatError("predictions for " + vid + " must be an array");
    auto& entries = out[vid];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Json& e = list[i];
      const std::string where = index_tag(vid, i);
      if (!e.is_object() || !e.contains("timestamp")) throw FormatError("prediction without timestamp " + where);
      const Json& ts = e["timestamp"];
      if (!ts.is_array() || ts.size() != 2) throw FormatError("malformed timestamp " + where);

      PredictionEntry p;
      p.interval = checked_interval(number_field(ts[0], where), number_field(ts[1], where), std::nullopt, where);
      if (e.contains("sentence") && !e["sentence"].is_null()) {
        if (!e["sentence"].is_string()) throw FormatError("sentence is not a string " + where);
        p.sentence = e["sentence"].get<std::string>();
      }
      if (e.contains("proposal_score") && !e["proposal_score"].is_null()) {
        const double s = number_field(e["proposal_score"], where);
        if (!(s >= 0.0 && s <= 1.0)) throw FormatError("score out of range " + where);
        p.proposal_score = s;
      }
      if (e.contains("caption_logprob") && !e["caption_logprob"].is_null()) {
        const double lp = number_field(e["caption_logprob"], where);
        if (!(lp <= 0.0)) throw FormatError("caption_logprob must be <= 0 " + where);
        p.caption_logprob = lp;
      }
      entries.push_back(std::move(p));
    }
  }
  return out;
}

PredictionMap load_predictions(const fs::path& path) {
  try {
    return predictions_from_json(read_json(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Json predictions_to_json(const PredictionMap& predictions) {
  Json results = Json::object();
  for (const auto& [vid, entries] : predictions) {
    Json list = Json::array();
    for (const auto& p : entries) {
      Json e = {{"timestamp", {p.interval.start_s, p.interval.end_s}}};
      if (p.sentence) e["sentence"] = *p.sentence;
      if (p.proposal_score) e["proposal_score"] = *p.proposal_score;
      if (p.caption_logprob) e["caption_logprob"] = *p.caption_logprob;
      list.push_back(std::move(e));
    }
    results[vid] = std::move(list);
  }
  return {{"version", "VERSION 1.0"}, {"results", std::move(results)}};
}

void save_predictions(const PredictionMap& predictions, const fs::path& path) {
  write_json(path, predictions_to_json(predictions));
}

std::size_t attach_predictions(Corpus& corpus, const PredictionMap& predictions, bool strict,
                               std::vector<std::string>* warnings) {
  std::size_t skipped = 0;
  for (const auto& [vid, entries] : predictions) {
    auto it = corpus.videos.find(vid);
    if (it == corpus.videos.end()) {
      if (strict) throw FormatError("prediction for unknown video_id " + vid);
      if (warnings) warnings->push_back("skipping predictions for unknown video_id " + vid);
      ++skipped;
      continue;
    }
    auto& rec = it->second;
    rec.predictions.clear();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      PredictionEntry p = entries[i];
      p.interval = checked_interval(p.interval.start_s, p.interval.end_s, rec.meta.duration_s, index_tag(vid, i));
      rec.predictions.push_back(std::move(p));
    }
  }
  return skipped;
}

void save_features(const FeatureRecord& record, const fs::path& path, FeatureEncoding encoding) {
  const FeatureTable& t = record.table;
  if (t.values.size() != t.rows * t.dim) throw ValidationError("feature table size mismatch for " + record.video_id);

  if (encoding == FeatureEncoding::kJson) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < t.rows; ++r) {
      auto row = t.row(r);
      rows.push_back(std::vector<float>(row.begin(), row.end()));
    }
    write_json(path, {{"video_id", record.video_id},
                      {"segment_count", t.rows},
                      {"D", t.dim},
                      {"feature_tag", record.feature_tag},
                      {"features", std::move(rows)}});
    return;
  }

  std::string out(kFeatureMagic, sizeof(kFeatureMagic));
  detail::put_u32(out, kFeatureVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(record.video_id.size()));
  out += record.video_id;
  detail::put_u32(out, static_cast<std::uint32_t>(record.feature_tag.size()));
  out += record.feature_tag;
  detail::put_u64(out, t.rows);
  detail::put_u64(out, t.dim);
  out.reserve(out.size() + 4 * t.values.size());
  for (float v : t.values) detail::put_f32(out, v);
  detail::write_file(path, out);
}

FeatureRecord load_features(const fs::path& path) {
  const std::string bytes = detail::read_file(path);
  FeatureRecord rec;

  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kFeatureMagic, 4) == 0) {
    detail::ByteReader in(bytes, path.string());
    in.str(4);
    if (const auto version = in.u32(); version != kFeatureVersion) {
      throw FormatError(path.string() + ": unsupported feature version " + std::to_string(version));
    }
    rec.video_id = in.str(in.u32());
    rec.feature_tag = in.str(in.u32());
    const std::uint64_t rows = in.u64();
    const std::uint64_t dim = in.u64();
    if (dim != 0 && rows > (bytes.size() / 4) / dim) throw FormatError(path.string() + ": truncated binary data");
    rec.table = FeatureTable(rows, dim);
    for (auto& v : rec.table.values) v = in.f32();
    if (!in.at_end()) throw FormatError(path.string() + ": trailing bytes after feature rows");
    return rec;
  }

  Json doc;
  try {
    doc = Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    rec.video_id = doc.at("video_id").get<std::string>();
    rec.feature_tag = doc.value("feature_tag", std::string("basic"));
    const auto rows = doc.at("segment_count").get<std::size_t>();
    const auto dim = doc.at("D").get<std::size_t>();
    const Json& data = doc.at("features");
    if (!data.is_array() || data.size() != rows) throw FormatError(path.string() + ": row count mismatch");
    rec.table = FeatureTable(rows, dim);
    for (std::size_t r = 0; r < rows; ++r) {
      if (!data[r].is_array() || data[r].size() != dim) {
        throw FormatError(path.string() + ": row " + std::to_string(r) + " has wrong dimension");
      }
      for (std::size_t d = 0; d < dim; ++d) rec.table.values[r * dim + d] = data[r][d].get<float>();
    }
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return rec;
}

std::map<std::string, FeatureRecord> load_feature_source(const fs::path& path) {
  std::map<std::string, FeatureRecord> out;
  auto add = [&](const fs::path& p) {
    FeatureRecord rec = load_features(p);
    std::string vid = rec.video_id;
    if (!out.emplace(vid, std::move(rec)).second) throw FormatError("duplicate features for video " + vid);
  };
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".bin" || ext == ".json")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add(f);
  } else {
    add(path);
  }
  return out;
}

SegmentGrid make_grid(const VideoMeta& meta, const FeatureRecord* features) {
  SegmentGrid grid;
  grid.meta = meta;
  if (features) {
    grid.features = features->table;
    grid.feature_tag = features->feature_tag;
  }
  grid.validate();
  return grid;
}

}  // namespace dvc
