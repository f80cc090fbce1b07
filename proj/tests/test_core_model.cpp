#include <gtest/gtest.h>

#include <random>

#include "dvc/error.hpp"
#include "dvc/interval_ops.hpp"
#include "dvc/io.hpp"
#include "dvc/synthetic.hpp"
#include "dvc/types.hpp"
#include "test_util.hpp"

using namespace dvc;

namespace {

VideoMeta meta4s(double duration) {
  VideoMeta m;
  m.video_id = "v";
  m.duration_s = duration;
  m.fps = 16.0;
  m.frames_per_segment = 64;
  return m;
}

}  // namespace

TEST(SegmentRange, ExactDivision) {
  EXPECT_EQ(segment_range({0.0, 8.0}, meta4s(16.0)), (IndexRange{0, 2}));
}

TEST(SegmentRange, TinyIntervalKeepsOneSegment) {
  EXPECT_EQ(segment_range({0.1, 0.2}, meta4s(16.0)), (IndexRange{0, 1}));
}

TEST(SegmentRange, FloorAndCeil) {
  EXPECT_EQ(segment_range({3.9, 8.1}, meta4s(16.0)), (IndexRange{0, 3}));
}

TEST(SegmentRange, ClampedToLastSegment) {
  const VideoMeta m = meta4s(10.0);  // 3 segments, the last one partial
  EXPECT_EQ(m.segment_count(), 3u);
  EXPECT_EQ(segment_range({9.5, 10.0}, m), (IndexRange{2, 3}));
  EXPECT_EQ(segment_range({0.0, 10.0}, m), (IndexRange{0, 3}));
}

TEST(SegmentRange, AlwaysNonEmptyAndInBounds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dur(0.5, 200.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 2000; ++it) {
    VideoMeta m = meta4s(dur(rng));
    m.fps = 10.0 + 20.0 * u(rng);
    double a = u(rng) * m.duration_s;
    double b = u(rng) * m.duration_s;
    if (a > b) std::swap(a, b);
    if (b - a < 1e-6) continue;
    const IndexRange r = segment_range({a, b}, m);
    ASSERT_FALSE(r.empty());
    ASSERT_LE(r.end, m.segment_count());
  }
}

TEST(VideoMeta, SegmentCountAtLeastOne) {
  EXPECT_EQ(meta4s(0.01).segment_count(), 1u);
  EXPECT_EQ(meta4s(16.0).segment_count(), 4u);
  EXPECT_EQ(meta4s(16.01).segment_count(), 5u);
}

TEST(VideoMeta, ValidateRejectsBadValues) {
  VideoMeta m = meta4s(10.0);
  m.fps = 0.0;
  EXPECT_THROW(m.validate(), ValidationError);
  m = meta4s(-1.0);
  EXPECT_THROW(m.validate(), ValidationError);
  m = meta4s(10.0);
  m.frames_per_segment = 0;
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(SegmentGrid, FeatureRowsMustMatchSegments) {
  SegmentGrid g;
  g.meta = meta4s(16.0);
  g.features = FeatureTable(3, 2);
  EXPECT_THROW(g.validate(), FormatError);
  g.features = FeatureTable(4, 2);
  EXPECT_NO_THROW(g.validate());
}

TEST(GroundTruthIo, LoadsSingleVideo) {
  testutil::TempDir dir("gt");
  testutil::write_text(dir / "gt.json",
                       R"({"v1": {"duration": 30, "timestamps": [[0,10],[12,28]], "sentences": ["s1","s2"]}})");
  const Corpus c = load_ground_truth(dir / "gt.json");
  ASSERT_EQ(c.size(), 1u);
  const auto& rec = c.at("v1");
  ASSERT_EQ(rec.annotations.size(), 1u);
  EXPECT_EQ(rec.annotations[0].size(), 2u);
  EXPECT_EQ(rec.annotations[0].intervals[1], (TimeInterval{12.0, 28.0}));
  EXPECT_EQ(rec.annotations[0].sentences[0], "s1");
  EXPECT_DOUBLE_EQ(rec.meta.duration_s, 30.0);
}

TEST(GroundTruthIo, InvertedIntervalNamesEntry) {
  testutil::TempDir dir("gt");
  testutil::write_text(dir / "gt.json", R"({"v1": {"duration": 30, "timestamps": [[10,5]], "sentences": ["x"]}})");
  try {
    load_ground_truth(dir / "gt.json");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("inverted interval v1[0]"), std::string::npos) << e.what();
  }
}

TEST(GroundTruthIo, TwoFilesGiveTwoSets) {
  testutil::TempDir dir("gt");
  testutil::write_text(dir / "a.json", R"({"v1": {"duration": 30, "timestamps": [[0,10]], "sentences": ["a"]}})");
  testutil::write_text(dir / "b.json", R"({"v1": {"duration": 30, "timestamps": [[1,9],[10,20]], "sentences": ["b","c"]}})");
  const std::vector<std::filesystem::path> paths = {dir / "a.json", dir / "b.json"};
  const Corpus c = load_ground_truth(paths);
  ASSERT_EQ(c.at("v1").annotations.size(), 2u);
  EXPECT_EQ(c.at("v1").annotations[1].size(), 2u);
  EXPECT_EQ(c.at("v1").groundtruth_union().size(), 3u);
}

TEST(GroundTruthIo, DurationDisagreementRejected) {
  testutil::TempDir dir("gt");
  testutil::write_text(dir / "a.json", R"({"v1": {"duration": 30, "timestamps": [[0,10]], "sentences": ["a"]}})");
  testutil::write_text(dir / "b.json", R"({"v1": {"duration": 40, "timestamps": [[0,10]], "sentences": ["a"]}})");
  const std::vector<std::filesystem::path> paths = {dir / "a.json", dir / "b.json"};
  EXPECT_THROW(load_ground_truth(paths), FormatError);
}

TEST(GroundTruthIo, EndOvershootClampedWithinSlack) {
  testutil::TempDir dir("gt");
  testutil::write_text(dir / "a.json",
                       R"({"v1": {"duration": 30, "timestamps": [[0,30.0000005]], "sentences": ["a"]}})");
  EXPECT_DOUBLE_EQ(load_ground_truth(dir / "a.json").at("v1").annotations[0].intervals[0].end_s, 30.0);
  testutil::write_text(dir / "b.json", R"({"v1": {"duration": 30, "timestamps": [[0,31]], "sentences": ["a"]}})");
  EXPECT_THROW(load_ground_truth(dir / "b.json"), FormatError);
}

TEST(GroundTruthIo, MismatchedListsAndMissingFiles) {
  testutil::TempDir dir("gt");
  testutil::write_text(dir / "a.json", R"({"v1": {"duration": 30, "timestamps": [[0,10]], "sentences": []}})");
  EXPECT_THROW(load_ground_truth(dir / "a.json"), FormatError);
  testutil::write_text(dir / "b.json", "{not json");
  EXPECT_THROW(load_ground_truth(dir / "b.json"), FormatError);
  EXPECT_THROW(load_ground_truth(dir / "missing.json"), IoError);
}

TEST(GroundTruthIo, SidecarOverridesFps) {
  testutil::TempDir dir("gt");
  testutil::write_text(dir / "a.json", R"({"v1": {"duration": 30, "timestamps": [[0,10]], "sentences": ["a"]}})");
  testutil::write_text(dir / "m.json", R"({"v1": {"fps": 30}})");
  const MetadataMap side = load_metadata(dir / "m.json");
  const Corpus c = load_ground_truth(dir / "a.json", &side);
  EXPECT_DOUBLE_EQ(c.at("v1").meta.fps, 30.0);
  EXPECT_EQ(c.at("v1").meta.frames_per_segment, 64u);
}

TEST(PredictionIo, LoadsEntry) {
  testutil::TempDir dir("pred");
  testutil::write_text(dir / "p.json", R"({"results": {"v1": [{"sentence":"a man runs","timestamp":[0,10]}]}})");
  const PredictionMap p = load_predictions(dir / "p.json");
  ASSERT_EQ(p.at("v1").size(), 1u);
  EXPECT_EQ(*p.at("v1")[0].sentence, "a man runs");
  EXPECT_FALSE(p.at("v1")[0].proposal_score);
}

TEST(PredictionIo, Errors) {
  testutil::TempDir dir("pred");
  testutil::write_text(dir / "a.json", R"({"results": {"v1": [{"timestamp":[5,5]}]}})");
  EXPECT_THROW(load_predictions(dir / "a.json"), FormatError);
  testutil::write_text(dir / "b.json", R"({"results": {"v1": [{"timestamp":[0,5],"proposal_score":1.2}]}})");
  try {
    load_predictions(dir / "b.json");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("score out of range"), std::string::npos);
  }
  testutil::write_text(dir / "c.json", R"({"results": {"v1": [{"timestamp":[0,5],"caption_logprob":0.5}]}})");
  EXPECT_THROW(load_predictions(dir / "c.json"), FormatError);
  testutil::write_text(dir / "d.json", R"({"v1": []})");
  EXPECT_THROW(load_predictions(dir / "d.json"), FormatError);
}

TEST(PredictionIo, UnknownVideosSkippedUnlessStrict) {
  Corpus c;
  VideoRecord rec;
  rec.meta = meta4s(30.0);
  rec.meta.video_id = "v1";
  rec.annotations.push_back({{{0.0, 10.0}}, {"a"}});
  c.videos["v1"] = rec;
  PredictionMap p;
  p["v1"] = {PredictionEntry{{0.0, 5.0}, {}, {}, {}}};
  p["zz"] = {PredictionEntry{{0.0, 5.0}, {}, {}, {}}};
  std::vector<std::string> warnings;
  Corpus loose = c;
  EXPECT_EQ(attach_predictions(loose, p, false, &warnings), 1u);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(loose.at("v1").predictions.size(), 1u);
  Corpus strict = c;
  EXPECT_THROW(attach_predictions(strict, p, true), FormatError);
  p["v1"][0].interval = {20.0, 40.0};
  EXPECT_THROW(attach_predictions(c, p, false), FormatError);
}

TEST(PredictionIo, RoundTripKeepsOptionalFields) {
  testutil::TempDir dir("pred");
  PredictionMap p;
  p["v2"] = {PredictionEntry{{1.25, 7.5}, std::string("a dog"), 0.75, -3.5}, PredictionEntry{{2.0, 3.0}, {}, {}, {}}};
  save_predictions(p, dir / "p.json");
  const PredictionMap q = load_predictions(dir / "p.json");
  ASSERT_EQ(q.at("v2").size(), 2u);
  EXPECT_EQ(q.at("v2")[0].interval, p["v2"][0].interval);
  EXPECT_EQ(q.at("v2")[0].sentence, p["v2"][0].sentence);
  EXPECT_EQ(q.at("v2")[0].proposal_score, p["v2"][0].proposal_score);
  EXPECT_EQ(q.at("v2")[0].caption_logprob, p["v2"][0].caption_logprob);
  EXPECT_FALSE(q.at("v2")[1].sentence);
}

TEST(FeatureIo, BinaryAndJsonRoundTrip) {
  testutil::TempDir dir("feat");
  FeatureRecord r{"v9", "c3d", FeatureTable(3, 2)};
  for (std::size_t i = 0; i < r.table.values.size(); ++i) r.table.values[i] = 0.1f * static_cast<float>(i) - 0.2f;
  save_features(r, dir / "v9.bin");
  save_features(r, dir / "v9.json", FeatureEncoding::kJson);
  EXPECT_EQ(load_features(dir / "v9.bin"), r);
  EXPECT_EQ(load_features(dir / "v9.json"), r);
}

TEST(FeatureIo, TruncatedBinaryRejected) {
  testutil::TempDir dir("feat");
  FeatureRecord r{"v9", "basic", FeatureTable(3, 2)};
  save_features(r, dir / "v9.bin");
  std::string bytes = detail::read_file(dir / "v9.bin");
  bytes.resize(bytes.size() - 3);
  detail::write_file(dir / "cut.bin", bytes);
  EXPECT_THROW(load_features(dir / "cut.bin"), FormatError);
}

TEST(FeatureIo, DirectorySourceAndGrid) {
  testutil::TempDir dir("feat");
  save_features({"a", "basic", FeatureTable(4, 1)}, dir / "a.bin");
  save_features({"b", "basic", FeatureTable(2, 1)}, dir / "b.json", FeatureEncoding::kJson);
  const auto all = load_feature_source(dir.path());
  ASSERT_EQ(all.size(), 2u);
  VideoMeta m = meta4s(16.0);
  m.video_id = "a";
  EXPECT_NO_THROW(make_grid(m, &all.at("a")));
  m.video_id = "b";
  EXPECT_THROW(make_grid(m, &all.at("b")), FormatError);
}

TEST(Synthetic, SingleVideoSingleEvent) {
  SyntheticConfig cfg;
  cfg.videos = 1;
  cfg.min_events = 1;
  cfg.max_events = 1;
  cfg.mean_events = 1.0;
  const SyntheticCorpus s = generate_synthetic(cfg);
  ASSERT_EQ(s.corpus.size(), 1u);
  const auto& rec = s.corpus.videos.begin()->second;
  EXPECT_EQ(rec.annotations[0].size(), 1u);
  EXPECT_TRUE(rec.annotations[0].intervals[0].valid());
  EXPECT_LE(rec.annotations[0].intervals[0].end_s, rec.meta.duration_s);
}

TEST(Synthetic, MeanEventCountNearConfigured) {
  SyntheticConfig cfg;
  cfg.videos = 500;
  cfg.feature_dim = 0;
  cfg.second_set = false;
  const SyntheticCorpus s = generate_synthetic(cfg);
  double total = 0.0;
  for (const auto& [_, rec] : s.corpus.videos) total += static_cast<double>(rec.annotations[0].size());
  const double mean = total / 500.0;
  EXPECT_GE(mean, 3.2);
  EXPECT_LE(mean, 4.2);
}

TEST(Synthetic, SecondSetStaysClose) {
  SyntheticConfig cfg;
  cfg.videos = 100;
  cfg.feature_dim = 0;
  const SyntheticCorpus s = generate_synthetic(cfg);
  for (const auto& [vid, rec] : s.corpus.videos) {
    ASSERT_EQ(rec.annotations.size(), 2u);
    ASSERT_EQ(rec.annotations[0].size(), rec.annotations[1].size());
    for (std::size_t e = 0; e < rec.annotations[0].size(); ++e) {
      EXPECT_GE(tiou(rec.annotations[0].intervals[e], rec.annotations[1].intervals[e]), 0.6) << vid;
    }
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticConfig cfg;
  cfg.videos = 5;
  testutil::TempDir a("syn");
  testutil::TempDir b("syn");
  write_synthetic(generate_synthetic(cfg), a.path());
  write_synthetic(generate_synthetic(cfg), b.path());
  for (const char* f : {"gt_1.json", "gt_2.json", "meta.json", "lexicon.txt"}) {
    EXPECT_EQ(detail::read_file(a / f), detail::read_file(b / f)) << f;
  }
  cfg.seed = 8;
  testutil::TempDir c("syn");
  write_synthetic(generate_synthetic(cfg), c.path());
  EXPECT_NE(detail::read_file(a / "gt_1.json"), detail::read_file(c / "gt_1.json"));
}

TEST(Synthetic, WrittenCorpusLoadsBack) {
  SyntheticConfig cfg;
  cfg.videos = 4;
  const SyntheticCorpus s = generate_synthetic(cfg);
  testutil::TempDir dir("syn");
  write_synthetic(s, dir.path());
  const MetadataMap side = load_metadata(dir / "meta.json");
  const std::vector<std::filesystem::path> paths = {dir / "gt_1.json", dir / "gt_2.json"};
  const Corpus c = load_ground_truth(paths, &side);
  ASSERT_EQ(c.size(), 4u);
  const auto features = load_feature_source(dir / "features");
  for (const auto& [vid, rec] : c.videos) {
    EXPECT_EQ(rec.annotations.size(), 2u);
    EXPECT_NO_THROW(make_grid(rec.meta, &features.at(vid)).validate());
  }
  EXPECT_EQ(load_lexicon(dir / "lexicon.txt"), s.lexicon);
}
