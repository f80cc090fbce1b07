#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "dvc/io.hpp"
#include "dvc/reports.hpp"
#include "test_util.hpp"

using namespace dvc;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const CliRun gen = run({"gen-synthetic", "--videos", "6", "--seed", "3", "--out", syn()});
    ASSERT_EQ(gen.code, 0) << gen.err;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string syn() const { return path("syn"); }
  std::string gt1() const { return path("syn/gt_1.json"); }
  std::string gt2() const { return path("syn/gt_2.json"); }
  std::string meta() const { return path("syn/meta.json"); }

  // Predictions equal to the first groundtruth set, captions included.
  std::string identity_predictions() const {
    const Corpus c = load_ground_truth(std::filesystem::path(gt1()));
    PredictionMap p;
    for (const auto& [vid, rec] : c.videos) {
      const auto& set = rec.annotations[0];
      for (std::size_t i = 0; i < set.size(); ++i) {
        p[vid].push_back({set.intervals[i], set.sentences[i], 0.5 + 0.05 * static_cast<double>(i % 5),
                          -1.0 - static_cast<double>(i)});
      }
    }
    save_predictions(p, path("identity.json"));
    return path("identity.json");
  }

  testutil::TempDir dir_{"cli"};
};

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"fuse", "--help"}).code, 0);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"no-such-command"}).code, 1);
  EXPECT_EQ(run({"eval-proposals", "--pred", "x.json"}).code, 1);
}

TEST(Cli, FuseRejectsZeroK) {
  const CliRun r = run({"fuse", "--meta", "m.json", "--attractors", "g.json", "--out", "o.json", "--k", "0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("k must be ≥ 1"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingInputIsIoError) {
  EXPECT_EQ(run({"eval-proposals", "--pred", path("absent.json"), "--gt", gt1()}).code, 2);
  testutil::write_text(path("bad.json"), "{\"results\": 3}");
  EXPECT_EQ(run({"eval-proposals", "--pred", path("bad.json"), "--gt", gt1()}).code, 2);
}

TEST_F(CliTest, InvalidThresholdIsValidationError) {
  EXPECT_EQ(run({"eval-proposals", "--pred", identity_predictions(), "--gt", gt1(), "--tiou", "0"}).code, 1);
}

TEST_F(CliTest, GenSyntheticIsDeterministic) {
  ASSERT_EQ(run({"gen-synthetic", "--videos", "6", "--seed", "3", "--out", path("again")}).code, 0);
  for (const char* f : {"gt_1.json", "gt_2.json", "meta.json", "lexicon.txt"}) {
    EXPECT_EQ(detail::read_file(dir_ / "syn" / f), detail::read_file(dir_ / "again" / f)) << f;
  }
  const auto a = load_feature_source(dir_ / "syn" / "features");
  const auto b = load_feature_source(dir_ / "again" / "features");
  EXPECT_EQ(a, b);
}

TEST_F(CliTest, EvalProposalsIdentity) {
  const CliRun r = run({"eval-proposals", "--pred", identity_predictions(), "--gt", gt1(), "--tiou", "0.5", "--out",
                     path("pr.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("P=1.0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("R=1.0"), std::string::npos) << r.out;

  const Corpus c = [&] {
    Corpus x = load_ground_truth(std::filesystem::path(gt1()));
    attach_predictions(x, load_predictions(path("identity.json")));
    return x;
  }();
  const std::vector<double> t = {0.5};
  EXPECT_EQ(read_json(path("pr.json")), to_json(precision_recall(c, t)));
}

TEST_F(CliTest, JobsDoNotChangeOutput) {
  const std::string pred = identity_predictions();
  ASSERT_EQ(run({"eval-captions", "--pred", pred, "--gt", gt1(), "--gt", gt2(), "--out", path("a.json")}).code, 0);
  ASSERT_EQ(run({"eval-captions", "--pred", pred, "--gt", gt1(), "--gt", gt2(), "--jobs", "3", "--out",
                 path("b.json")})
                .code,
            0);
  EXPECT_EQ(detail::read_file(dir_ / "a.json"), detail::read_file(dir_ / "b.json"));
}

TEST_F(CliTest, EvalCaptionsAndDiversity) {
  const std::string pred = identity_predictions();
  CliRun r = run({"eval-captions", "--pred", pred, "--gt", gt1(), "--tiou", "0.9", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json doc = Json::parse(r.out);
  EXPECT_NEAR(dense_eval_from_json(doc).bleu4, 1.0, 1e-9);

  r = run({"eval-diversity", "--pred", pred, "--pred2", pred, "--out", path("div.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const DiversityReport d = diversity_from_json(read_json(path("div.json")));
  EXPECT_EQ(d.num_sets, 2u);
  EXPECT_GE(d.self_bleu2.value, d.self_bleu.value);
}

TEST_F(CliTest, FuseHeuristicRecoversEvents) {
  const CliRun r = run({"fuse", "--meta", meta(), "--attractors", gt1(), "--out", path("fused.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const CliRun e = run({"eval-proposals", "--pred", path("fused.json"), "--gt", gt1(), "--tiou", "0.5", "--json"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_GE(pr_table_from_json(Json::parse(e.out)).recall[0], 0.95);
}

TEST_F(CliTest, FuseScoreTable) {
  testutil::write_text(path("m.json"), R"({"v1": {"duration": 30}})");
  testutil::write_text(path("s.json"), R"({"mode": "table", "videos": {"v1": {
      "candidates": [[0,10],[10,20],[20,30]], "pointwise": [0.9,0.5,0.4],
      "steps": [{"probs": [0.2,0.5,0.2], "eos": 0.1}, {"probs": [0.3,0.0,0.1], "eos": 0.6}]}}})");
  CliRun r = run({"fuse", "--meta", path("m.json"), "--scores", path("s.json"), "--k", "2", "--out", path("o.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const PredictionMap p = load_predictions(path("o.json"));
  ASSERT_EQ(p.at("v1").size(), 2u);
  EXPECT_EQ(p.at("v1")[0].interval, (TimeInterval{10, 20}));
  EXPECT_EQ(p.at("v1")[1].interval, (TimeInterval{0, 10}));

  testutil::write_text(path("bad.json"), R"({"mode": "table", "videos": {"v1": {
      "candidates": [[0,10]], "pointwise": [0.9], "steps": [{"probs": [0.2], "eos": 0.2}]}}})");
  r = run({"fuse", "--meta", path("m.json"), "--scores", path("bad.json"), "--out", path("o2.json")});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, RerankAndAugment) {
  const std::string pred = identity_predictions();
  CliRun r = run({"rerank-proposals", "--pred", pred, "--gt", gt1(), "--top", "2", "--out", path("rr.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& [vid, entries] : load_predictions(path("rr.json"))) EXPECT_LE(entries.size(), 2u);
  EXPECT_EQ(run({"rerank-proposals", "--pred", pred, "--gt", gt1(), "--top", "0", "--out", path("x.json")}).code, 1);

  r = run({"augment", "--pred", pred, "--gt", gt1(), "--out", path("aug.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json aug = read_json(path("aug.json"));
  const Corpus c = load_ground_truth(std::filesystem::path(gt1()));
  std::size_t total = 0;
  for (const auto& [vid, rec] : c.videos) total += rec.annotations[0].size();
  std::size_t emitted = 0;
  for (const auto& [vid, list] : aug.items()) emitted += list.size();
  EXPECT_EQ(emitted, total);
}

TEST_F(CliTest, ConceptsAndCaptionRerank) {
  CliRun r = run({"concepts", "train", "--gt", gt1(), "--features", path("syn/features"), "--meta", meta(), "--lexicon",
               path("syn/lexicon.txt"), "--epochs", "5", "--out", path("model.bin"), "--json-out", path("model.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("label accuracy"), std::string::npos);
  const auto m = load_model(path("model.bin"));
  const auto mj = load_model_json(path("model.json"));
  EXPECT_EQ(m.weights, mj.weights);

  const std::string pred = identity_predictions();
  r = run({"concepts", "predict", "--model", path("model.bin"), "--features", path("syn/features"), "--events", pred,
           "--meta", meta(), "--top", "3", "--out", path("cp.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json cp = read_json(path("cp.json"));
  EXPECT_EQ(cp.at("vocabulary").size(), m.num_concepts());
  for (const auto& [vid, list] : cp.at("results").items()) {
    for (const auto& e : list) EXPECT_EQ(e.at("top").size(), std::min<std::size_t>(3, m.num_concepts()));
  }

  r = run({"rerank-captions", "--pred-multi", pred + "," + pred, "--concept-model", path("model.bin"), "--features",
           path("syn/features"), "--meta", meta(), "--out", path("rc.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_predictions(path("rc.json")).size(), load_predictions(pred).size());
  EXPECT_EQ(run({"concepts", "train", "--gt", gt1(), "--features", path("syn/features"), "--lexicon",
                 path("syn/lexicon.txt"), "--lr", "-1", "--out", path("m2.bin")})
                .code,
            1);
}

TEST_F(CliTest, Contexts) {
  const CliRun r = run({"contexts", "--meta", meta(), "--features", path("syn/features"), "--events",
                     identity_predictions(), "--direction", "uni", "--out", path("ctx.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json doc = read_json(path("ctx.json"));
  EXPECT_EQ(doc.size(), 6u);
  EXPECT_EQ(run({"contexts", "--meta", meta(), "--events", path("identity.json"), "--window-ratio", "0", "--out",
                 path("c2.json")})
                .code,
            1);
}
