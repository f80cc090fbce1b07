#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dvc/caption_metrics.hpp"
#include "dvc/concept_miml.hpp"
#include "dvc/context_extract.hpp"
#include "dvc/error.hpp"
#include "dvc/interval_ops.hpp"
#include "dvc/io.hpp"
#include "dvc/proposal_fusion.hpp"
#include "dvc/reports.hpp"
#include "dvc/rerank_augment.hpp"
#include "dvc/synthetic.hpp"

namespace dvc::cli {

namespace {

namespace fs = std::filesystem;

const std::vector<double> kDefaultThresholds = {0.3, 0.5, 0.7, 0.9};

struct Common {
  std::size_t jobs = 1;
  bool strict = false;
  bool json = false;
  std::string out;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void emit_report(const Json& doc, const Common& common, std::ostream& out) {
  if (!common.out.empty()) write_json(common.out, doc);
  if (common.json) out << doc.dump(2) << "\n";
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

std::vector<fs::path> to_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// Video metadata from a --meta file (which must carry durations) or, failing
// that, from groundtruth files.
std::map<std::string, VideoMeta> resolve_metas(const std::string& meta_path, const std::vector<std::string>& gt_paths) {
  if (!meta_path.empty()) return resolve_metadata(load_metadata(meta_path));
  std::map<std::string, VideoMeta> out;
  const auto paths = to_paths(gt_paths);
  for (const auto& [vid, rec] : load_ground_truth(paths).videos) out.emplace(vid, rec.meta);
  return out;
}

const VideoMeta* find_meta(const std::map<std::string, VideoMeta>& metas, const std::string& vid, bool strict,
                           std::vector<std::string>& warnings) {
  auto it = metas.find(vid);
  if (it != metas.end()) return &it->second;
  if (strict) throw FormatError("no metadata for video_id " + vid);
  warnings.push_back("skipping unknown video_id " + vid);
  return nullptr;
}

TimeInterval parse_interval(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FormatError("malformed interval " + where);
  }
  return checked_interval(j[0].get<double>(), j[1].get<double>(), std::nullopt, where);
}

// ---- gen-synthetic ---------------------------------------------------------

struct GenOptions {
  SyntheticConfig cfg;
  bool no_second_set = false;
  std::string out_dir;
};

int run_gen(const GenOptions& o, std::ostream& out) {
  SyntheticConfig cfg = o.cfg;
  cfg.second_set = !o.no_second_set;
  cfg.validate();
  const SyntheticCorpus syn = generate_synthetic(cfg);
  write_synthetic(syn, o.out_dir);
  std::size_t events = 0;
  for (const auto& [_, rec] : syn.corpus.videos) events += rec.annotations.front().size();
  out << "wrote " << syn.corpus.size() << " videos, " << events << " events to " << o.out_dir << "\n";
  return kOk;
}

// ---- eval-proposals / eval-captions ---------------------------------------

struct EvalOptions {
  Common common;
  std::string pred;
  std::vector<std::string> gt;
  std::string sidecar;
  std::vector<double> tiou = kDefaultThresholds;
};

Corpus load_eval_corpus(const EvalOptions& o, std::ostream& err) {
  std::optional<MetadataMap> sidecar;
  if (!o.sidecar.empty()) sidecar = load_metadata(o.sidecar);
  const auto paths = to_paths(o.gt);
  Corpus corpus = load_ground_truth(paths, sidecar ? &*sidecar : nullptr);
  std::vector<std::string> warnings;
  attach_predictions(corpus, load_predictions(o.pred), o.common.strict, &warnings);
  print_warnings(warnings, err);
  return corpus;
}

int run_eval_proposals(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  validate_thresholds(o.tiou);
  require(o.common.jobs >= 1, "jobs must be ≥ 1");
  const Corpus corpus = load_eval_corpus(o, err);
  const PRTable table = precision_recall(corpus, o.tiou, o.common.jobs);
  if (!o.common.json) print_table(out, table);
  emit_report(to_json(table), o.common, out);
  if (table.zero_prediction_videos > 0) {
    err << "warning: " << table.zero_prediction_videos << " video(s) without predictions counted as precision 0\n";
  }
  return kOk;
}

int run_eval_captions(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  validate_thresholds(o.tiou);
  require(o.common.jobs >= 1, "jobs must be ≥ 1");
  const Corpus corpus = load_eval_corpus(o, err);
  const DenseEvalReport report = dense_eval(corpus, o.tiou, {}, o.common.jobs);
  if (!o.common.json) print_table(out, report);
  emit_report(to_json(report), o.common, out);
  return kOk;
}

// ---- eval-diversity --------------------------------------------------------

struct DiversityOptions {
  Common common;
  std::string pred;
  std::string pred2;
  std::size_t n = 4;
};

int run_eval_diversity(const DiversityOptions& o, std::ostream& out) {
  require(o.n >= 1, "n must be ≥ 1");
  std::vector<CaptionSet> sets = {caption_set(load_predictions(o.pred))};
  if (!o.pred2.empty()) sets.push_back(caption_set(load_predictions(o.pred2)));
  const DiversityReport report = diversity_report(sets, o.n);
  if (!o.common.json) print_table(out, report);
  emit_report(to_json(report), o.common, out);
  return kOk;
}

// ---- fuse ------------------------------------------------------------------

struct FuseOptions {
  Common common;
  std::string meta;
  std::string scores;
  std::string attractors;
  FusionConfig cfg;
  std::vector<double> scales = default_window_scales();
  double stride = 0.5;
};

int run_fuse(const FuseOptions& o, std::ostream& out, std::ostream& err) {
  o.cfg.validate();
  require(o.stride > 0.0 && o.stride <= 1.0, "stride must lie in (0, 1]");
  for (double s : o.scales) require(s > 0.0 && s <= 1.0, "scales must lie in (0, 1]");
  require(o.scores.empty() != o.attractors.empty(), "exactly one of --scores or --attractors is required");

  const auto metas = resolve_metadata(load_metadata(o.meta));
  std::vector<std::string> warnings;
  PredictionMap result;
  std::size_t total = 0;

  auto emit = [&](const std::string& vid, const FusionResult& fused) {
    auto& entries = result[vid];
    for (const auto& sel : fused.selected) {
      PredictionEntry p;
      p.interval = sel.interval;
      p.proposal_score = std::clamp(sel.fused_score, 0.0, 1.0);
      entries.push_back(p);
    }
    total += entries.size();
  };

  auto heuristic = [&](const std::string& vid, std::vector<TimeInterval> attractors) {
    const VideoMeta* meta = find_meta(metas, vid, o.common.strict, warnings);
    if (!meta || attractors.empty()) return;
    SegmentGrid grid;
    grid.meta = *meta;
    const auto windows = enumerate_sliding_windows(*meta, o.scales, o.stride);
    const HeuristicPointwiseScorer fs(attractors);
    const HeuristicSequentialScorer fe(attractors);
    const CandidatePool pool = build_candidate_pool(windows, fs, grid, o.cfg.candidate_cap);
    emit(vid, fuse_select(pool, fe, o.cfg));
  };

  if (!o.attractors.empty()) {
    for (const auto& [vid, rec] : load_ground_truth(fs::path(o.attractors)).videos) {
      heuristic(vid, rec.annotations.front().intervals);
    }
  } else {
    const Json doc = read_json(o.scores);
    const std::string mode = doc.value("mode", std::string("table"));
    if (!doc.contains("videos") || !doc["videos"].is_object()) throw FormatError(o.scores + ": missing 'videos' map");
    for (const auto& [vid, entry] : doc["videos"].items()) {
      try {
        if (mode == "heuristic") {
          std::vector<TimeInterval> attractors;
          for (std::size_t i = 0; i < entry.at("attractors").size(); ++i) {
            attractors.push_back(parse_interval(entry["attractors"][i], vid + "[" + std::to_string(i) + "]"));
          }
          heuristic(vid, std::move(attractors));
        } else if (mode == "table") {
          if (!find_meta(metas, vid, o.common.strict, warnings)) continue;
          CandidatePool pool;
          const Json& cands = entry.at("candidates");
          for (std::size_t i = 0; i < cands.size(); ++i) {
            pool.candidates.push_back(parse_interval(cands[i], vid + "[" + std::to_string(i) + "]"));
          }
          pool.pointwise = entry.at("pointwise").get<std::vector<double>>();
          if (pool.size() > o.cfg.candidate_cap) {
            throw ValidationError(vid + ": " + std::to_string(pool.size()) + " candidates exceed cap " +
                                  std::to_string(o.cfg.candidate_cap));
          }
          std::vector<TableSequentialScorer::Step> steps;
          for (const auto& s : entry.at("steps")) {
            steps.push_back({s.at("probs").get<std::vector<double>>(), s.at("eos").get<double>()});
          }
          emit(vid, fuse_select(pool, TableSequentialScorer(std::move(steps)), o.cfg));
        } else {
          throw FormatError(o.scores + ": unknown mode '" + mode + "'");
        }
      } catch (const Json::exception& e) {
        throw FormatError(o.scores + ": video " + vid + ": " + e.what());
      }
    }
  }

  print_warnings(warnings, err);
  save_predictions(result, o.common.out);
  out << "selected " << total << " proposals over " << result.size() << " videos\n";
  return kOk;
}

// ---- rerank-proposals --------------------------------------------------------

struct RerankOptions {
  Common common;
  std::string pred;
  std::string meta;
  std::vector<std::string> gt;
  std::vector<double> weights = {1.0, 1.0, 1.0, 1.0};
  std::size_t top = 5;
};

int run_rerank_proposals(const RerankOptions& o, std::ostream& out, std::ostream& err) {
  require(o.weights.size() == 4, "weights must list four values: quality,describability,position,length");
  RerankWeights w{o.weights[0], o.weights[1], o.weights[2], o.weights[3], o.top};
  w.validate();
  require(!o.meta.empty() || !o.gt.empty(), "either --meta or --gt is required for video durations");

  const auto metas = resolve_metas(o.meta, o.gt);
  const PredictionMap preds = load_predictions(o.pred);
  std::vector<std::string> warnings;
  PredictionMap result;
  for (const auto& [vid, entries] : preds) {
    const VideoMeta* meta = find_meta(metas, vid, o.common.strict, warnings);
    if (!meta || entries.empty()) continue;
    const ProposalRerankResult ranked = proposal_rerank(entries, *meta, w);
    if (ranked.fewer_than_top_n) warnings.push_back(vid + ": fewer candidates than --top");
    if (ranked.missing_describability > 0) {
      warnings.push_back(vid + ": " + std::to_string(ranked.missing_describability) + " candidate(s) lack caption_logprob");
    }
    auto& dst = result[vid];
    for (const auto& r : ranked.ranked) dst.push_back(entries[r.index]);
  }
  print_warnings(warnings, err);
  save_predictions(result, o.common.out);
  out << "re-ranked " << result.size() << " videos\n";
  return kOk;
}

// ---- rerank-captions ---------------------------------------------------------

struct CaptionRerankOptions {
  Common common;
  std::vector<std::string> preds;
  std::string model;
  std::string features;
  std::string meta;
  std::vector<std::string> gt;
  CaptionRerankParams params;
  std::size_t k_segments = 20;
};

int run_rerank_captions(const CaptionRerankOptions& o, std::ostream& out, std::ostream& err) {
  o.params.validate();
  require(o.k_segments >= 1, "k-segments must be ≥ 1");
  require(!o.preds.empty(), "pred-multi needs at least one file");
  require(!o.meta.empty() || !o.gt.empty(), "either --meta or --gt is required for video durations");

  const LinearConceptModel model = load_model(o.model);
  const auto features = load_feature_source(o.features);
  const auto metas = resolve_metas(o.meta, o.gt);
  std::vector<PredictionMap> inputs;
  for (const auto& p : o.preds) inputs.push_back(load_predictions(p));

  std::vector<std::string> warnings;
  PredictionMap result;
  for (const auto& [vid, base] : inputs.front()) {
    const VideoMeta* meta = find_meta(metas, vid, o.common.strict, warnings);
    if (!meta) continue;
    auto fit = features.find(vid);
    if (fit == features.end()) throw FormatError("no features for video " + vid);
    const SegmentGrid grid = make_grid(*meta, &fit->second);

    auto& dst = result[vid];
    for (std::size_t i = 0; i < base.size(); ++i) {
      std::vector<std::string> hypotheses;
      for (std::size_t f = 0; f < inputs.size(); ++f) {
        auto it = inputs[f].find(vid);
        if (it == inputs[f].end() || it->second.size() != base.size()) {
          throw FormatError(o.preds[f] + ": proposals of " + vid + " do not align with " + o.preds.front());
        }
        const PredictionEntry& e = it->second[i];
        if (std::abs(e.interval.start_s - base[i].interval.start_s) > kCandidateDedupTol ||
            std::abs(e.interval.end_s - base[i].interval.end_s) > kCandidateDedupTol) {
          throw FormatError(o.preds[f] + ": interval " + vid + "[" + std::to_string(i) + "] differs across files");
        }
        if (e.sentence) hypotheses.push_back(*e.sentence);
      }
      PredictionEntry chosen = base[i];
      if (!hypotheses.empty()) {
        const auto probs = predict_proposal(model, grid, base[i].interval, o.k_segments);
        chosen.sentence = hypotheses[caption_rerank(hypotheses, probs, model.vocabulary, o.params)];
      }
      dst.push_back(std::move(chosen));
    }
  }
  print_warnings(warnings, err);
  save_predictions(result, o.common.out);
  out << "re-ranked captions for " << result.size() << " videos\n";
  return kOk;
}

// ---- augment -----------------------------------------------------------------

struct AugmentOptions {
  Common common;
  std::string pred;
  std::string gt;
  double min_tiou = 0.3;
};

int run_augment(const AugmentOptions& o, std::ostream& out, std::ostream& err) {
  require(o.min_tiou >= 0.0 && o.min_tiou < 1.0, "min-tiou must lie in [0, 1)");
  Corpus corpus = load_ground_truth(fs::path(o.gt));
  std::vector<std::string> warnings;
  attach_predictions(corpus, load_predictions(o.pred), o.common.strict, &warnings);
  print_warnings(warnings, err);

  Json doc = Json::object();
  std::size_t total = 0;
  for (const auto& [vid, rec] : corpus.videos) {
    std::vector<TimeInterval> preds;
    for (const auto& p : rec.predictions) preds.push_back(p.interval);
    const auto pairs = augment(preds, rec.annotations.front(), o.min_tiou);
    total += pairs.size();
    if (!pairs.empty()) doc[vid] = to_json(std::span<const AugmentedPair>(pairs));
  }
  write_json(o.common.out, doc);
  out << "emitted " << total << " augmented pairs\n";
  return kOk;
}

// ---- concepts ----------------------------------------------------------------

struct ConceptsTrainOptions {
  std::vector<std::string> gt;
  std::string features;
  std::string sidecar;
  std::string lexicon;
  std::size_t min_count = 1;
  TrainConfig cfg;
  std::string out;
  std::string json_out;
};

int run_concepts_train(const ConceptsTrainOptions& o, std::ostream& out) {
  o.cfg.validate();
  require(o.cfg.epochs >= 1, "epochs must be ≥ 1");

  std::optional<MetadataMap> sidecar;
  if (!o.sidecar.empty()) sidecar = load_metadata(o.sidecar);
  const auto paths = to_paths(o.gt);
  const Corpus corpus = load_ground_truth(paths, sidecar ? &*sidecar : nullptr);
  const auto features = load_feature_source(o.features);
  const auto lex_words = load_lexicon(o.lexicon);
  const std::set<std::string> lexicon(lex_words.begin(), lex_words.end());

  std::map<std::string, std::size_t> counts;
  for (const auto& [_, rec] : corpus.videos) {
    for (const auto& set : rec.annotations) {
      for (const auto& s : set.sentences) {
        for (const auto& tok : tokenize(s)) ++counts[tok];
      }
    }
  }
  ConceptVocabulary vocab = build_vocabulary(counts, lexicon, o.min_count);

  std::vector<SegmentGrid> grids;
  grids.reserve(corpus.size());
  for (const auto& [vid, rec] : corpus.videos) {
    auto it = features.find(vid);
    if (it == features.end()) throw FormatError("no features for video " + vid);
    grids.push_back(make_grid(rec.meta, &it->second));
  }
  std::vector<MimlExample> examples;
  std::size_t g = 0;
  for (const auto& [_, rec] : corpus.videos) {
    for (const auto& set : rec.annotations) {
      for (std::size_t e = 0; e < set.size(); ++e) {
        std::vector<std::uint8_t> labels(vocab.size(), 0);
        for (const auto& tok : tokenize(set.sentences[e])) {
          if (auto c = vocab.find(tok); c < vocab.size()) labels[c] = 1;
        }
        examples.push_back({set.intervals[e], std::cref(grids[g]), std::move(labels)});
      }
    }
    ++g;
  }

  const TrainResult trained = train(examples, std::move(vocab), o.cfg);
  save_model(trained.model, o.out);
  if (!o.json_out.empty()) save_model_json(trained.model, o.json_out);

  std::vector<MimlBag> bags;
  for (const auto& ex : examples) bags.push_back(make_bag(ex, o.cfg.k_segments));
  out << std::fixed << std::setprecision(6);
  out << "concepts=" << trained.model.num_concepts() << " dim=" << trained.model.dim << " examples=" << examples.size()
      << "\n";
  for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e) {
    if (e == 0 || (e + 1) % 10 == 0 || e + 1 == trained.epoch_loss.size()) {
      out << "epoch " << (e + 1) << " loss " << trained.epoch_loss[e] << "\n";
    }
  }
  out << "label accuracy " << label_accuracy(trained.model, bags) << "\n";
  return kOk;
}

struct ConceptsPredictOptions {
  std::string model;
  std::string features;
  std::string events;
  std::string meta;
  std::vector<std::string> gt;
  std::size_t k_segments = 20;
  std::size_t top = 10;
  bool strict = false;
  std::string out;
};

int run_concepts_predict(const ConceptsPredictOptions& o, std::ostream& out, std::ostream& err) {
  require(o.k_segments >= 1, "k-segments must be ≥ 1");
  require(o.top >= 1, "top must be ≥ 1");
  require(!o.meta.empty() || !o.gt.empty(), "either --meta or --gt is required for video durations");

  const LinearConceptModel model = load_model(o.model);
  const auto features = load_feature_source(o.features);
  const auto metas = resolve_metas(o.meta, o.gt);
  const PredictionMap events = load_predictions(o.events);

  std::vector<std::string> warnings;
  Json doc = Json::object();
  for (const auto& [vid, entries] : events) {
    const VideoMeta* meta = find_meta(metas, vid, o.strict, warnings);
    if (!meta) continue;
    auto it = features.find(vid);
    if (it == features.end()) throw FormatError("no features for video " + vid);
    const SegmentGrid grid = make_grid(*meta, &it->second);
    Json list = Json::array();
    for (const auto& e : entries) {
      const auto probs = predict_proposal(model, grid, e.interval, o.k_segments);
      std::vector<std::size_t> order(probs.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
      Json top = Json::array();
      for (std::size_t i = 0; i < std::min(o.top, order.size()); ++i) {
        top.push_back({{"concept", model.vocabulary.at(order[i])}, {"prob", probs[order[i]]}});
      }
      list.push_back({{"timestamp", {e.interval.start_s, e.interval.end_s}}, {"probs", probs}, {"top", std::move(top)}});
    }
    doc[vid] = std::move(list);
  }
  print_warnings(warnings, err);
  write_json(o.out, {{"vocabulary", model.vocabulary.concepts()}, {"results", std::move(doc)}});
  out << "predicted concepts for " << events.size() << " videos\n";
  return kOk;
}

// ---- contexts ------------------------------------------------------------------

struct ContextsOptions {
  std::string meta;
  std::string features;
  std::string events;
  ContextOptions options;
  std::string direction = "bi";
  std::string pool = "mean";
  bool strict = false;
  std::string out;
};

int run_contexts(const ContextsOptions& o, std::ostream& out, std::ostream& err) {
  ContextOptions opts = o.options;
  opts.direction = o.direction == "uni" ? Direction::kUni : Direction::kBi;
  opts.pool = o.pool == "max" ? PoolMode::kMax : PoolMode::kMean;
  opts.validate();

  const auto metas = resolve_metadata(load_metadata(o.meta));
  std::map<std::string, FeatureRecord> features;
  if (!o.features.empty()) features = load_feature_source(o.features);
  const PredictionMap events = load_predictions(o.events);

  std::vector<std::string> warnings;
  Json doc = Json::object();
  for (const auto& [vid, entries] : events) {
    const VideoMeta* meta = find_meta(metas, vid, o.strict, warnings);
    if (!meta) continue;
    auto it = features.find(vid);
    const SegmentGrid grid = make_grid(*meta, it == features.end() ? nullptr : &it->second);
    if (!o.features.empty() && it == features.end()) warnings.push_back(vid + ": no features, pooled vectors omitted");

    std::vector<TimeInterval> intervals;
    std::vector<std::string> captions;
    const bool all_captioned = std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.sentence.has_value(); });
    for (const auto& e : entries) {
      intervals.push_back(checked_interval(e.interval.start_s, e.interval.end_s, meta->duration_s, vid));
      if (all_captioned) captions.push_back(*e.sentence);
    }
    Json list = Json::array();
    for (const auto& b : build_context_bundles(grid, intervals, captions, opts)) list.push_back(to_json(b));
    doc[vid] = {{"segment_count", meta->segment_count()}, {"bundles", std::move(list)}};
  }
  print_warnings(warnings, err);
  write_json(o.out, doc);
  out << "wrote context bundles for " << doc.size() << " videos\n";
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool with_jobs) {
  sub->add_flag("--strict", c.strict, "Treat unknown video ids as errors");
  sub->add_flag("--json", c.json, "Print the structured report instead of the table");
  sub->add_option("--out", c.out, "Write the structured report to this file");
  if (with_jobs) sub->add_option("--jobs", c.jobs, "Per-video worker threads")->capture_default_str();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense video captioning toolkit: proposal fusion, context extraction, concept prediction and evaluation",
               "dvc"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a synthetic annotated corpus");
  gen_cmd->add_option("--videos", gen.cfg.videos, "Number of videos")->capture_default_str();
  gen_cmd->add_option("--seed", gen.cfg.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--min-events", gen.cfg.min_events)->capture_default_str();
  gen_cmd->add_option("--max-events", gen.cfg.max_events)->capture_default_str();
  gen_cmd->add_option("--mean-events", gen.cfg.mean_events)->capture_default_str();
  gen_cmd->add_option("--feature-dim", gen.cfg.feature_dim, "0 disables features")->capture_default_str();
  gen_cmd->add_option("--fps", gen.cfg.fps)->capture_default_str();
  gen_cmd->add_option("--frames-per-segment", gen.cfg.frames_per_segment)->capture_default_str();
  gen_cmd->add_flag("--no-second-set", gen.no_second_set, "Emit a single annotation set");
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();

  EvalOptions evp;
  auto* evp_cmd = app.add_subcommand("eval-proposals", "Proposal precision/recall at tIoU thresholds");
  evp_cmd->add_option("--pred", evp.pred)->required();
  evp_cmd->add_option("--gt", evp.gt, "Groundtruth file (repeat for a second set)")->required();
  evp_cmd->add_option("--meta", evp.sidecar, "Sidecar metadata (fps per video)");
  evp_cmd->add_option("--tiou", evp.tiou)->delimiter(',')->capture_default_str();
  add_common(evp_cmd, evp.common, true);

  EvalOptions evc;
  auto* evc_cmd = app.add_subcommand("eval-captions", "Dense captioning BLEU-4 / CIDEr-D at tIoU thresholds");
  evc_cmd->add_option("--pred", evc.pred)->required();
  evc_cmd->add_option("--gt", evc.gt)->required();
  evc_cmd->add_option("--meta", evc.sidecar);
  evc_cmd->add_option("--tiou", evc.tiou)->delimiter(',')->capture_default_str();
  add_common(evc_cmd, evc.common, true);

  DiversityOptions div;
  auto* div_cmd = app.add_subcommand("eval-diversity", "SelfB / RE / SelfB2 / RE2 caption diversity");
  div_cmd->add_option("--pred", div.pred)->required();
  div_cmd->add_option("--pred2", div.pred2, "Captions of a second proposal set");
  div_cmd->add_option("--n", div.n, "n-gram order for RE")->capture_default_str();
  add_common(div_cmd, div.common, false);

  FuseOptions fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fused ranking + sequential proposal selection");
  fuse_cmd->add_option("--meta", fuse.meta, "Metadata with durations")->required();
  fuse_cmd->add_option("--scores", fuse.scores, "Score tables or heuristic parameters");
  fuse_cmd->add_option("--attractors", fuse.attractors, "Groundtruth file used as heuristic attractors");
  fuse_cmd->add_option("--k", fuse.cfg.k)->capture_default_str();
  fuse_cmd->add_option("--cap", fuse.cfg.candidate_cap)->capture_default_str();
  fuse_cmd->add_option("--max-steps", fuse.cfg.max_steps)->capture_default_str();
  fuse_cmd->add_option("--scales", fuse.scales)->delimiter(',');
  fuse_cmd->add_option("--stride", fuse.stride)->capture_default_str();
  fuse_cmd->add_option("--out", fuse.common.out, "Predictions file")->required();
  fuse_cmd->add_flag("--strict", fuse.common.strict);

  RerankOptions rr;
  auto* rr_cmd = app.add_subcommand("rerank-proposals", "Four-factor proposal re-ranking");
  rr_cmd->add_option("--pred", rr.pred)->required();
  rr_cmd->add_option("--meta", rr.meta, "Metadata with durations");
  rr_cmd->add_option("--gt", rr.gt, "Groundtruth file(s) providing durations");
  rr_cmd->add_option("--weights", rr.weights, "quality,describability,position,length")->delimiter(',');
  rr_cmd->add_option("--top", rr.top)->capture_default_str();
  rr_cmd->add_option("--out", rr.common.out)->required();
  rr_cmd->add_flag("--strict", rr.common.strict);

  CaptionRerankOptions cr;
  auto* cr_cmd = app.add_subcommand("rerank-captions", "Pick the best caption per proposal across models");
  cr_cmd->add_option("--pred-multi", cr.preds, "Comma-separated prediction files")->delimiter(',')->required();
  cr_cmd->add_option("--concept-model", cr.model)->required();
  cr_cmd->add_option("--features", cr.features)->required();
  cr_cmd->add_option("--meta", cr.meta);
  cr_cmd->add_option("--gt", cr.gt);
  cr_cmd->add_option("--alpha", cr.params.alpha)->capture_default_str();
  cr_cmd->add_option("--beta", cr.params.beta)->capture_default_str();
  cr_cmd->add_option("--top-concepts", cr.params.top_concepts)->capture_default_str();
  cr_cmd->add_option("--k-segments", cr.k_segments)->capture_default_str();
  cr_cmd->add_option("--out", cr.common.out)->required();
  cr_cmd->add_flag("--strict", cr.common.strict);

  AugmentOptions aug;
  auto* aug_cmd = app.add_subcommand("augment", "Pair predicted proposals with best-matched groundtruth captions");
  aug_cmd->add_option("--pred", aug.pred)->required();
  aug_cmd->add_option("--gt", aug.gt)->required();
  aug_cmd->add_option("--min-tiou", aug.min_tiou, "Strict lower bound on tIoU")->capture_default_str();
  aug_cmd->add_option("--out", aug.common.out)->required();
  aug_cmd->add_flag("--strict", aug.common.strict);

  auto* concepts_cmd = app.add_subcommand("concepts", "Train or apply the concept predictor");
  concepts_cmd->require_subcommand(1);
  ConceptsTrainOptions ct;
  auto* ct_cmd = concepts_cmd->add_subcommand("train", "Train a concept predictor");
  ct_cmd->add_option("--gt", ct.gt)->required();
  ct_cmd->add_option("--features", ct.features, "Feature file or directory")->required();
  ct_cmd->add_option("--meta", ct.sidecar, "Sidecar metadata (fps per video)");
  ct_cmd->add_option("--lexicon", ct.lexicon, "Noun/verb word list")->required();
  ct_cmd->add_option("--min-count", ct.min_count)->capture_default_str();
  ct_cmd->add_option("--epochs", ct.cfg.epochs)->capture_default_str();
  ct_cmd->add_option("--lr", ct.cfg.learning_rate)->capture_default_str();
  ct_cmd->add_option("--batch", ct.cfg.batch_size)->capture_default_str();
  ct_cmd->add_option("--k-segments", ct.cfg.k_segments)->capture_default_str();
  ct_cmd->add_option("--seed", ct.cfg.seed)->capture_default_str();
  ct_cmd->add_option("--init-scale", ct.cfg.weight_init_scale)->capture_default_str();
  ct_cmd->add_option("--out", ct.out, "Binary model file")->required();
  ct_cmd->add_option("--json-out", ct.json_out, "Structured-text model export");

  ConceptsPredictOptions cp;
  auto* cp_cmd = concepts_cmd->add_subcommand("predict", "Proposal-level concept probabilities");
  cp_cmd->add_option("--model", cp.model)->required();
  cp_cmd->add_option("--features", cp.features)->required();
  cp_cmd->add_option("--events", cp.events, "Predictions-format file of proposals")->required();
  cp_cmd->add_option("--meta", cp.meta);
  cp_cmd->add_option("--gt", cp.gt);
  cp_cmd->add_option("--k-segments", cp.k_segments)->capture_default_str();
  cp_cmd->add_option("--top", cp.top)->capture_default_str();
  cp_cmd->add_option("--out", cp.out)->required();
  cp_cmd->add_flag("--strict", cp.strict);

  ContextsOptions ctx;
  auto* ctx_cmd = app.add_subcommand("contexts", "Extract per-event context bundles");
  ctx_cmd->add_option("--meta", ctx.meta, "Metadata with durations")->required();
  ctx_cmd->add_option("--features", ctx.features, "Feature file or directory");
  ctx_cmd->add_option("--events", ctx.events, "Predictions-format file of events")->required();
  ctx_cmd->add_option("--window-ratio", ctx.options.window_ratio)->capture_default_str();
  ctx_cmd->add_option("--direction", ctx.direction)->check(CLI::IsMember({"uni", "bi"}))->capture_default_str();
  ctx_cmd->add_option("--pool", ctx.pool)->check(CLI::IsMember({"mean", "max"}))->capture_default_str();
  ctx_cmd->add_option("--out", ctx.out)->required();
  ctx_cmd->add_flag("--strict", ctx.strict);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidation;
  }

  try {
    if (app.got_subcommand(gen_cmd)) return run_gen(gen, out);
    if (app.got_subcommand(evp_cmd)) return run_eval_proposals(evp, out, err);
    if (app.got_subcommand(evc_cmd)) return run_eval_captions(evc, out, err);
    if (app.got_subcommand(div_cmd)) return run_eval_diversity(div, out);
    if (app.got_subcommand(fuse_cmd)) return run_fuse(fuse, out, err);
    if (app.got_subcommand(rr_cmd)) return run_rerank_proposals(rr, out, err);
    if (app.got_subcommand(cr_cmd)) return run_rerank_captions(cr, out, err);
    if (app.got_subcommand(aug_cmd)) return run_augment(aug, out, err);
    if (concepts_cmd->got_subcommand(ct_cmd)) return run_concepts_train(ct, out);
    if (concepts_cmd->got_subcommand(cp_cmd)) return run_concepts_predict(cp, out, err);
    if (app.got_subcommand(ctx_cmd)) return run_contexts(ctx, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  err << app.help();
  return kValidation;
}

}  // namespace dvc::cli
