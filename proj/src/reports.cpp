#include "dvc/reports.hpp"

#include <iomanip>

#include "dvc/error.hpp"

namespace dvc {

namespace {

Json range_json(const IndexRange& r) { return {r.begin, r.end}; }

Json diversity_value_json(const DiversityValue& v) {
  return {{"value", v.value}, {"videos_used", v.videos_used}, {"videos_excluded", v.videos_excluded},
          {"per_video", v.per_video}};
}

DiversityValue diversity_value_from_json(const Json& j) {
  DiversityValue v;
  v.value = j.at("value").get<double>();
  v.videos_used = j.at("videos_used").get<std::size_t>();
  v.videos_excluded = j.at("videos_excluded").get<std::size_t>();
  v.per_video = j.at("per_video").get<std::map<std::string, double>>();
  return v;
}

template <typename Fn>
auto parse_report(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const PRTable& table) {
  Json per_video = Json::array();
  for (const auto& v : table.per_video) {
    Json counts = Json::array();
    for (const auto& c : v.counts) {
      counts.push_back({{"matched_predictions", c.matched_predictions}, {"matched_groundtruth", c.matched_groundtruth}});
    }
    per_video.push_back({{"video_id", v.video_id},
                         {"num_predictions", v.num_predictions},
                         {"num_groundtruth", v.num_groundtruth},
                         {"no_predictions", v.no_predictions},
                         {"counts", std::move(counts)}});
  }
  return {{"thresholds", table.thresholds},
          {"precision", table.precision},
          {"recall", table.recall},
          {"avg_proposals_per_video", table.avg_proposals_per_video},
          {"num_videos", table.num_videos},
          {"zero_prediction_videos", table.zero_prediction_videos},
          {"per_video", std::move(per_video)}};
}

PRTable pr_table_from_json(const Json& doc) {
  return parse_report("PR table", [&] {
    PRTable t;
    t.thresholds = doc.at("thresholds").get<std::vector<double>>();
    t.precision = doc.at("precision").get<std::vector<double>>();
    t.recall = doc.at("recall").get<std::vector<double>>();
    t.avg_proposals_per_video = doc.at("avg_proposals_per_video").get<double>();
    t.num_videos = doc.at("num_videos").get<std::size_t>();
    t.zero_prediction_videos = doc.at("zero_prediction_videos").get<std::size_t>();
    for (const auto& v : doc.at("per_video")) {
      VideoProposalEval e;
      e.video_id = v.at("video_id").get<std::string>();
      e.num_predictions = v.at("num_predictions").get<std::size_t>();
      e.num_groundtruth = v.at("num_groundtruth").get<std::size_t>();
      e.no_predictions = v.at("no_predictions").get<bool>();
      for (const auto& c : v.at("counts")) {
        e.counts.push_back({c.at("matched_predictions").get<std::size_t>(), c.at("matched_groundtruth").get<std::size_t>()});
      }
      t.per_video.push_back(std::move(e));
    }
    return t;
  });
}

Json to_json(const DenseEvalReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.per_threshold) {
    rows.push_back({{"tiou", r.tiou},
                    {"BLEU", r.bleu4},
                    {"BLEU_smoothed", r.bleu4_smoothed},
                    {"BLEU_corpus", r.bleu4_corpus},
                    {"CIDEr", r.cider},
                    {"external", r.external},
                    {"matched", r.matched},
                    {"unmatched", r.unmatched}});
  }
  return {{"BLEU", report.bleu4},
          {"BLEU_smoothed", report.bleu4_smoothed},
          {"BLEU_corpus", report.bleu4_corpus},
          {"CIDEr", report.cider},
          {"external", report.external},
          {"num_videos", report.num_videos},
          {"videos_without_predictions", report.videos_without_predictions},
          {"per_threshold", std::move(rows)}};
}

DenseEvalReport dense_eval_from_json(const Json& doc) {
  return parse_report("dense eval report", [&] {
    DenseEvalReport r;
    r.bleu4 = doc.at("BLEU").get<double>();
    r.bleu4_smoothed = doc.at("BLEU_smoothed").get<double>();
    r.bleu4_corpus = doc.at("BLEU_corpus").get<double>();
    r.cider = doc.at("CIDEr").get<double>();
    r.external = doc.at("external").get<std::map<std::string, double>>();
    r.num_videos = doc.at("num_videos").get<std::size_t>();
    r.videos_without_predictions = doc.at("videos_without_predictions").get<std::size_t>();
    for (const auto& row : doc.at("per_threshold")) {
      DenseEvalThreshold t;
      t.tiou = row.at("tiou").get<double>();
      t.bleu4 = row.at("BLEU").get<double>();
      t.bleu4_smoothed = row.at("BLEU_smoothed").get<double>();
      t.bleu4_corpus = row.at("BLEU_corpus").get<double>();
      t.cider = row.at("CIDEr").get<double>();
      t.external = row.at("external").get<std::map<std::string, double>>();
      t.matched = row.at("matched").get<std::size_t>();
      t.unmatched = row.at("unmatched").get<std::size_t>();
      r.per_threshold.push_back(std::move(t));
    }
    return r;
  });
}

Json to_json(const DiversityReport& report) {
  return {{"SelfB", diversity_value_json(report.self_bleu)},
          {"RE", diversity_value_json(report.repetition)},
          {"SelfB2", diversity_value_json(report.self_bleu2)},
          {"RE2", diversity_value_json(report.repetition2)},
          {"n", report.n},
          {"num_sets", report.num_sets}};
}

DiversityReport diversity_from_json(const Json& doc) {
  return parse_report("diversity report", [&] {
    DiversityReport r;
    r.self_bleu = diversity_value_from_json(doc.at("SelfB"));
    r.repetition = diversity_value_from_json(doc.at("RE"));
    r.self_bleu2 = diversity_value_from_json(doc.at("SelfB2"));
    r.repetition2 = diversity_value_from_json(doc.at("RE2"));
    r.n = doc.at("n").get<std::size_t>();
    r.num_sets = doc.at("num_sets").get<std::size_t>();
    return r;
  });
}

Json to_json(const EventContextBundle& b) {
  std::vector<int> mask(b.global_mask.begin(), b.global_mask.end());
  Json j = {{"event_index", b.event_index},
            {"event", {b.event.start_s, b.event.end_s}},
            {"event_range", range_json(b.event_range)},
            {"local_before", range_json(b.local_before)},
            {"local_after", range_json(b.local_after)},
            {"global_mask", mask},
            {"neighbor_events", b.neighbor_events},
            {"sentence_history", b.sentence_history},
            {"empty_before", b.empty_before},
            {"empty_after", b.empty_after},
            {"empty_global", b.empty_global}};
  if (!b.event_feature.empty()) {
    j["pooled"] = {{"event", b.event_feature},
                   {"before", b.before_feature},
                   {"after", b.after_feature},
                   {"global", b.global_feature}};
  }
  return j;
}

Json to_json(std::span<const AugmentedPair> pairs) {
  Json out = Json::array();
  for (const auto& p : pairs) {
    out.push_back({{"timestamp", {p.interval.start_s, p.interval.end_s}},
                   {"gt_index", p.gt_index},
                   {"tiou", p.tiou},
                   {"sentence", p.caption}});
  }
  return out;
}

void print_table(std::ostream& os, const PRTable& table) {
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(4);
  os << std::setw(8) << "tIoU" << std::setw(12) << "Precision" << std::setw(12) << "Recall" << "\n";
  for (std::size_t t = 0; t < table.thresholds.size(); ++t) {
    os << std::setw(8) << table.thresholds[t] << std::setw(12) << table.precision[t] << std::setw(12)
       << table.recall[t] << "\n";
  }
  for (std::size_t t = 0; t < table.thresholds.size(); ++t) {
    os << "tIoU=" << std::setprecision(2) << table.thresholds[t] << std::setprecision(4) << " P=" << table.precision[t]
       << " R=" << table.recall[t] << "\n";
  }
  os << "videos=" << table.num_videos << " avg_proposals=" << table.avg_proposals_per_video
     << " zero_prediction_videos=" << table.zero_prediction_videos << "\n";
  os.flags(flags);
}

void print_table(std::ostream& os, const DenseEvalReport& report) {
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(4);
  os << std::setw(8) << "tIoU" << std::setw(10) << "BLEU" << std::setw(12) << "BLEU(sm)" << std::setw(12)
     << "BLEU(corp)" << std::setw(10) << "CIDEr" << std::setw(10) << "matched" << std::setw(11) << "unmatched" << "\n";
  for (const auto& r : report.per_threshold) {
    os << std::setw(8) << r.tiou << std::setw(10) << r.bleu4 << std::setw(12) << r.bleu4_smoothed << std::setw(12)
       << r.bleu4_corpus << std::setw(10) << r.cider << std::setw(10) << r.matched << std::setw(11) << r.unmatched
       << "\n";
  }
  os << std::setw(8) << "mean" << std::setw(10) << report.bleu4 << std::setw(12) << report.bleu4_smoothed
     << std::setw(12) << report.bleu4_corpus << std::setw(10) << report.cider << "\n";
  os.flags(flags);
}

void print_table(std::ostream& os, const DiversityReport& report) {
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(2);
  os << std::setw(10) << "SelfB" << std::setw(10) << "RE" << std::setw(10) << "SelfB2" << std::setw(10) << "RE2"
     << "\n";
  os << std::setw(10) << report.self_bleu.value << std::setw(10) << report.repetition.value << std::setw(10)
     << report.self_bleu2.value << std::setw(10) << report.repetition2.value << "\n";
  os << "sets=" << report.num_sets << " n=" << report.n << " excluded(SelfB)=" << report.self_bleu.videos_excluded
     << "\n";
  os.flags(flags);
}

}  // namespace dvc
