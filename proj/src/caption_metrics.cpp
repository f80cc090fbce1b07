#include "dvc/caption_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <set>

#include "dvc/error.hpp"
#include "dvc/interval_ops.hpp"
#include "dvc/parallel.hpp"

namespace dvc {

namespace {

constexpr std::size_t kMaxOrder = 4;
constexpr double kCiderSigma = 6.0;

using NgramCounts = std::unordered_map<std::string, std::size_t>;

bool is_word_char(unsigned char ch) { return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9'); }

std::string join_ngram(const Tokens& tokens, std::size_t start, std::size_t n) {
  std::string key = tokens[start];
  for (std::size_t i = 1; i < n; ++i) {
    key.push_back('\x1f');
    key += tokens[start + i];
  }
  return key;
}

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[join_ngram(tokens, i, n)];
  return counts;
}

// All n-grams of orders 1..4, keyed by joined text (orders never collide
// because the separator count differs).
NgramCounts count_all_orders(const Tokens& tokens) {
  NgramCounts all;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    for (auto& [k, v] : count_ngrams(tokens, n)) all[k] += v;
  }
  return all;
}

std::size_t ngram_order(const std::string& key) {
  return 1 + static_cast<std::size_t>(std::count(key.begin(), key.end(), '\x1f'));
}

struct TfIdfVector {
  std::array<std::unordered_map<std::string, double>, kMaxOrder> vec;
  std::array<double, kMaxOrder> norm{};
  double length = 0.0;
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

Tokens tokenize(std::string_view sentence) {
  Tokens out;
  std::string current;
  auto flush = [&] {
    std::size_t b = 0;
    std::size_t e = current.size();
    while (b < e && !is_word_char(static_cast<unsigned char>(current[b]))) ++b;
    while (e > b && !is_word_char(static_cast<unsigned char>(current[e - 1]))) --e;
    if (e > b) out.push_back(current.substr(b, e - b));
    current.clear();
  };
  for (char ch : sentence) {
    const auto uch = static_cast<unsigned char>(ch);
    if (std::isspace(uch)) {
      flush();
    } else {
      current.push_back(static_cast<char>(std::tolower(uch)));
    }
  }
  flush();
  return out;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    matched[n] += other.matched[n];
    total[n] += other.total[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(const Tokens& candidate, std::span<const Tokens> references) {
  BleuStats st;
  st.candidate_length = candidate.size();

  std::size_t best_diff = SIZE_MAX;
  for (const auto& ref : references) {
    const std::size_t diff = ref.size() > candidate.size() ? ref.size() - candidate.size() : candidate.size() - ref.size();
    if (diff < best_diff || (diff == best_diff && ref.size() < st.reference_length)) {
      best_diff = diff;
      st.reference_length = ref.size();
    }
  }

  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [g, c] : count_ngrams(ref, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    std::size_t matched = 0;
    for (const auto& [g, c] : cand) {
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    st.matched[n - 1] = matched;
    st.total[n - 1] = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  }
  return st;
}

double bleu_from_stats(const BleuStats& stats, Smoothing smoothing) {
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    double m = static_cast<double>(stats.matched[n]);
    double t = static_cast<double>(stats.total[n]);
    if (n >= 1 && smoothing == Smoothing::kOn) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double r = static_cast<double>(stats.reference_length);
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::clamp(brevity * std::exp(log_sum / kMaxOrder), 0.0, 1.0);
}

double bleu4(const Tokens& candidate, std::span<const Tokens> references, Smoothing smoothing) {
  if (references.empty()) throw ValidationError("bleu4: no references");
  if (candidate.empty()) return 0.0;
  return bleu_from_stats(bleu_stats(candidate, references), smoothing);
}

CiderD::CiderD(std::span<const std::vector<Tokens>> documents) : num_documents_(documents.size()) {
  if (documents.empty()) throw ValidationError("cider_d: empty reference corpus");
  for (const auto& refs : documents) {
    std::set<std::string> seen;
    for (const auto& ref : refs) {
      for (const auto& [g, _] : count_all_orders(ref)) seen.insert(g);
    }
    for (const auto& g : seen) ++document_frequency_[g];
  }
  log_documents_ = std::log(static_cast<double>(num_documents_));
}

double CiderD::score(const Tokens& candidate, std::span<const Tokens> references) const {
  if (references.empty()) throw ValidationError("cider_d: no references for candidate");

  auto to_vector = [this](const Tokens& tokens) {
    TfIdfVector v;
    for (const auto& [g, tf] : count_all_orders(tokens)) {
      const std::size_t order = ngram_order(g);
      auto it = document_frequency_.find(g);
      const double df = std::log(std::max(1.0, it == document_frequency_.end() ? 0.0 : static_cast<double>(it->second)));
      const double weight = static_cast<double>(tf) * (log_documents_ - df);
      v.vec[order - 1][g] = weight;
      v.norm[order - 1] += weight * weight;
      // Length is measured in bigrams, as in the reference CIDEr-D scorer.
      if (order == 2) v.length += static_cast<double>(tf);
    }
    for (double& n : v.norm) n = std::sqrt(n);
    return v;
  };

  const TfIdfVector hyp = to_vector(candidate);
  std::array<double, kMaxOrder> total{};
  for (const auto& ref_tokens : references) {
    const TfIdfVector ref = to_vector(ref_tokens);
    const double delta = hyp.length - ref.length;
    const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
      double val = 0.0;
      for (const auto& [g, w] : hyp.vec[n]) {
        auto it = ref.vec[n].find(g);
        if (it != ref.vec[n].end()) val += std::min(w, it->second) * it->second;
      }
      if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) val /= hyp.norm[n] * ref.norm[n];
      total[n] += val * penalty;
    }
  }
  double avg = 0.0;
  for (double v : total) avg += v;
  avg /= static_cast<double>(kMaxOrder);
  avg /= static_cast<double>(references.size());
  return avg * 10.0;
}

double cider_d(std::span<const CiderPair> pairs) {
  std::vector<std::vector<Tokens>> docs;
  docs.reserve(pairs.size());
  for (const auto& p : pairs) docs.push_back(p.references);
  const CiderD scorer(docs);
  double sum = 0.0;
  for (const auto& p : pairs) sum += scorer.score(p.candidate, p.references);
  return sum / static_cast<double>(pairs.size());
}

DenseEvalReport dense_eval(const Corpus& corpus, std::span<const double> thresholds,
                           std::span<const ExternalMetric> external, std::size_t jobs) {
  validate_thresholds(thresholds);

  struct VideoData {
    std::vector<TimeInterval> pred_intervals;
    std::vector<Tokens> pred_tokens;
    std::vector<TimeInterval> gt_intervals;
    std::vector<Tokens> gt_tokens;
  };
  std::vector<VideoData> videos;
  for (const auto& [vid, rec] : corpus.videos) {
    if (rec.annotations.empty()) continue;
    VideoData v;
    for (std::size_t i = 0; i < rec.predictions.size(); ++i) {
      const auto& p = rec.predictions[i];
      if (!p.sentence) throw ValidationError("dense_eval: prediction " + vid + "[" + std::to_string(i) + "] has no sentence");
      v.pred_intervals.push_back(p.interval);
      v.pred_tokens.push_back(tokenize(*p.sentence));
    }
    for (const auto& set : rec.annotations) {
      for (std::size_t g = 0; g < set.size(); ++g) {
        v.gt_intervals.push_back(set.intervals[g]);
        v.gt_tokens.push_back(tokenize(set.sentences[g]));
      }
    }
    videos.push_back(std::move(v));
  }

  DenseEvalReport report;
  report.num_videos = videos.size();
  for (const auto& v : videos) report.videos_without_predictions += v.pred_tokens.empty();
  if (videos.empty()) {
    for (double t : thresholds) {
      DenseEvalThreshold row;
      row.tiou = t;
      report.per_threshold.push_back(row);
    }
    return report;
  }

  const std::size_t num_ext = external.size();
  for (double t : thresholds) {
    // references[v][p] = matched groundtruth sentences of prediction p.
    std::vector<std::vector<std::vector<Tokens>>> references(videos.size());
    parallel_for(videos.size(), jobs, [&](std::size_t vi) {
      const VideoData& v = videos[vi];
      references[vi].resize(v.pred_intervals.size());
      for (std::size_t p = 0; p < v.pred_intervals.size(); ++p) {
        for (std::size_t g = 0; g < v.gt_intervals.size(); ++g) {
          if (tiou(v.pred_intervals[p], v.gt_intervals[g]) >= t) references[vi][p].push_back(v.gt_tokens[g]);
        }
      }
    });

    std::vector<std::vector<Tokens>> documents;
    for (const auto& per_video : references) {
      for (const auto& refs : per_video) {
        if (!refs.empty()) documents.push_back(refs);
      }
    }
    std::optional<CiderD> cider;
    if (!documents.empty()) cider.emplace(documents);

    struct VideoScores {
      double bleu = 0.0, bleu_smoothed = 0.0, cider = 0.0;
      std::vector<double> external;
      BleuStats corpus_stats;
      std::size_t matched = 0, unmatched = 0;
    };
    std::vector<VideoScores> scores(videos.size());
    parallel_for(videos.size(), jobs, [&](std::size_t vi) {
      const VideoData& v = videos[vi];
      VideoScores& s = scores[vi];
      s.external.assign(num_ext, 0.0);
      const std::size_t n = v.pred_tokens.size();
      for (std::size_t p = 0; p < n; ++p) {
        const auto& refs = references[vi][p];
        if (refs.empty()) {
          ++s.unmatched;
          BleuStats st = bleu_stats(v.pred_tokens[p], {});
          st.reference_length = 0;
          s.corpus_stats += st;
          continue;
        }
        ++s.matched;
        const BleuStats st = bleu_stats(v.pred_tokens[p], refs);
        s.corpus_stats += st;
        if (!v.pred_tokens[p].empty()) {
          s.bleu += bleu_from_stats(st, Smoothing::kOff);
          s.bleu_smoothed += bleu_from_stats(st, Smoothing::kOn);
        }
        s.cider += cider->score(v.pred_tokens[p], refs);
        for (std::size_t e = 0; e < num_ext; ++e) s.external[e] += external[e].score(v.pred_tokens[p], refs);
      }
      if (n > 0) {
        s.bleu /= static_cast<double>(n);
        s.bleu_smoothed /= static_cast<double>(n);
        s.cider /= static_cast<double>(n);
        for (double& x : s.external) x /= static_cast<double>(n);
      }
    });

    DenseEvalThreshold row;
    row.tiou = t;
    BleuStats corpus_stats;
    std::vector<double> ext_sum(num_ext, 0.0);
    for (const auto& s : scores) {
      row.bleu4 += s.bleu;
      row.bleu4_smoothed += s.bleu_smoothed;
      row.cider += s.cider;
      for (std::size_t e = 0; e < num_ext; ++e) ext_sum[e] += s.external[e];
      corpus_stats += s.corpus_stats;
      row.matched += s.matched;
      row.unmatched += s.unmatched;
    }
    const double nv = static_cast<double>(videos.size());
    row.bleu4 /= nv;
    row.bleu4_smoothed /= nv;
    row.cider /= nv;
    for (std::size_t e = 0; e < num_ext; ++e) row.external[external[e].name] = ext_sum[e] / nv;
    row.bleu4_corpus = bleu_from_stats(corpus_stats, Smoothing::kOff);
    report.per_threshold.push_back(std::move(row));
  }

  const double nt = static_cast<double>(report.per_threshold.size());
  for (const auto& row : report.per_threshold) {
    report.bleu4 += row.bleu4 / nt;
    report.bleu4_smoothed += row.bleu4_smoothed / nt;
    report.bleu4_corpus += row.bleu4_corpus / nt;
    report.cider += row.cider / nt;
    for (const auto& [name, v] : row.external) report.external[name] += v / nt;
  }
  return report;
}

namespace {

// Per-video captions for one evaluation unit: either one set, or all sets pooled.
std::vector<CaptionSet> diversity_units(std::span<const CaptionSet> sets, DiversityMode mode) {
  if (mode == DiversityMode::kPerSet) return {sets.begin(), sets.end()};
  CaptionSet pooled;
  for (const auto& set : sets) {
    for (const auto& [vid, caps] : set) {
      auto& dst = pooled[vid];
      dst.insert(dst.end(), caps.begin(), caps.end());
    }
  }
  return {pooled};
}

template <typename VideoFn>
DiversityValue average_units(std::span<const CaptionSet> sets, DiversityMode mode, VideoFn&& video_score) {
  DiversityValue out;
  std::map<std::string, std::vector<double>> per_video;
  std::vector<double> unit_values;
  for (const auto& unit : diversity_units(sets, mode)) {
    std::vector<double> values;
    for (const auto& [vid, caps] : unit) {
      if (auto v = video_score(caps)) {
        values.push_back(*v);
        per_video[vid].push_back(*v);
      } else {
        ++out.videos_excluded;
      }
    }
    if (!values.empty()) unit_values.push_back(mean(values));
    out.videos_used += values.size();
  }
  out.value = mean(unit_values);
  for (const auto& [vid, vals] : per_video) out.per_video[vid] = mean(vals);
  return out;
}

}  // namespace

DiversityValue self_bleu(std::span<const CaptionSet> sets, DiversityMode mode) {
  return average_units(sets, mode, [](const std::vector<Tokens>& caps) -> std::optional<double> {
    if (caps.size() < 2) return std::nullopt;
    double sum = 0.0;
    std::vector<Tokens> rest;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      rest.clear();
      for (std::size_t j = 0; j < caps.size(); ++j) {
        if (j != i) rest.push_back(caps[j]);
      }
      sum += bleu4(caps[i], rest, Smoothing::kOn);
    }
    return 100.0 * sum / static_cast<double>(caps.size());
  });
}

DiversityValue repetition(std::span<const CaptionSet> sets, std::size_t n, DiversityMode mode) {
  if (n < 1) throw ValidationError("n must be >= 1");
  return average_units(sets, mode, [n](const std::vector<Tokens>& caps) -> std::optional<double> {
    NgramCounts counts;
    for (const auto& cap : caps) {
      for (const auto& [g, c] : count_ngrams(cap, n)) counts[g] += c;
    }
    std::size_t total = 0;
    std::size_t repeated = 0;
    for (const auto& [g, c] : counts) {
      total += c;
      repeated += c - 1;
    }
    if (total == 0) return std::nullopt;
    return (100.0 * static_cast<double>(repeated)) / static_cast<double>(total);
  });
}

DiversityReport diversity_report(std::span<const CaptionSet> sets, std::size_t n) {
  DiversityReport r;
  r.n = n;
  r.num_sets = sets.size();
  r.self_bleu = self_bleu(sets, DiversityMode::kPerSet);
  r.repetition = repetition(sets, n, DiversityMode::kPerSet);
  r.self_bleu2 = self_bleu(sets, DiversityMode::kCombined);
  r.repetition2 = repetition(sets, n, DiversityMode::kCombined);
  return r;
}

CaptionSet caption_set(const PredictionMap& predictions) {
  CaptionSet out;
  for (const auto& [vid, entries] : predictions) {
    auto& caps = out[vid];
    for (const auto& e : entries) {
      if (e.sentence) caps.push_back(tokenize(*e.sentence));
    }
  }
  return out;
}

}  // namespace dvc
