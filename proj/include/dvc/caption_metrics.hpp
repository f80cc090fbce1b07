#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dvc/types.hpp"

namespace dvc {

using Tokens = std::vector<std::string>;

/// Lowercases, splits on whitespace and strips leading/trailing characters
/// outside [a-z0-9] from every token; empty tokens are dropped.
Tokens tokenize(std::string_view sentence);

enum class Smoothing { kOff, kOn };

/// Clipped n-gram statistics of one candidate against its references.
struct BleuStats {
  std::array<std::size_t, 4> matched{};
  std::array<std::size_t, 4> total{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;  // closest reference length, ties to the shorter

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const Tokens& candidate, std::span<const Tokens> references);

/// BLEU-4 from (possibly accumulated) statistics. Smoothing adds one to the
/// numerator and denominator of the n >= 2 precisions.
double bleu_from_stats(const BleuStats& stats, Smoothing smoothing);

/// Sentence-level BLEU-4 in [0, 1]; 0 for an empty candidate.
double bleu4(const Tokens& candidate, std::span<const Tokens> references, Smoothing smoothing = Smoothing::kOff);

/// CIDEr-D with n = 1..4, sigma = 6 and x10 scaling. Document frequencies come
/// from the reference sets passed at construction (one document per event).
class CiderD {
 public:
  explicit CiderD(std::span<const std::vector<Tokens>> documents);

  double score(const Tokens& candidate, std::span<const Tokens> references) const;
  std::size_t num_documents() const { return num_documents_; }

 private:
  std::unordered_map<std::string, std::size_t> document_frequency_;
  std::size_t num_documents_ = 0;
  double log_documents_ = 0.0;
};

struct CiderPair {
  Tokens candidate;
  std::vector<Tokens> references;
};

/// Mean CIDEr-D over the pairs, with the pairs' reference sets as the corpus.
double cider_d(std::span<const CiderPair> pairs);

/// Externally computed caption metric (e.g. METEOR): candidate vs references.
struct ExternalMetric {
  std::string name;
  std::function<double(const Tokens& candidate, std::span<const Tokens> references)> score;
};

struct DenseEvalThreshold {
  double tiou = 0.0;
  double bleu4 = 0.0;           // mean sentence-level, unsmoothed
  double bleu4_smoothed = 0.0;  // mean sentence-level, smoothed
  double bleu4_corpus = 0.0;    // corpus-level over all predictions
  double cider = 0.0;
  std::map<std::string, double> external;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

struct DenseEvalReport {
  std::vector<DenseEvalThreshold> per_threshold;
  // Means over thresholds.
  double bleu4 = 0.0;
  double bleu4_smoothed = 0.0;
  double bleu4_corpus = 0.0;
  double cider = 0.0;
  std::map<std::string, double> external;
  std::size_t num_videos = 0;
  std::size_t videos_without_predictions = 0;
};

/// Caption accuracy of predicted proposals. At threshold t each prediction is
/// scored against every groundtruth sentence (from all annotation sets) whose
/// interval reaches tIoU >= t; unmatched predictions score 0. Video score is
/// the mean over its predictions, threshold score the mean over groundtruth
/// videos, final score the mean over thresholds.
DenseEvalReport dense_eval(const Corpus& corpus, std::span<const double> thresholds,
                           std::span<const ExternalMetric> external = {}, std::size_t jobs = 1);

/// Captions of one annotation / proposal set, keyed by video id.
using CaptionSet = std::map<std::string, std::vector<Tokens>>;

enum class DiversityMode { kPerSet, kCombined };

struct DiversityValue {
  double value = 0.0;  // in [0, 100]
  std::map<std::string, double> per_video;
  std::size_t videos_used = 0;
  std::size_t videos_excluded = 0;  // too few captions / no n-grams
};

/// Mean over captions of smoothed BLEU-4 against the video's other captions,
/// x100, averaged over videos with at least two captions.
DiversityValue self_bleu(std::span<const CaptionSet> sets, DiversityMode mode);

/// 100 * (repeated n-gram occurrences) / (all n-gram occurrences) per video,
/// n-grams taken within captions, averaged over videos.
DiversityValue repetition(std::span<const CaptionSet> sets, std::size_t n, DiversityMode mode);

struct DiversityReport {
  DiversityValue self_bleu;    // SelfB: per set, averaged over sets
  DiversityValue repetition;   // RE
  DiversityValue self_bleu2;   // SelfB2: sets pooled per video
  DiversityValue repetition2;  // RE2
  std::size_t n = 4;
  std::size_t num_sets = 0;
};

DiversityReport diversity_report(std::span<const CaptionSet> sets, std::size_t n = 4);

/// Tokenized captions of a prediction map (entries without a sentence are skipped).
CaptionSet caption_set(const PredictionMap& predictions);

}  // namespace dvc
