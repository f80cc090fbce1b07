#include "dvc/rerank_augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "dvc/error.hpp"
#include "dvc/interval_ops.hpp"

namespace dvc {

namespace {

// Z-scores are rounded to this resolution so that rescaling a factor cannot
// reorder exact ties through last-bit noise.
constexpr double kZScale = 1e9;

// Z-scores of the present values; absent entries and constant factors give 0.
std::vector<double> z_normalize(const std::vector<std::optional<double>>& values) {
  std::vector<double> out(values.size(), 0.0);
  std::vector<double> present;
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  if (present.size() < 2) return out;
  const auto [lo, hi] = std::minmax_element(present.begin(), present.end());
  if (*lo == *hi) return out;

  const double n = static_cast<double>(present.size());
  const double mean = std::accumulate(present.begin(), present.end(), 0.0) / n;
  double var = 0.0;
  for (double x : present) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) out[i] = std::round((*values[i] - mean) / sd * kZScale) / kZScale;
  }
  return out;
}

}  // namespace

void RerankWeights::validate() const {
  for (double w : {quality, describability, position, length}) {
    if (!std::isfinite(w)) throw ValidationError("weights must be finite");
  }
  if (top_n < 1) throw ValidationError("top must be ≥ 1");
}

RerankFactors rerank_factors(const PredictionEntry& candidate, const VideoMeta& meta) {
  if (!candidate.proposal_score) throw ValidationError("proposal_rerank: candidate without proposal_score");
  RerankFactors f;
  f.quality = *candidate.proposal_score;
  if (candidate.caption_logprob) {
    const std::size_t tokens = candidate.sentence ? tokenize(*candidate.sentence).size() : 0;
    f.describability = *candidate.caption_logprob / static_cast<double>(std::max<std::size_t>(1, tokens));
  }
  f.position = candidate.interval.center() / meta.duration_s;
  f.length = candidate.interval.length() / meta.duration_s;
  return f;
}

ProposalRerankResult proposal_rerank(std::span<const RerankFactors> factors, std::span<const TimeInterval> intervals,
                                     const RerankWeights& weights) {
  weights.validate();
  if (factors.size() != intervals.size()) throw ValidationError("proposal_rerank: factor/interval count mismatch");

  const std::size_t n = factors.size();
  std::vector<std::optional<double>> quality, describability, position, length;
  ProposalRerankResult result;
  for (const auto& f : factors) {
    quality.emplace_back(f.quality);
    describability.push_back(f.describability);
    position.emplace_back(f.position);
    length.emplace_back(f.length);
    result.missing_describability += !f.describability.has_value();
  }
  const auto zq = z_normalize(quality);
  const auto zd = z_normalize(describability);
  const auto zp = z_normalize(position);
  const auto zl = z_normalize(length);

  std::vector<RankedProposal> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    all[i] = {i, weights.quality * zq[i] + weights.describability * zd[i] + weights.position * zp[i] +
                     weights.length * zl[i]};
  }
  std::sort(all.begin(), all.end(), [&](const RankedProposal& a, const RankedProposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (intervals[a.index].start_s != intervals[b.index].start_s) {
      return intervals[a.index].start_s < intervals[b.index].start_s;
    }
    return a.index < b.index;
  });
  result.fewer_than_top_n = n < weights.top_n;
  all.resize(std::min(n, weights.top_n));
  result.ranked = std::move(all);
  return result;
}

ProposalRerankResult proposal_rerank(std::span<const PredictionEntry> candidates, const VideoMeta& meta,
                                     const RerankWeights& weights) {
  std::vector<RerankFactors> factors;
  std::vector<TimeInterval> intervals;
  for (const auto& c : candidates) {
    factors.push_back(rerank_factors(c, meta));
    intervals.push_back(c.interval);
  }
  return proposal_rerank(factors, intervals, weights);
}

void CaptionRerankParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) throw ValidationError("alpha and beta must be finite");
  if (top_concepts < 1) throw ValidationError("top-concepts must be ≥ 1");
}

bool is_stopword(const std::string& token) {
  static const std::unordered_set<std::string> kStopwords = {
      "a",    "an",   "the",  "and",  "or",   "but",  "of",   "to",   "in",   "on",   "at",    "by",
      "for",  "with", "from", "into", "onto", "up",   "down", "out",  "over", "is",   "are",   "was",
      "were", "be",   "been", "being", "it",  "its",  "he",   "she",  "they", "them", "his",   "her",
      "their", "this", "that", "these", "those", "while", "then", "as", "who", "which", "there", "some"};
  return kStopwords.count(token) != 0;
}

CaptionScore score_caption(const Tokens& caption, std::span<const double> concept_probs,
                           const ConceptVocabulary& vocabulary, const CaptionRerankParams& params) {
  if (concept_probs.size() != vocabulary.size()) throw ValidationError("caption_rerank: concept probabilities do not match vocabulary");
  CaptionScore s;
  if (!caption.empty()) {
    const std::set<std::string> unique(caption.begin(), caption.end());
    s.unique_ratio = static_cast<double>(unique.size()) / static_cast<double>(caption.size());
  }

  std::vector<std::size_t> order(concept_probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return concept_probs[a] > concept_probs[b]; });
  order.resize(std::min(order.size(), params.top_concepts));
  std::unordered_set<std::string> top;
  for (std::size_t i : order) top.insert(vocabulary.at(i));

  std::size_t content = 0;
  std::size_t hits = 0;
  for (const auto& tok : caption) {
    if (is_stopword(tok)) continue;
    ++content;
    hits += top.count(tok);
  }
  if (content > 0) s.concept_match = static_cast<double>(hits) / static_cast<double>(content);
  s.score = params.alpha * s.unique_ratio + params.beta * s.concept_match;
  return s;
}

std::size_t caption_rerank(std::span<const std::string> hypotheses, std::span<const double> concept_probs,
                           const ConceptVocabulary& vocabulary, const CaptionRerankParams& params) {
  params.validate();
  if (hypotheses.empty()) throw ValidationError("caption_rerank: empty hypothesis list");
  std::size_t best = 0;
  double best_score = -INFINITY;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const double s = score_caption(tokenize(hypotheses[i]), concept_probs, vocabulary, params).score;
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

std::vector<AugmentedPair> augment(std::span<const TimeInterval> predictions, const AnnotationSet& annotations,
                                   double min_tiou) {
  if (annotations.intervals.empty()) throw ValidationError("augment: empty annotation set");
  std::vector<AugmentedPair> out;
  for (const auto& pred : predictions) {
    const MatchResult m = best_match(pred, annotations.intervals);
    if (m.gt_index && m.tiou > min_tiou) {
      out.push_back({pred, *m.gt_index, m.tiou, annotations.sentences[*m.gt_index]});
    }
  }
  return out;
}

}  // namespace dvc
