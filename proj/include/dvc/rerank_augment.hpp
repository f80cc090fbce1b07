#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvc/caption_metrics.hpp"
#include "dvc/concept_miml.hpp"
#include "dvc/types.hpp"

namespace dvc {

struct RerankWeights {
  double quality = 1.0;
  double describability = 1.0;
  double position = 1.0;
  double length = 1.0;
  std::size_t top_n = 5;

  void validate() const;
};

/// Raw per-candidate factors before normalization.
struct RerankFactors {
  double quality = 0.0;
  std::optional<double> describability;  // length-normalized caption log-probability
  double position = 0.0;                 // center / duration
  double length = 0.0;                   // length / duration
};

RerankFactors rerank_factors(const PredictionEntry& candidate, const VideoMeta& meta);

struct RankedProposal {
  std::size_t index = 0;  // position in the input list
  double score = 0.0;
};

struct ProposalRerankResult {
  std::vector<RankedProposal> ranked;  // best first, at most top_n
  bool fewer_than_top_n = false;
  std::size_t missing_describability = 0;
};

/// Z-normalizes each factor across the candidates (constant factor -> zeros;
/// a missing describability -> 0), sums with the weights and keeps the top_n.
/// Ties go to the earlier start, then to the earlier input position.
ProposalRerankResult proposal_rerank(std::span<const RerankFactors> factors, std::span<const TimeInterval> intervals,
                                     const RerankWeights& weights);
ProposalRerankResult proposal_rerank(std::span<const PredictionEntry> candidates, const VideoMeta& meta,
                                     const RerankWeights& weights);

struct CaptionRerankParams {
  double alpha = 0.5;
  double beta = 0.5;
  std::size_t top_concepts = 20;

  void validate() const;
};

struct CaptionScore {
  double unique_ratio = 0.0;
  double concept_match = 0.0;
  double score = 0.0;
};

/// Unique-token ratio and fraction of content tokens found among the
/// top_concepts most probable concepts.
CaptionScore score_caption(const Tokens& caption, std::span<const double> concept_probs,
                           const ConceptVocabulary& vocabulary, const CaptionRerankParams& params);

/// Index of the best hypothesis; the first one wins ties.
std::size_t caption_rerank(std::span<const std::string> hypotheses, std::span<const double> concept_probs,
                           const ConceptVocabulary& vocabulary, const CaptionRerankParams& params);

/// Words ignored when matching captions against concepts.
bool is_stopword(const std::string& token);

struct AugmentedPair {
  TimeInterval interval;
  std::size_t gt_index = 0;
  double tiou = 0.0;
  std::string caption;
};

/// Predictions whose best groundtruth match has tIoU strictly above
/// `min_tiou`, labeled with that groundtruth sentence.
std::vector<AugmentedPair> augment(std::span<const TimeInterval> predictions, const AnnotationSet& annotations,
                                   double min_tiou = 0.3);

}  // namespace dvc
