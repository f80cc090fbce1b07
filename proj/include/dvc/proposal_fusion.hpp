#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "dvc/types.hpp"

namespace dvc {

/// Tolerance under which two candidate intervals count as the same window.
inline constexpr double kCandidateDedupTol = 1e-6;

/// Fractions of the video duration used as default window lengths.
std::vector<double> default_window_scales();

/// Multi-scale sliding windows, sorted by (start, length) and deduplicated.
/// Each scale s yields windows of length s*duration every stride_ratio*s*duration
/// seconds; the last window of a scale is shifted to end at the video end.
std::vector<TimeInterval> enumerate_sliding_windows(const VideoMeta& meta, std::span<const double> scales,
                                                    double stride_ratio);

/// Pointwise ranking model: independent score per candidate, in (0, 1].
class PointwiseScorer {
 public:
  virtual ~PointwiseScorer() = default;
  virtual double score(const TimeInterval& candidate, const SegmentGrid& grid) const = 0;
};

struct CandidatePool {
  std::vector<TimeInterval> candidates;
  std::vector<double> pointwise;  // f_s per candidate, same order

  std::size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }

  // Checks sizes, score range (0, 1] and absence of duplicates.
  void validate() const;
};

/// Scores every window, drops duplicates and keeps the `cap` best by score
/// (stable, so equal scores keep enumeration order).
CandidatePool build_candidate_pool(std::span<const TimeInterval> windows, const PointwiseScorer& scorer,
                                   const SegmentGrid& grid, std::size_t cap);

/// Sequential (pointer-style) model. Given the selected prefix (pool indices,
/// in selection order) and the still-available candidates, returns a
/// probability for each entry of `remaining` followed by the EOS probability.
class SequentialScorer {
 public:
  virtual ~SequentialScorer() = default;
  virtual std::vector<double> distribution(std::span<const std::size_t> prefix, const CandidatePool& pool,
                                           std::span<const std::size_t> remaining) const = 0;
};

struct FusionConfig {
  std::size_t k = 1;
  std::size_t max_steps = 20;
  std::size_t candidate_cap = 80;

  void validate() const;
};

struct SelectedProposal {
  std::size_t pool_index = 0;
  TimeInterval interval;
  double fused_score = 0.0;
};

struct FusionResult {
  std::vector<SelectedProposal> selected;  // P', in selection order
  std::vector<std::size_t> prefix;         // sequence chosen by the fused argmax
  std::size_t steps = 0;
  bool stopped_by_eos = false;
};

/// Fused inference over a candidate pool. At every step the sequential model's
/// raw argmax decides whether to stop (EOS); otherwise candidates are scored
/// by f_s * f_e, the best one extends the prefix and the top-k are appended to
/// the output (without duplicates). Prefix members are not scored again.
FusionResult fuse_select(const CandidatePool& pool, const SequentialScorer& sequential, const FusionConfig& cfg);

/// Test oracle standing in for a trained ranking model: best tIoU against a
/// set of planted intervals, floored at 1e-3.
class HeuristicPointwiseScorer final : public PointwiseScorer {
 public:
  explicit HeuristicPointwiseScorer(std::vector<TimeInterval> attractors);
  double score(const TimeInterval& candidate, const SegmentGrid& grid) const override;

 private:
  std::vector<TimeInterval> attractors_;
};

/// Test oracle standing in for a pointer network. A candidate's weight is its
/// best tIoU with an attractor that no prefix member covers (tIoU >= 0.5);
/// EOS weighs 1 once every attractor is covered and 0.05 before that.
class HeuristicSequentialScorer final : public SequentialScorer {
 public:
  explicit HeuristicSequentialScorer(std::vector<TimeInterval> attractors);
  std::vector<double> distribution(std::span<const std::size_t> prefix, const CandidatePool& pool,
                                   std::span<const std::size_t> remaining) const override;

 private:
  std::vector<TimeInterval> attractors_;
};

/// Precomputed per-step tables. Step t reads row t: one probability per pool
/// candidate plus EOS. Entries of already-selected candidates are ignored.
/// Steps past the end of the table put all mass on EOS.
class TableSequentialScorer final : public SequentialScorer {
 public:
  struct Step {
    std::vector<double> probs;
    double eos = 0.0;
  };

  explicit TableSequentialScorer(std::vector<Step> steps);
  std::vector<double> distribution(std::span<const std::size_t> prefix, const CandidatePool& pool,
                                   std::span<const std::size_t> remaining) const override;

 private:
  std::vector<Step> steps_;
};

}  // namespace dvc
