#include "dvc/proposal_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dvc/error.hpp"
#include "dvc/interval_ops.hpp"

namespace dvc {

namespace {

constexpr double kDistributionTol = 1e-6;
constexpr double kPointwiseFloor = 1e-3;
constexpr double kCoverThreshold = 0.5;
constexpr double kEosWeightOpen = 0.05;

bool same_window(const TimeInterval& a, const TimeInterval& b) {
  return std::abs(a.start_s - b.start_s) <= kCandidateDedupTol && std::abs(a.end_s - b.end_s) <= kCandidateDedupTol;
}

void check_distribution(const std::vector<double>& dist, std::size_t expected) {
  if (dist.size() != expected) {
    throw NumericError("sequential scorer returned " + std::to_string(dist.size()) + " probabilities, expected " +
                       std::to_string(expected));
  }
  double sum = 0.0;
  for (double p : dist) {
    if (!std::isfinite(p) || p < 0.0) throw NumericError("sequential scorer returned a negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTol) {
    throw NumericError("sequential scorer output sums to " + std::to_string(sum) + ", not 1");
  }
}

}  // namespace

std::vector<double> default_window_scales() { return {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}; }

std::vector<TimeInterval> enumerate_sliding_windows(const VideoMeta& meta, std::span<const double> scales,
                                                    double stride_ratio) {
  meta.validate();
  if (!(stride_ratio > 0.0 && stride_ratio <= 1.0)) throw ValidationError("stride ratio must lie in (0, 1]");
  const double duration = meta.duration_s;

  std::vector<TimeInterval> windows;
  for (double scale : scales) {
    if (!(scale > 0.0 && scale <= 1.0)) throw ValidationError("window scales must lie in (0, 1]");
    const double length = scale * duration;
    const double stride = stride_ratio * length;
    double last_end = 0.0;
    for (std::size_t k = 0;; ++k) {
      const double start = static_cast<double>(k) * stride;
      if (start + length > duration + kCandidateDedupTol) break;
      const double end = std::min(start + length, duration);
      windows.push_back({start, end});
      last_end = end;
    }
    if (last_end < duration - kCandidateDedupTol) windows.push_back({std::max(0.0, duration - length), duration});
  }

  std::sort(windows.begin(), windows.end(), [](const TimeInterval& a, const TimeInterval& b) {
    if (a.start_s != b.start_s) return a.start_s < b.start_s;
    return a.length() < b.length();
  });
  std::vector<TimeInterval> unique;
  for (const auto& w : windows) {
    const bool dup = std::any_of(unique.rbegin(), unique.rend(), [&](const TimeInterval& u) { return same_window(u, w); });
    if (!dup) unique.push_back(w);
  }
  return unique;
}

void CandidatePool::validate() const {
  if (candidates.size() != pointwise.size()) throw ValidationError("candidate pool: score count mismatch");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i].valid()) throw ValidationError("candidate pool: invalid interval at " + std::to_string(i));
    const double s = pointwise[i];
    if (!(s > 0.0 && s <= 1.0)) throw ValidationError("candidate pool: pointwise score outside (0, 1] at " + std::to_string(i));
    for (std::size_t j = 0; j < i; ++j) {
      if (same_window(candidates[i], candidates[j])) {
        throw ValidationError("candidate pool: duplicate candidates " + std::to_string(j) + " and " + std::to_string(i));
      }
    }
  }
}

CandidatePool build_candidate_pool(std::span<const TimeInterval> windows, const PointwiseScorer& scorer,
                                   const SegmentGrid& grid, std::size_t cap) {
  if (cap < 1) throw ValidationError("cap must be >= 1");
  std::vector<TimeInterval> unique;
  std::vector<double> scores;
  for (const auto& w : windows) {
    if (std::any_of(unique.begin(), unique.end(), [&](const TimeInterval& u) { return same_window(u, w); })) continue;
    unique.push_back(w);
    scores.push_back(scorer.score(w, grid));
  }

  std::vector<std::size_t> order(unique.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(order.size(), cap));

  CandidatePool pool;
  for (std::size_t i : order) {
    pool.candidates.push_back(unique[i]);
    pool.pointwise.push_back(scores[i]);
  }
  pool.validate();
  return pool;
}

void FusionConfig::validate() const {
  if (k < 1) throw ValidationError("k must be ≥ 1");
  if (max_steps < 1) throw ValidationError("max_steps must be ≥ 1");
  if (candidate_cap < 1) throw ValidationError("cap must be ≥ 1");
}

FusionResult fuse_select(const CandidatePool& pool, const SequentialScorer& sequential, const FusionConfig& cfg) {
  cfg.validate();
  pool.validate();
  if (pool.empty()) throw ValidationError("fuse_select: empty candidate pool");

  FusionResult result;
  std::vector<std::size_t> remaining(pool.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<bool> emitted(pool.size(), false);

  while (result.steps < cfg.max_steps && !remaining.empty()) {
    const std::vector<double> dist = sequential.distribution(result.prefix, pool, remaining);
    check_distribution(dist, remaining.size() + 1);

    // EOS sits last, so a candidate tied with EOS keeps the loop going.
    const auto arg = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    if (arg == remaining.size()) {
      result.stopped_by_eos = true;
      break;
    }

    std::vector<std::pair<double, std::size_t>> fused;  // (s, position in remaining)
    fused.reserve(remaining.size());
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      fused.emplace_back(pool.pointwise[remaining[r]] * dist[r], r);
    }
    // remaining stays sorted by pool index, so position order is index order.
    std::stable_sort(fused.begin(), fused.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    const std::size_t top = std::min(cfg.k, fused.size());
    for (std::size_t i = 0; i < top; ++i) {
      const std::size_t idx = remaining[fused[i].second];
      if (emitted[idx]) continue;
      emitted[idx] = true;
      result.selected.push_back({idx, pool.candidates[idx], fused[i].first});
    }
    const std::size_t best = remaining[fused.front().second];
    result.prefix.push_back(best);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(fused.front().second));
    ++result.steps;
  }
  return result;
}

HeuristicPointwiseScorer::HeuristicPointwiseScorer(std::vector<TimeInterval> attractors)
    : attractors_(std::move(attractors)) {}

double HeuristicPointwiseScorer::score(const TimeInterval& candidate, const SegmentGrid&) const {
  double best = 0.0;
  for (const auto& a : attractors_) best = std::max(best, tiou(candidate, a));
  return std::max(best, kPointwiseFloor);
}

HeuristicSequentialScorer::HeuristicSequentialScorer(std::vector<TimeInterval> attractors)
    : attractors_(std::move(attractors)) {}

std::vector<double> HeuristicSequentialScorer::distribution(std::span<const std::size_t> prefix,
                                                            const CandidatePool& pool,
                                                            std::span<const std::size_t> remaining) const {
  std::vector<const TimeInterval*> open;
  for (const auto& a : attractors_) {
    const bool covered = std::any_of(prefix.begin(), prefix.end(), [&](std::size_t p) {
      return tiou(pool.candidates[p], a) >= kCoverThreshold;
    });
    if (!covered) open.push_back(&a);
  }

  std::vector<double> weights;
  weights.reserve(remaining.size() + 1);
  for (std::size_t r : remaining) {
    double w = 0.0;
    for (const TimeInterval* a : open) w = std::max(w, tiou(pool.candidates[r], *a));
    weights.push_back(w);
  }
  weights.push_back(open.empty() ? 1.0 : kEosWeightOpen);

  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return weights;
}

TableSequentialScorer::TableSequentialScorer(std::vector<Step> steps) : steps_(std::move(steps)) {}

std::vector<double> TableSequentialScorer::distribution(std::span<const std::size_t> prefix,
                                                        const CandidatePool& pool,
                                                        std::span<const std::size_t> remaining) const {
  std::vector<double> out(remaining.size() + 1, 0.0);
  if (prefix.size() >= steps_.size()) {
    out.back() = 1.0;
    return out;
  }
  const Step& step = steps_[prefix.size()];
  if (step.probs.size() != pool.size()) {
    throw ValidationError("score table step " + std::to_string(prefix.size()) + " has " +
                          std::to_string(step.probs.size()) + " entries for a pool of " + std::to_string(pool.size()));
  }
  for (std::size_t r = 0; r < remaining.size(); ++r) out[r] = step.probs[remaining[r]];
  out.back() = step.eos;
  return out;
}

}  // namespace dvc
