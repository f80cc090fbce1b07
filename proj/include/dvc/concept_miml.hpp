#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dvc/types.hpp"

namespace dvc {

class ConceptVocabulary {
 public:
  ConceptVocabulary() = default;
  explicit ConceptVocabulary(std::vector<std::string> concepts);

  std::size_t size() const { return concepts_.size(); }
  const std::string& at(std::size_t i) const { return concepts_.at(i); }
  const std::vector<std::string>& concepts() const { return concepts_; }
  // Index of `word`, or size() when absent.
  std::size_t find(const std::string& word) const;

  friend bool operator==(const ConceptVocabulary& a, const ConceptVocabulary& b) { return a.concepts_ == b.concepts_; }

 private:
  std::vector<std::string> concepts_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Lexicon words with count >= min_count, by descending count then
/// lexicographically. Throws ValidationError when nothing qualifies.
ConceptVocabulary build_vocabulary(const std::map<std::string, std::size_t>& token_counts,
                                   const std::set<std::string>& lexicon, std::size_t min_count);

/// Linear-sigmoid concept predictor: p = sigmoid(W x + b), W is C x D row-major.
struct LinearConceptModel {
  ConceptVocabulary vocabulary;
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  std::size_t num_concepts() const { return bias.size(); }
  double& w(std::size_t c, std::size_t d) { return weights[c * dim + d]; }
  double w(std::size_t c, std::size_t d) const { return weights[c * dim + d]; }

  // Zero-initialized model for the given vocabulary and feature dimension.
  static LinearConceptModel zeros(ConceptVocabulary vocabulary, std::size_t dim);
  void validate() const;
};

/// Logits are clamped to +-30 before the sigmoid.
std::vector<double> predict_segment(const LinearConceptModel& model, std::span<const double> feature);
std::vector<double> predict_segment(const LinearConceptModel& model, std::span<const float> feature);

/// K indices spread evenly over segment_range(proposal): round(linspace(i, j-1, K)).
std::vector<std::size_t> select_even_segments(const TimeInterval& proposal, const VideoMeta& meta, std::size_t k);

/// Element-wise max of the segment predictions over the K evenly selected segments.
std::vector<double> predict_proposal(const LinearConceptModel& model, const SegmentGrid& grid,
                                     const TimeInterval& proposal, std::size_t k);

/// Mean binary cross entropy; probabilities are clamped to [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> probs, std::span<const std::uint8_t> labels);

/// A proposal with its sampled segment features (the instances) and labels.
struct MimlBag {
  std::vector<std::vector<double>> instances;  // K rows of D values
  std::vector<std::uint8_t> labels;            // C binary labels
};

struct MimlExample {
  TimeInterval proposal;
  std::reference_wrapper<const SegmentGrid> grid;
  std::vector<std::uint8_t> labels;
};

MimlBag make_bag(const MimlExample& example, std::size_t k_segments);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t k_segments = 20;
  std::uint64_t seed = 0;
  double weight_init_scale = 0.01;

  void validate() const;
};

struct Gradient {
  double loss = 0.0;
  std::vector<double> weights;  // C x D, same layout as the model
  std::vector<double> bias;
};

/// Proposal-level loss averaged over bags and its (sub)gradient. Each concept
/// routes its gradient through the first instance attaining the max logit.
double miml_loss(const LinearConceptModel& model, std::span<const MimlBag> bags);
Gradient miml_gradient(const LinearConceptModel& model, std::span<const MimlBag> bags);

/// Proposal-level prediction for a bag (max over instances).
std::vector<double> predict_bag(const LinearConceptModel& model, const MimlBag& bag);

struct TrainResult {
  LinearConceptModel model;
  std::vector<double> epoch_loss;  // full-data loss after each epoch
};

/// Mini-batch gradient descent from a seeded Gaussian initialization.
/// Throws NumericError naming the epoch when the loss becomes non-finite.
TrainResult train(std::span<const MimlBag> bags, ConceptVocabulary vocabulary, const TrainConfig& cfg);
TrainResult train(std::span<const MimlExample> examples, ConceptVocabulary vocabulary, const TrainConfig& cfg);

/// Fraction of (bag, concept) decisions at threshold 0.5 that agree with the labels.
double label_accuracy(const LinearConceptModel& model, std::span<const MimlBag> bags);

/// Per-segment targets: every segment covered by a proposal receives its
/// labels, overlaps are OR-ed, uncovered segments stay all-zero.
std::vector<std::vector<std::uint8_t>> assign_segment_labels(std::span<const TimeInterval> proposals,
                                                             std::span<const std::vector<std::uint8_t>> labels,
                                                             const VideoMeta& meta, std::size_t num_concepts);

/// Binary layout (little endian): "DVCM", u32 version, u64 C, u64 D, C x
/// (u32 length + bytes) concept names, C*D float64 weights, C float64 bias.
void save_model(const LinearConceptModel& model, const std::filesystem::path& path);
LinearConceptModel load_model(const std::filesystem::path& path);
/// Structured-text export (and import) of the same content.
void save_model_json(const LinearConceptModel& model, const std::filesystem::path& path);
LinearConceptModel load_model_json(const std::filesystem::path& path);

}  // namespace dvc
