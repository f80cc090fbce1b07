#include "dvc/concept_miml.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "dvc/error.hpp"
#include "dvc/io.hpp"

namespace dvc {

namespace {

constexpr double kLogitClamp = 30.0;
constexpr double kProbClamp = 1e-7;
constexpr char kModelMagic[4] = {'D', 'V', 'C', 'M'};
constexpr std::uint32_t kModelVersion = 1;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <typename T>
double raw_logit(const LinearConceptModel& model, std::size_t c, std::span<const T> x) {
  double z = model.bias[c];
  const double* row = model.weights.data() + c * model.dim;
  for (std::size_t d = 0; d < model.dim; ++d) z += row[d] * static_cast<double>(x[d]);
  return z;
}

template <typename T>
std::vector<double> predict_impl(const LinearConceptModel& model, std::span<const T> x) {
  if (x.size() != model.dim) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                          std::to_string(model.dim));
  }
  std::vector<double> out(model.num_concepts());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = sigmoid(std::clamp(raw_logit(model, c, x), -kLogitClamp, kLogitClamp));
  }
  return out;
}

// Per concept: index of the first instance with the largest raw logit. A NaN
// logit wins so that non-finite parameters surface in the loss.
std::vector<std::size_t> argmax_instances(const LinearConceptModel& model, const MimlBag& bag,
                                          std::vector<double>& max_logit) {
  const std::size_t C = model.num_concepts();
  std::vector<std::size_t> arg(C, 0);
  max_logit.assign(C, -INFINITY);
  for (std::size_t k = 0; k < bag.instances.size(); ++k) {
    std::span<const double> x(bag.instances[k]);
    for (std::size_t c = 0; c < C; ++c) {
      const double z = raw_logit(model, c, x);
      if (std::isnan(max_logit[c])) continue;
      if (std::isnan(z) || z > max_logit[c]) {
        max_logit[c] = z;
        arg[c] = k;
      }
    }
  }
  return arg;
}

void check_bags(const LinearConceptModel& model, std::span<const MimlBag> bags) {
  for (const auto& bag : bags) {
    if (bag.instances.empty()) throw ValidationError("MIML bag without instances");
    if (bag.labels.size() != model.num_concepts()) throw ValidationError("MIML bag label count does not match C");
    for (const auto& x : bag.instances) {
      if (x.size() != model.dim) throw ValidationError("MIML instance dimension does not match D");
    }
  }
}

}  // namespace

ConceptVocabulary::ConceptVocabulary(std::vector<std::string> concepts) : concepts_(std::move(concepts)) {
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    if (!lookup_.emplace(concepts_[i], i).second) throw ValidationError("duplicate concept '" + concepts_[i] + "'");
  }
}

std::size_t ConceptVocabulary::find(const std::string& word) const {
  auto it = lookup_.find(word);
  return it == lookup_.end() ? concepts_.size() : it->second;
}

ConceptVocabulary build_vocabulary(const std::map<std::string, std::size_t>& token_counts,
                                   const std::set<std::string>& lexicon, std::size_t min_count) {
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : token_counts) {
    if (count >= min_count && lexicon.count(token)) kept.emplace_back(token, count);
  }
  if (kept.empty()) throw ValidationError("concept vocabulary is empty (min count " + std::to_string(min_count) + ")");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  for (auto& [w, _] : kept) words.push_back(w);
  return ConceptVocabulary(std::move(words));
}

LinearConceptModel LinearConceptModel::zeros(ConceptVocabulary vocabulary, std::size_t dim) {
  LinearConceptModel m;
  const std::size_t C = vocabulary.size();
  m.vocabulary = std::move(vocabulary);
  m.dim = dim;
  m.weights.assign(C * dim, 0.0);
  m.bias.assign(C, 0.0);
  return m;
}

void LinearConceptModel::validate() const {
  if (vocabulary.size() == 0) throw ValidationError("concept model has an empty vocabulary");
  if (bias.size() != vocabulary.size() || weights.size() != bias.size() * dim) {
    throw ValidationError("concept model dimensions are inconsistent");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(weights.begin(), weights.end(), finite) || !std::all_of(bias.begin(), bias.end(), finite)) {
    throw ValidationError("concept model has non-finite parameters");
  }
}

std::vector<double> predict_segment(const LinearConceptModel& model, std::span<const double> feature) {
  return predict_impl(model, feature);
}

std::vector<double> predict_segment(const LinearConceptModel& model, std::span<const float> feature) {
  return predict_impl(model, feature);
}

std::vector<std::size_t> select_even_segments(const TimeInterval& proposal, const VideoMeta& meta, std::size_t k) {
  if (k < 1) throw ValidationError("k-segments must be >= 1");
  const IndexRange r = segment_range(proposal, meta);
  const double first = static_cast<double>(r.begin);
  const double last = static_cast<double>(r.end - 1);
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = k == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(k - 1);
    out[i] = static_cast<std::size_t>(std::lround(first + t * (last - first)));
  }
  return out;
}

std::vector<double> predict_proposal(const LinearConceptModel& model, const SegmentGrid& grid,
                                     const TimeInterval& proposal, std::size_t k) {
  if (!grid.features) throw ValidationError("predict_proposal: no features for video " + grid.meta.video_id);
  std::vector<double> out(model.num_concepts(), 0.0);
  for (std::size_t seg : select_even_segments(proposal, grid.meta, k)) {
    const auto p = predict_segment(model, grid.features->row(seg));
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::max(out[c], p[c]);
  }
  return out;
}

double bce_loss(std::span<const double> probs, std::span<const std::uint8_t> labels) {
  if (probs.size() != labels.size()) throw ValidationError("bce_loss: size mismatch");
  if (probs.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const double p = std::clamp(probs[c], kProbClamp, 1.0 - kProbClamp);
    sum += labels[c] ? std::log(p) : std::log1p(-p);
  }
  return -sum / static_cast<double>(probs.size());
}

MimlBag make_bag(const MimlExample& example, std::size_t k_segments) {
  const SegmentGrid& grid = example.grid.get();
  if (!grid.features) throw ValidationError("MIML example for " + grid.meta.video_id + " has no features");
  MimlBag bag;
  bag.labels = example.labels;
  for (std::size_t seg : select_even_segments(example.proposal, grid.meta, k_segments)) {
    auto row = grid.features->row(seg);
    bag.instances.emplace_back(row.begin(), row.end());
  }
  return bag;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValidationError("lr must be >= 0");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (k_segments < 1) throw ValidationError("k-segments must be >= 1");
  if (!(weight_init_scale >= 0.0)) throw ValidationError("weight init scale must be >= 0");
}

std::vector<double> predict_bag(const LinearConceptModel& model, const MimlBag& bag) {
  std::vector<double> max_logit;
  argmax_instances(model, bag, max_logit);
  std::vector<double> out(max_logit.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = sigmoid(std::clamp(max_logit[c], -kLogitClamp, kLogitClamp));
  return out;
}

double miml_loss(const LinearConceptModel& model, std::span<const MimlBag> bags) {
  check_bags(model, bags);
  if (bags.empty()) return 0.0;
  double total = 0.0;
  for (const auto& bag : bags) total += bce_loss(predict_bag(model, bag), bag.labels);
  return total / static_cast<double>(bags.size());
}

Gradient miml_gradient(const LinearConceptModel& model, std::span<const MimlBag> bags) {
  check_bags(model, bags);
  const std::size_t C = model.num_concepts();
  Gradient g;
  g.weights.assign(model.weights.size(), 0.0);
  g.bias.assign(C, 0.0);
  if (bags.empty()) return g;

  const double scale = 1.0 / (static_cast<double>(bags.size()) * static_cast<double>(C));
  std::vector<double> max_logit;
  for (const auto& bag : bags) {
    const auto arg = argmax_instances(model, bag, max_logit);
    std::vector<double> probs(C);
    for (std::size_t c = 0; c < C; ++c) {
      const double z = max_logit[c];
      const double p = sigmoid(std::clamp(z, -kLogitClamp, kLogitClamp));
      probs[c] = p;
      // Both clamps have zero derivative where they are active.
      if (std::abs(z) > kLogitClamp || p < kProbClamp || p > 1.0 - kProbClamp) continue;
      const double dz = (p - static_cast<double>(bag.labels[c])) * scale;
      const auto& x = bag.instances[arg[c]];
      double* row = g.weights.data() + c * model.dim;
      for (std::size_t d = 0; d < model.dim; ++d) row[d] += dz * x[d];
      g.bias[c] += dz;
    }
    g.loss += bce_loss(probs, bag.labels);
  }
  g.loss /= static_cast<double>(bags.size());
  return g;
}

TrainResult train(std::span<const MimlBag> bags, ConceptVocabulary vocabulary, const TrainConfig& cfg) {
  cfg.validate();
  if (bags.empty()) throw ValidationError("train: no examples");
  const std::size_t dim = bags.front().instances.empty() ? 0 : bags.front().instances.front().size();

  TrainResult result;
  result.model = LinearConceptModel::zeros(std::move(vocabulary), dim);
  LinearConceptModel& model = result.model;
  check_bags(model, bags);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 1.0);
  for (double& w : model.weights) w = cfg.weight_init_scale * init(rng);

  std::vector<std::size_t> order(bags.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<MimlBag> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(bags[order[i]]);
      const Gradient g = miml_gradient(model, batch);
      for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights[i] -= cfg.learning_rate * g.weights[i];
      for (std::size_t c = 0; c < model.bias.size(); ++c) model.bias[c] -= cfg.learning_rate * g.bias[c];
    }
    const double loss = miml_loss(model, bags);
    if (!std::isfinite(loss)) throw NumericError("training diverged at epoch " + std::to_string(epoch));
    result.epoch_loss.push_back(loss);
  }
  return result;
}

TrainResult train(std::span<const MimlExample> examples, ConceptVocabulary vocabulary, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<MimlBag> bags;
  bags.reserve(examples.size());
  for (const auto& ex : examples) bags.push_back(make_bag(ex, cfg.k_segments));
  return train(std::span<const MimlBag>(bags), std::move(vocabulary), cfg);
}

double label_accuracy(const LinearConceptModel& model, std::span<const MimlBag> bags) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& bag : bags) {
    const auto p = predict_bag(model, bag);
    for (std::size_t c = 0; c < p.size(); ++c) {
      correct += (p[c] >= 0.5) == (bag.labels[c] != 0);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<std::vector<std::uint8_t>> assign_segment_labels(std::span<const TimeInterval> proposals,
                                                             std::span<const std::vector<std::uint8_t>> labels,
                                                             const VideoMeta& meta, std::size_t num_concepts) {
  if (proposals.size() != labels.size()) throw ValidationError("assign_segment_labels: size mismatch");
  std::vector<std::vector<std::uint8_t>> out(meta.segment_count(), std::vector<std::uint8_t>(num_concepts, 0));
  for (std::size_t p = 0; p < proposals.size(); ++p) {
    if (labels[p].size() != num_concepts) throw ValidationError("assign_segment_labels: label length != C");
    const IndexRange r = segment_range(proposals[p], meta);
    for (std::size_t s = r.begin; s < r.end; ++s) {
      for (std::size_t c = 0; c < num_concepts; ++c) out[s][c] |= labels[p][c] ? 1 : 0;
    }
  }
  return out;
}

void save_model(const LinearConceptModel& model, const std::filesystem::path& path) {
  model.validate();
  std::string out(kModelMagic, sizeof(kModelMagic));
  detail::put_u32(out, kModelVersion);
  detail::put_u64(out, model.num_concepts());
  detail::put_u64(out, model.dim);
  for (const auto& name : model.vocabulary.concepts()) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
  }
  for (double w : model.weights) detail::put_f64(out, w);
  for (double b : model.bias) detail::put_f64(out, b);
  detail::write_file(path, out);
}

LinearConceptModel load_model(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) return load_model_json(path);

  detail::ByteReader in(bytes, path.string());
  in.str(4);
  if (in.u32() != kModelVersion) throw FormatError(path.string() + ": unsupported model version");
  const std::uint64_t C = in.u64();
  const std::uint64_t D = in.u64();
  if (C == 0 || C > bytes.size() || (D != 0 && C * D > bytes.size() / 8)) {
    throw FormatError(path.string() + ": implausible model header");
  }
  std::vector<std::string> names;
  for (std::uint64_t c = 0; c < C; ++c) names.push_back(in.str(in.u32()));

  LinearConceptModel model;
  try {
    model = LinearConceptModel::zeros(ConceptVocabulary(std::move(names)), D);
  } catch (const ValidationError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  for (double& w : model.weights) w = in.f64();
  for (double& b : model.bias) b = in.f64();
  if (!in.at_end()) throw FormatError(path.string() + ": trailing bytes in model file");
  return model;
}

void save_model_json(const LinearConceptModel& model, const std::filesystem::path& path) {
  model.validate();
  Json w = Json::array();
  for (std::size_t c = 0; c < model.num_concepts(); ++c) {
    w.push_back(std::vector<double>(model.weights.begin() + c * model.dim, model.weights.begin() + (c + 1) * model.dim));
  }
  write_json(path, {{"C", model.num_concepts()},
                    {"D", model.dim},
                    {"vocabulary", model.vocabulary.concepts()},
                    {"W", std::move(w)},
                    {"b", model.bias}});
}

LinearConceptModel load_model_json(const std::filesystem::path& path) {
  const Json doc = read_json(path);
  try {
    const auto C = doc.at("C").get<std::size_t>();
    const auto D = doc.at("D").get<std::size_t>();
    auto names = doc.at("vocabulary").get<std::vector<std::string>>();
    if (names.size() != C) throw FormatError(path.string() + ": vocabulary size != C");
    LinearConceptModel model = LinearConceptModel::zeros(ConceptVocabulary(std::move(names)), D);
    const Json& w = doc.at("W");
    if (!w.is_array() || w.size() != C) throw FormatError(path.string() + ": W must have C rows");
    for (std::size_t c = 0; c < C; ++c) {
      const auto row = w[c].get<std::vector<double>>();
      if (row.size() != D) throw FormatError(path.string() + ": W row has wrong dimension");
      std::copy(row.begin(), row.end(), model.weights.begin() + c * D);
    }
    model.bias = doc.at("b").get<std::vector<double>>();
    model.validate();
    return model;
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace dvc
