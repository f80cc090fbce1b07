#pragma once

#include <random>
#include <string>
#include <vector>

#include "dvc/concept_miml.hpp"

namespace fixture {

// Linearly separable multi-instance set: concept c owns feature dimensions
// [c*span, (c+1)*span). A positive bag has a few instances carrying a +signal
// on those dimensions; every other value is small Gaussian noise.
inline std::vector<dvc::MimlBag> separable_bags(std::size_t bags, std::size_t concepts, std::size_t dim,
                                                std::uint64_t seed, double signal = 3.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> size(4, 20);
  const std::size_t span = dim / concepts;
  std::vector<dvc::MimlBag> out(bags);
  for (auto& bag : out) {
    bag.labels.resize(concepts);
    for (auto& l : bag.labels) l = coin(rng) ? 1 : 0;
    bag.instances.assign(size(rng), std::vector<double>(dim));
    for (auto& inst : bag.instances) {
      for (double& v : inst) v = noise(rng);
    }
    for (std::size_t c = 0; c < concepts; ++c) {
      if (!bag.labels[c]) continue;
      std::uniform_int_distribution<std::size_t> pick(0, bag.instances.size() - 1);
      const std::size_t carriers = 1 + rng() % 3;
      for (std::size_t k = 0; k < carriers; ++k) {
        auto& inst = bag.instances[pick(rng)];
        for (std::size_t d = c * span; d < (c + 1) * span; ++d) inst[d] += signal;
      }
    }
  }
  return out;
}

inline dvc::ConceptVocabulary vocabulary(std::size_t concepts) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < concepts; ++c) names.push_back("concept" + std::to_string(c));
  return dvc::ConceptVocabulary(names);
}

}  // namespace fixture
