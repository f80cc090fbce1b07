#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dvc/io.hpp"
#include "dvc/types.hpp"

namespace dvc {

struct SyntheticConfig {
  std::size_t videos = 50;
  std::size_t min_events = 1;
  std::size_t max_events = 7;
  double mean_events = 3.7;
  std::uint64_t seed = 7;
  double min_duration_s = 30.0;
  double max_duration_s = 300.0;
  bool second_set = true;
  std::size_t feature_dim = 16;  // 0 disables feature generation
  double fps = 25.0;
  std::size_t frames_per_segment = 64;

  void validate() const;
};

struct SyntheticCorpus {
  Corpus corpus;  // one or two annotation sets per video
  std::map<std::string, FeatureRecord> features;
  std::vector<std::string> lexicon;  // nouns and verbs of the template vocabulary
};

/// Random videos with non-overlapping planted events and template sentences.
/// The optional second set jitters every boundary by up to 10% of the event
/// length and paraphrases through a synonym table. Segment features carry a
/// per-word signature of the lexicon words of the covering event. Fully
/// determined by the seed.
SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg);

/// Writes gt_1.json, [gt_2.json,] meta.json, lexicon.txt and features/<id>.bin.
void write_synthetic(const SyntheticCorpus& synthetic, const std::filesystem::path& dir);

/// Lexicon words (one per line, blank lines and '#' comments ignored).
std::vector<std::string> load_lexicon(const std::filesystem::path& path);

}  // namespace dvc
