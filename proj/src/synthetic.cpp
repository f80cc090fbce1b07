#include "dvc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "dvc/caption_metrics.hpp"
#include "dvc/error.hpp"

namespace dvc {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSubjects = {"man", "woman", "boy", "girl", "dog", "player", "chef", "dancer"};
const std::vector<std::string> kVerbs = {"runs", "jumps", "plays", "throws", "cuts", "rides", "paints", "climbs"};
const std::vector<std::string> kObjects = {"ball", "guitar", "bike", "cake", "fence", "rope", "drum", "board"};
const std::vector<std::string> kSettings = {"in the park", "on the stage", "near the river", "in the kitchen",
                                            "with friends", "in the yard"};
const std::map<std::string, std::string> kSynonyms = {
    {"man", "guy"},      {"woman", "lady"},    {"boy", "kid"},       {"runs", "sprints"},
    {"jumps", "leaps"},  {"plays", "performs"}, {"throws", "tosses"}, {"bike", "bicycle"},
    {"park", "garden"},  {"river", "stream"},   {"stage", "platform"}, {"friends", "companions"},
    {"board", "plank"},  {"climbs", "scales"}};

// Round to centiseconds so files stay readable; keeps strict ordering for
// the interval lengths produced here (>= 0.9 s).
double round_cs(double t) { return std::round(t * 100.0) / 100.0; }

std::string make_sentence(std::mt19937_64& rng) {
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  return "a " + pick(kSubjects) + " " + pick(kVerbs) + " the " + pick(kObjects) + " " + pick(kSettings);
}

std::string paraphrase(const std::string& sentence, std::mt19937_64& rng) {
  std::istringstream in(sentence);
  std::string word, out;
  std::bernoulli_distribution flip(0.5);
  while (in >> word) {
    auto it = kSynonyms.find(word);
    if (it != kSynonyms.end() && flip(rng)) word = it->second;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::vector<float> word_signature(const std::string& word, std::size_t dim, std::uint64_t seed) {
  std::seed_seq seq(word.begin(), word.end());
  std::vector<std::uint64_t> mixed(1);
  seq.generate(mixed.begin(), mixed.end());
  std::mt19937_64 rng(mixed[0] ^ seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (videos < 1) throw ValidationError("videos must be ≥ 1");
  if (min_events < 1 || max_events < min_events) throw ValidationError("event range must satisfy 1 ≤ min ≤ max");
  if (!(min_duration_s > 0.0) || max_duration_s < min_duration_s) throw ValidationError("bad duration range");
  if (!(fps > 0.0) || frames_per_segment < 1) throw ValidationError("bad fps / frames per segment");
}

SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t spread = cfg.max_events - cfg.min_events;
  const double p_extra =
      spread == 0 ? 0.0 : std::clamp((cfg.mean_events - static_cast<double>(cfg.min_events)) / spread, 0.0, 1.0);
  std::binomial_distribution<std::size_t> extra_events(spread, p_extra);

  SyntheticCorpus out;
  std::set<std::string> lexicon(kSubjects.begin(), kSubjects.end());
  lexicon.insert(kVerbs.begin(), kVerbs.end());
  lexicon.insert(kObjects.begin(), kObjects.end());
  out.lexicon.assign(lexicon.begin(), lexicon.end());

  const int width = static_cast<int>(std::to_string(cfg.videos).size());
  for (std::size_t v = 0; v < cfg.videos; ++v) {
    std::ostringstream id;
    id << "v_syn" << std::setw(width) << std::setfill('0') << v;

    VideoRecord rec;
    rec.meta.video_id = id.str();
    rec.meta.duration_s = round_cs(cfg.min_duration_s + unit(rng) * (cfg.max_duration_s - cfg.min_duration_s));
    rec.meta.fps = cfg.fps;
    rec.meta.frames_per_segment = cfg.frames_per_segment;
    const double duration = rec.meta.duration_s;

    // One event per equal slot, so events never overlap.
    const std::size_t n = cfg.min_events + extra_events(rng);
    const double slot = duration / static_cast<double>(n);
    AnnotationSet first;
    for (std::size_t e = 0; e < n; ++e) {
      const double len = slot * (0.5 + 0.45 * unit(rng));
      const double start = static_cast<double>(e) * slot + unit(rng) * (slot - len);
      first.intervals.push_back({round_cs(start), std::min(duration, round_cs(start + len))});
      first.sentences.push_back(make_sentence(rng));
    }

    if (cfg.second_set) {
      AnnotationSet second;
      for (std::size_t e = 0; e < n; ++e) {
        const TimeInterval& iv = first.intervals[e];
        const double jitter = 0.1 * iv.length();
        double s = iv.start_s + (2.0 * unit(rng) - 1.0) * jitter;
        double t = iv.end_s + (2.0 * unit(rng) - 1.0) * jitter;
        s = round_cs(std::clamp(s, 0.0, duration));
        t = round_cs(std::clamp(t, 0.0, duration));
        second.intervals.push_back({s, t});
        second.sentences.push_back(paraphrase(first.sentences[e], rng));
      }
      rec.annotations = {first, second};
    } else {
      rec.annotations = {first};
    }

    if (cfg.feature_dim > 0) {
      FeatureRecord feat;
      feat.video_id = rec.meta.video_id;
      feat.feature_tag = "synthetic";
      feat.table = FeatureTable(rec.meta.segment_count(), cfg.feature_dim);
      std::normal_distribution<float> noise(0.0f, 0.3f);
      for (auto& x : feat.table.values) x = noise(rng);
      for (std::size_t e = 0; e < n; ++e) {
        const IndexRange r = segment_range(first.intervals[e], rec.meta);
        for (const auto& tok : tokenize(first.sentences[e])) {
          if (!lexicon.count(tok)) continue;
          const auto sig = word_signature(tok, cfg.feature_dim, cfg.seed);
          for (std::size_t s = r.begin; s < r.end; ++s) {
            auto row = feat.table.row(s);
            for (std::size_t d = 0; d < cfg.feature_dim; ++d) row[d] += sig[d];
          }
        }
      }
      out.features.emplace(feat.video_id, std::move(feat));
    }
    out.corpus.videos.emplace(rec.meta.video_id, std::move(rec));
  }
  return out;
}

void write_synthetic(const SyntheticCorpus& synthetic, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  save_ground_truth(synthetic.corpus, 0, dir / "gt_1.json");
  const bool has_second = std::any_of(synthetic.corpus.videos.begin(), synthetic.corpus.videos.end(),
                                      [](const auto& kv) { return kv.second.annotations.size() > 1; });
  if (has_second) save_ground_truth(synthetic.corpus, 1, dir / "gt_2.json");

  std::map<std::string, VideoMeta> metas;
  for (const auto& [vid, rec] : synthetic.corpus.videos) metas.emplace(vid, rec.meta);
  save_metadata(metas, dir / "meta.json");

  std::string lex;
  for (const auto& w : synthetic.lexicon) lex += w + "\n";
  detail::write_file(dir / "lexicon.txt", lex);

  if (!synthetic.features.empty()) {
    fs::create_directories(dir / "features", ec);
    if (ec) throw IoError("cannot create " + (dir / "features").string() + ": " + ec.message());
    for (const auto& [vid, rec] : synthetic.features) save_features(rec, dir / "features" / (vid + ".bin"));
  }
}

std::vector<std::string> load_lexicon(const fs::path& path) {
  std::istringstream in(detail::read_file(path));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(b, e - b + 1));
  }
  return words;
}

}  // namespace dvc
