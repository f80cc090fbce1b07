#pragma once

// Brute-force reference implementations used as test oracles. Nothing here
// calls into the library's algorithms; only its plain data types are shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dvc/types.hpp"

namespace oracle {

using dvc::TimeInterval;
using Sentence = std::vector<std::string>;
using Ngram = std::vector<std::string>;

inline double tiou(const TimeInterval& a, const TimeInterval& b) {
  const double lo = std::max(a.start_s, b.start_s);
  const double hi = std::min(a.end_s, b.end_s);
  if (hi <= lo) return 0.0;
  return (hi - lo) / (std::max(a.end_s, b.end_s) - std::min(a.start_s, b.start_s));
}

struct Counts {
  std::size_t precise = 0;  // predictions reaching t
  std::size_t recalled = 0;  // groundtruth reaching t
  friend bool operator==(const Counts&, const Counts&) = default;
};

inline std::vector<Counts> video_counts(const std::vector<TimeInterval>& preds, const std::vector<TimeInterval>& gts,
                                        const std::vector<double>& thresholds) {
  std::vector<Counts> out(thresholds.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (const auto& p : preds) {
      bool hit = false;
      for (const auto& g : gts) hit = hit || oracle::tiou(p, g) >= thresholds[t];
      out[t].precise += hit;
    }
    for (const auto& g : gts) {
      bool hit = false;
      for (const auto& p : preds) hit = hit || oracle::tiou(p, g) >= thresholds[t];
      out[t].recalled += hit;
    }
  }
  return out;
}

// ---- fused selection replay ------------------------------------------------

using SequentialFn = std::function<std::vector<double>(const std::vector<std::size_t>& prefix,
                                                       const std::vector<std::size_t>& remaining)>;

struct Simulation {
  std::vector<std::size_t> output;
  std::vector<std::size_t> prefix;
};

// Step-by-step replay: stop when EOS beats every remaining candidate, else
// take the fused argmax into the prefix and the K best fused scores into the
// output. Equal fused scores resolve to the lower pool index.
inline Simulation algorithm1(const std::vector<double>& fs, const SequentialFn& fe, std::size_t k,
                             std::size_t max_steps) {
  Simulation sim;
  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < fs.size(); ++i) remaining.push_back(i);
  for (std::size_t step = 0; step < max_steps && !remaining.empty(); ++step) {
    const std::vector<double> dist = fe(sim.prefix, remaining);
    const double eos = dist.back();
    bool candidate_reaches_eos = false;
    for (std::size_t r = 0; r < remaining.size(); ++r) candidate_reaches_eos = candidate_reaches_eos || dist[r] >= eos;
    if (!candidate_reaches_eos) break;

    std::vector<double> s(remaining.size());
    for (std::size_t r = 0; r < remaining.size(); ++r) s[r] = fs[remaining[r]] * dist[r];
    std::vector<bool> taken(remaining.size(), false);
    std::size_t best = remaining.size();
    for (std::size_t pick = 0; pick < std::min(k, remaining.size()); ++pick) {
      std::size_t arg = remaining.size();
      for (std::size_t r = 0; r < remaining.size(); ++r) {
        if (taken[r]) continue;
        if (arg == remaining.size() || s[r] > s[arg]) arg = r;
      }
      taken[arg] = true;
      if (pick == 0) best = arg;
      const std::size_t idx = remaining[arg];
      if (std::find(sim.output.begin(), sim.output.end(), idx) == sim.output.end()) sim.output.push_back(idx);
    }
    sim.prefix.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return sim;
}

// ---- n-gram metrics -----------------------------------------------------------

inline std::vector<Ngram> ngrams(const Sentence& s, std::size_t n) {
  std::vector<Ngram> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) out.emplace_back(s.begin() + i, s.begin() + i + n);
  return out;
}

inline std::size_t occurrences(const Sentence& s, const Ngram& g) {
  std::size_t c = 0;
  for (const auto& h : ngrams(s, g.size())) c += h == g;
  return c;
}

inline double bleu4(const Sentence& cand, const std::vector<Sentence>& refs, bool smooth) {
  if (cand.empty()) return 0.0;
  double product = 1.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::set<Ngram> distinct;
    for (const auto& g : ngrams(cand, n)) distinct.insert(g);
    double matched = 0.0;
    for (const auto& g : distinct) {
      std::size_t max_ref = 0;
      for (const auto& r : refs) max_ref = std::max(max_ref, occurrences(r, g));
      matched += static_cast<double>(std::min(occurrences(cand, g), max_ref));
    }
    double total = cand.size() >= n ? static_cast<double>(cand.size() - n + 1) : 0.0;
    if (smooth && n >= 2) {
      matched += 1.0;
      total += 1.0;
    }
    if (matched == 0.0 || total == 0.0) return 0.0;
    product *= matched / total;
  }
  std::size_t r = refs.front().size();
  for (const auto& ref : refs) {
    const auto d = [&](std::size_t len) { return len > cand.size() ? len - cand.size() : cand.size() - len; };
    if (d(ref.size()) < d(r) || (d(ref.size()) == d(r) && ref.size() < r)) r = ref.size();
  }
  const double c = static_cast<double>(cand.size());
  const double bp = c > static_cast<double>(r) ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c);
  return bp * std::pow(product, 0.25);
}

// documents: one reference set per event, used for document frequencies.
inline double cider_d(const Sentence& cand, const std::vector<Sentence>& refs,
                      const std::vector<std::vector<Sentence>>& documents) {
  const double log_n = std::log(static_cast<double>(documents.size()));
  auto df = [&](const Ngram& g) {
    double count = 0.0;
    for (const auto& doc : documents) {
      bool present = false;
      for (const auto& r : doc) present = present || occurrences(r, g) > 0;
      count += present;
    }
    return std::log(std::max(1.0, count));
  };
  auto vec = [&](const Sentence& s, std::size_t n) {
    std::map<Ngram, double> v;
    for (const auto& g : ngrams(s, n)) v[g] += 1.0;
    for (auto& [g, w] : v) w *= log_n - df(g);
    return v;
  };
  auto norm = [](const std::map<Ngram, double>& v) {
    double s = 0.0;
    for (const auto& [_, w] : v) s += w * w;
    return std::sqrt(s);
  };
  const double cand_len = static_cast<double>(ngrams(cand, 2).size());
  double sum = 0.0;
  for (const auto& ref : refs) {
    const double delta = cand_len - static_cast<double>(ngrams(ref, 2).size());
    const double gauss = std::exp(-delta * delta / 72.0);
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto vc = vec(cand, n);
      const auto vr = vec(ref, n);
      double dot = 0.0;
      for (const auto& [g, w] : vc) {
        if (vr.count(g)) dot += std::min(w, vr.at(g)) * vr.at(g);
      }
      const double nc = norm(vc);
      const double nr = norm(vr);
      if (nc != 0.0 && nr != 0.0) dot /= nc * nr;
      sum += dot * gauss;
    }
  }
  return 10.0 * sum / 4.0 / static_cast<double>(refs.size());
}

// Smoothed self-BLEU x100 of one video, or -1 when fewer than two captions.
inline double self_bleu(const std::vector<Sentence>& caps) {
  if (caps.size() < 2) return -1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    std::vector<Sentence> rest;
    for (std::size_t j = 0; j < caps.size(); ++j) {
      if (j != i) rest.push_back(caps[j]);
    }
    sum += bleu4(caps[i], rest, true);
  }
  return 100.0 * sum / static_cast<double>(caps.size());
}

// Repeated-occurrence percentage of one video, or -1 without n-grams.
inline double repetition(const std::vector<Sentence>& caps, std::size_t n) {
  std::vector<Ngram> all;
  for (const auto& c : caps) {
    for (auto& g : ngrams(c, n)) all.push_back(std::move(g));
  }
  if (all.empty()) return -1.0;
  std::size_t repeated = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    // an occurrence is a repeat when the same n-gram appeared earlier
    for (std::size_t j = 0; j < i; ++j) {
      if (all[j] == all[i]) {
        ++repeated;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(repeated) / static_cast<double>(all.size());
}

// ---- MIML loss ----------------------------------------------------------------

// Mean over bags and concepts of the clamped cross entropy of max-pooled sigmoids.
inline double miml_loss(const std::vector<double>& w, const std::vector<double>& b, std::size_t dim,
                        const std::vector<std::vector<std::vector<double>>>& bags,
                        const std::vector<std::vector<std::uint8_t>>& labels) {
  const std::size_t C = b.size();
  double total = 0.0;
  for (std::size_t i = 0; i < bags.size(); ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      double best = 0.0;
      for (const auto& x : bags[i]) {
        double z = b[c];
        for (std::size_t d = 0; d < dim; ++d) z += w[c * dim + d] * x[d];
        z = std::clamp(z, -30.0, 30.0);
        best = std::max(best, 1.0 / (1.0 + std::exp(-z)));
      }
      const double p = std::clamp(best, 1e-7, 1.0 - 1e-7);
      total -= labels[i][c] ? std::log(p) : std::log(1.0 - p);
    }
  }
  return total / static_cast<double>(bags.size() * C);
}

// ---- random inputs -------------------------------------------------------------

inline TimeInterval random_interval(std::mt19937_64& rng, double duration) {
  std::uniform_real_distribution<double> u(0.0, duration);
  double a = u(rng);
  double b = u(rng);
  if (a > b) std::swap(a, b);
  if (b - a < 1e-3) b = std::min(duration, a + 1e-3 + 0.5);
  if (b - a < 1e-3) a = b - 0.5;
  return {a, b};
}

// Random interval on a coarse grid so that exact tIoU ties and threshold hits occur.
inline TimeInterval random_grid_interval(std::mt19937_64& rng, int cells, double cell) {
  std::uniform_int_distribution<int> u(0, cells);
  int a = u(rng);
  int b = u(rng);
  while (a == b) b = u(rng);
  if (a > b) std::swap(a, b);
  return {a * cell, b * cell};
}

inline Sentence random_sentence(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  Sentence s(len(rng));
  for (auto& t : s) t = std::string(1, static_cast<char>('a' + word(rng)));
  return s;
}

}  // namespace oracle
