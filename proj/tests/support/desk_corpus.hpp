#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "toklab/textio.hpp"

namespace toklab::testing {

// Synthetic English-like text: lemmas built from syllables, optionally
// wrapped in derivational affixes, drawn with Zipf-like frequencies.
class DeskLanguage {
 public:
  explicit DeskLanguage(std::uint64_t seed = 2024, std::size_t lemma_count = 20000) : rng_(seed) {
    static const std::vector<std::string> onsets{"b", "br", "c", "ch", "d", "f", "fl", "g",
                                                 "gr", "h", "j", "k", "l", "m", "n", "p",
                                                 "pl", "r", "s", "sh", "st", "t", "th", "tr",
                                                 "v", "w", "y", "z", ""};
    static const std::vector<std::string> nuclei{"a", "e", "i", "o", "u", "ea", "oo", "ai", "ou"};
    static const std::vector<std::string> codas{"", "", "n", "r", "t", "st", "ck", "m", "l",
                                                "nd", "x", "ng"};
    std::uniform_int_distribution<std::size_t> pick_onset(0, onsets.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_nucleus(0, nuclei.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_coda(0, codas.size() - 1);
    std::discrete_distribution<int> syllables{0, 40, 45, 15};
    std::set<std::string> seen;
    while (lemmas_.size() < lemma_count) {
      std::string lemma;
      const int count = syllables(rng_);
      for (int s = 0; s < count; ++s) {
        lemma += onsets[pick_onset(rng_)] + nuclei[pick_nucleus(rng_)] + codas[pick_coda(rng_)];
      }
      if (lemma.size() >= 2 && seen.insert(lemma).second) lemmas_.push_back(lemma);
    }
    std::vector<double> weights;
    for (std::size_t r = 0; r < lemmas_.size(); ++r) weights.push_back(1.0 / std::pow(r + 1.0, 1.05));
    zipf_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  }

  static const std::vector<std::string>& prefixes() {
    static const std::vector<std::string> p{"un", "re", "pre", "dis", "over", "mis"};
    return p;
  }
  static const std::vector<std::string>& suffixes() {
    static const std::vector<std::string> s{"er", "ness", "ing", "ed", "ly", "ful", "able",
                                            "ment", "less", "ish"};
    return s;
  }

  std::string word() {
    std::string w = lemmas_[zipf_(rng_)];
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) < 0.12) w = prefixes()[rng_() % prefixes().size()] + w;
    if (u(rng_) < 0.30) w += suffixes()[rng_() % suffixes().size()];
    return w;
  }

  std::string sentence() {
    std::uniform_int_distribution<int> len(5, 14);
    const int n = len(rng_);
    std::string s;
    for (int i = 0; i < n; ++i) {
      if (i) s += (rng_() % 17 == 0) ? ", " : " ";
      std::string w = word();
      if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
      s += w;
    }
    s += (rng_() % 9 == 0) ? "?" : ".";
    return s;
  }

  // A letter string built like a word but from shuffled syllable material.
  std::string nonword() {
    std::string a = lemmas_[rng_() % lemmas_.size()];
    std::string b = lemmas_[rng_() % lemmas_.size()];
    std::string w = a.substr(0, (a.size() + 1) / 2) + b.substr(b.size() / 2);
    return w.size() >= 2 ? w : w + "q";
  }

  const std::vector<std::string>& lemmas() const { return lemmas_; }

 private:
  std::mt19937_64 rng_;
  std::vector<std::string> lemmas_;
  std::discrete_distribution<std::size_t> zipf_;
};

inline Corpus desk_corpus(std::size_t sentences = 10000, std::uint64_t seed = 2024) {
  DeskLanguage lang(seed);
  Corpus c;
  c.source_id = "desk";
  c.language = "en";
  for (std::size_t i = 0; i < sentences; ++i) {
    std::string s = lang.sentence();
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    c.sentences.push_back(std::move(s));
  }
  return c;
}

// Probe words: corpus-like words mixed with unseen non-words.
inline std::vector<std::string> probe_words(std::size_t count, std::uint64_t seed = 77) {
  DeskLanguage lang(2024);
  std::mt19937_64 rng(seed);
  DeskLanguage noise(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(rng() % 4 == 0 ? noise.nonword() : lang.word());
  return out;
}

}  // namespace toklab::testing
