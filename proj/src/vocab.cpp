#include "covgen/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace covgen {

const std::vector<std::string>& Vocabulary::reserved_words() {
  static const std::vector<std::string> kWords = {"[PAD]", "[UNK]", "[START]", "[STOP]"};
  return kWords;
}

int Vocabulary::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& word) const { return ids_.count(word) > 0; }

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocabulary id out of range");
  return words_[id];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
  for (int i = kReserved; i < size(); ++i) {
    out << words_[i] << " " << counts_[i] << "\n";
  }
}

Vocabulary Vocabulary::load(const std::string& path, size_t cap) {
  if (cap < static_cast<size_t>(kReserved) + 1) {
    throw std::invalid_argument("vocabulary cap must be at least 5");
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  Vocabulary v;
  for (const auto& w : reserved_words()) {
    v.ids_[w] = static_cast<int>(v.words_.size());
    v.words_.push_back(w);
    v.counts_.push_back(0);
  }
  std::string line;
  while (v.words_.size() < cap && std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    long long count = 0;
    if (!(ls >> word >> count)) throw std::runtime_error("malformed vocabulary line: " + line);
    if (v.ids_.count(word)) throw std::runtime_error("duplicate vocabulary word: " + word);
    v.ids_[word] = static_cast<int>(v.words_.size());
    v.words_.push_back(word);
    v.counts_.push_back(count);
  }
  return v;
}

void VocabBuilder::add(const std::string& token) {
  for (const auto& r : Vocabulary::reserved_words()) {
    if (token == r) throw std::invalid_argument("reserved token in corpus: " + token);
  }
  auto [it, inserted] = counts_.try_emplace(token);
  if (inserted) it->second.first_seen = next_index_++;
  it->second.count += 1;
}

void VocabBuilder::add_all(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) add(t);
}

Vocabulary VocabBuilder::build(size_t cap) const {
  if (cap < static_cast<size_t>(Vocabulary::kReserved) + 1) {
    throw std::invalid_argument("vocabulary cap must be at least 5");
  }
  struct Ranked {
    const std::string* word;
    long long count;
    size_t first_seen;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(counts_.size());
  for (const auto& [word, entry] : counts_) {
    ranked.push_back({&word, entry.count, entry.first_seen});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.first_seen < b.first_seen;
  });
  const size_t keep = std::min(ranked.size(), cap - Vocabulary::kReserved);

  Vocabulary v;
  for (const auto& w : Vocabulary::reserved_words()) {
    v.ids_[w] = static_cast<int>(v.words_.size());
    v.words_.push_back(w);
    v.counts_.push_back(0);
  }
  for (size_t i = 0; i < keep; ++i) {
    v.ids_[*ranked[i].word] = static_cast<int>(v.words_.size());
    v.words_.push_back(*ranked[i].word);
    v.counts_.push_back(ranked[i].count);
  }
  return v;
}

}  // namespace covgen
