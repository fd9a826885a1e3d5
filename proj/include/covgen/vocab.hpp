#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace covgen {

// Fixed word<->id maps with four reserved ids. Immutable after construction.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kStart = 2;
  static constexpr int kStop = 3;
  static constexpr int kReserved = 4;

  static const std::vector<std::string>& reserved_words();

  int id(const std::string& word) const;  // kUnk when absent
  bool contains(const std::string& word) const;
  const std::string& word(int id) const;
  int size() const { return static_cast<int>(words_.size()); }

  void save(const std::string& path) const;  // "word count" per line, rank order
  static Vocabulary load(const std::string& path, size_t cap);

 private:
  friend class VocabBuilder;
  std::vector<std::string> words_;
  std::vector<long long> counts_;
  std::unordered_map<std::string, int> ids_;
};

// Frequency counter feeding Vocabulary::build; keeps first-appearance order
// so frequency ties resolve deterministically in favor of the earlier word.
class VocabBuilder {
 public:
  void add(const std::string& token);
  void add_all(const std::vector<std::string>& tokens);

  // The cap-4 most frequent words plus the reserved ids. cap < 5 is an error.
  Vocabulary build(size_t cap) const;

 private:
  struct Entry {
    long long count = 0;
    size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts_;
  size_t next_index_ = 0;
};

}  // namespace covgen
