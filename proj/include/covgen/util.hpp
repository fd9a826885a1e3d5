#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace covgen {

// Deterministic RNG wrapper. mt19937_64 is fully specified by the standard;
// the uniform/int mappings here are our own so that generated corpora,
// initializations and shuffles are reproducible across platforms and library
// versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  size_t uniform_int(size_t n) {
    return static_cast<size_t>((static_cast<__uint128_t>(eng_()) * n) >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

std::vector<std::string> split_whitespace(const std::string& s);
std::string join(const std::vector<std::string>& tokens, const std::string& sep = " ");

// Splits a flat token sequence into sentences; a "." token ends a sentence
// and stays attached to it. A trailing fragment without "." is its own
// sentence.
std::vector<std::vector<std::string>> split_sentences(const std::vector<std::string>& tokens);

// Number of worker threads: min(hardware, COVGEN_THREADS if set).
int worker_threads();

// Runs fn(i) for i in [0, n). Work is distributed over worker_threads();
// callers keep determinism by writing results into index-addressed slots.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace covgen
