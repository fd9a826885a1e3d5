#pragma once

#include <vector>

#include "covgen/corpus.hpp"
#include "covgen/model.hpp"
#include "covgen/tensor.hpp"
#include "covgen/util.hpp"

namespace covtest {

inline covgen::Tensor rand_tensor(covgen::Rng& rng, covgen::Shape shape, double lo = -1.0,
                                  double hi = 1.0) {
  covgen::Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline bool bit_equal(const covgen::Tensor& a, const covgen::Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

// Single-example batch with an all-real mask, as sequence_loss expects.
inline covgen::Batch single_example_batch(const covgen::Example& ex) {
  covgen::Batch b;
  b.enc_ids = {ex.article_ids};
  b.enc_ext_ids = {ex.article_ext_ids};
  b.enc_mask = {std::vector<uint8_t>(ex.article_ids.size(), 1)};
  b.dec_input = {ex.dec_input_ids};
  b.target = {ex.target_ids};
  b.dec_mask = {std::vector<uint8_t>(ex.dec_input_ids.size(), 1)};
  b.max_oov = ex.article_oovs.size();
  b.example_indices = {0};
  return b;
}

}  // namespace covtest
