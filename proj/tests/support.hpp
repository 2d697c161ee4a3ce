#pragma once

// Small generators for property tests: every case is a pure function of its index.

#include "daisy/channel.hpp"
#include "daisy/random.hpp"

#include <cstdint>

namespace daisy::gen {

struct dims {
  int m;
  int k;
};

inline int uniform_int(counter_rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double uniform_real(counter_rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// Random (M, K) with 1 <= K <= max_k and K <= M <= max_m.
inline dims random_dims(counter_rng& rng, int max_m, int max_k) {
  const int k = uniform_int(rng, 1, max_k);
  const int m = uniform_int(rng, k, max_m);
  return {m, k};
}

inline counter_rng case_rng(std::uint64_t suite, int index) {
  return counter_rng(suite).split(static_cast<std::uint64_t>(index));
}

inline cmatrix random_matrix(int rows, int cols, std::uint64_t seed) {
  cmatrix out(rows, cols);
  counter_rng rng(seed);
  fill_complex_normal(out, 1.0, rng);
  return out;
}

}  // namespace daisy::gen
