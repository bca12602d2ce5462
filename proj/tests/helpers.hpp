#pragma once

#include <cmath>
#include <random>

#include "mrlab/linalg.hpp"

namespace testutil {

using mrlab::CMatrix;
using mrlab::CVector;
using mrlab::Index;

inline CMatrix random_matrix(Index n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m(i, j) = scale * mrlab::cplx(nd(rng), nd(rng));
  }
  return m;
}

inline CVector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = mrlab::cplx(nd(rng), nd(rng));
  return v;
}

inline double rel(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline CMatrix scalar(double a) { return CMatrix::Constant(1, 1, a); }

}  // namespace testutil
