#pragma once

#include "qconv/channels.hpp"
#include "qconv/matqi.hpp"

namespace qconv::testutil {

// Random isometry din -> dout via QR of a Ginibre matrix.
inline Mat random_isometry(int dout, int din, Rng& rng) {
  Mat u = haar_unitary(dout, rng);
  return u.leftCols(din);
}

// Random channel with environment dimension denv (generic Choi rank denv).
inline Channel random_channel(int din, int dout, int denv, Rng& rng) {
  Mat v = random_isometry(dout * denv, din, rng);
  std::vector<Mat> ks;
  for (int e = 0; e < denv; ++e) {
    Mat k(dout, din);
    for (int b = 0; b < dout; ++b)
      for (int i = 0; i < din; ++i) k(b, i) = v(b * denv + e, i);
    ks.push_back(std::move(k));
  }
  return Channel(std::move(ks));
}

inline DensityOperator random_state(const Factors& fs, int rank, Rng& rng) {
  Mat m = haar_density(total_dim(fs), rank, rng);
  return DensityOperator(std::move(m), fs, true);
}

inline PureState random_pure(const Factors& fs, Rng& rng) {
  return PureState(haar_state(total_dim(fs), rng), fs);
}

inline Eigen::VectorXd sorted_eigs(const Mat& herm) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(herm), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace qconv::testutil
