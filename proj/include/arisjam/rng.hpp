#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>

namespace arisjam {

// splitmix64 step, used to derive independent named sub-streams from one seed
inline std::uint64_t mix_seed(std::uint64_t state) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d49b129c5838d6ULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x5851f42d4c957f2dULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(derive_seed(seed, stream));
}

// circularly symmetric complex gaussian with unit variance per entry
inline std::complex<double> complex_normal(std::mt19937_64& rng) {
  static constexpr double inv_sqrt2 = 0.70710678118654752440;
  std::normal_distribution<double> n(0.0, 1.0);
  double re = n(rng);
  double im = n(rng);
  return {re * inv_sqrt2, im * inv_sqrt2};
}

inline Eigen::VectorXcd complex_normal_vector(int n, std::mt19937_64& rng) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_normal(rng);
  return v;
}

inline Eigen::MatrixXcd complex_normal_matrix(int rows, int cols, std::mt19937_64& rng) {
  Eigen::MatrixXcd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = complex_normal(rng);
  return m;
}

// uniform draw from the complex ball { x : ||x|| <= radius }, flattened over
// `dim` complex entries (2*dim real dimensions)
inline Eigen::VectorXcd uniform_complex_ball(int dim, double radius, std::mt19937_64& rng) {
  Eigen::VectorXcd dir = complex_normal_vector(dim, rng);
  double nrm = dir.norm();
  if (nrm == 0.0) return Eigen::VectorXcd::Zero(dim);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = radius * std::pow(u(rng), 1.0 / (2.0 * dim));
  return dir * (r / nrm);
}

// uniform draw from the sphere { x : ||x|| = radius }
inline Eigen::VectorXcd uniform_complex_sphere(int dim, double radius, std::mt19937_64& rng) {
  Eigen::VectorXcd dir = complex_normal_vector(dim, rng);
  double nrm = dir.norm();
  if (nrm == 0.0) {
    dir = Eigen::VectorXcd::Ones(dim);
    nrm = dir.norm();
  }
  return dir * (radius / nrm);
}

}  // namespace arisjam
