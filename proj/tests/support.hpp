#pragma once

#include "graspda/signal.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

namespace graspda::test {

inline Matrix sine(int channels, Eigen::Index n, double freq_hz, double rate_hz, double amplitude = 1.0) {
  Matrix m(channels, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    m.col(t).setConstant(amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(t) / rate_hz));
  }
  return m;
}

// Peak absolute value over the middle half of row 0, away from edge effects.
inline double steady_peak(const Matrix& m) {
  const Eigen::Index n = m.cols();
  return m.row(0).segment(n / 4, n / 2).cwiseAbs().maxCoeff();
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("graspda_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace graspda::test
