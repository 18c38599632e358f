#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "mrcp/numerics.hpp"

namespace testing {

inline mrcp::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  mrcp::Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = g(rng);
  return m;
}

inline mrcp::Matrix random_spd(Eigen::Index n, std::uint64_t seed) {
  const mrcp::Matrix A = random_matrix(n, 2 * n, seed);
  return A * A.transpose() / static_cast<double>(2 * n) + 0.1 * mrcp::Matrix::Identity(n, n);
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mrcp-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
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

/// Plain Pearson correlation of two flattened matrices, written out longhand.
inline double pearson(const mrcp::Matrix& A, const mrcp::Matrix& B) {
  const auto n = static_cast<double>(A.size());
  double ma = 0, mb = 0;
  for (Eigen::Index i = 0; i < A.size(); ++i) {
    ma += A.data()[i];
    mb += B.data()[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (Eigen::Index i = 0; i < A.size(); ++i) {
    const double a = A.data()[i] - ma, b = B.data()[i] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace testing
