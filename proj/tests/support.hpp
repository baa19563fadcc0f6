#pragma once

#include "dlotrack/dlotrack.hpp"

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>

namespace testing_support {

using dlotrack::Points;
using dlotrack::Vec;

inline Points pts(std::initializer_list<std::initializer_list<double>> cols) {
  const auto dim = static_cast<Eigen::Index>(cols.begin()->size());
  Points p(dim, static_cast<Eigen::Index>(cols.size()));
  Eigen::Index c = 0;
  for (const auto& col : cols) {
    Eigen::Index r = 0;
    for (double v : col) p(r++, c) = v;
    ++c;
  }
  return p;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Points straight_chain(int m, double gap, int dim = 2) {
  Points p = Points::Zero(dim, m);
  for (int i = 0; i < m; ++i) p(0, i) = gap * i;
  return p;
}

inline Points random_chain(std::mt19937_64& rng, int m, int dim, double lo = 5.0, double hi = 30.0) {
  std::uniform_real_distribution<double> len(lo, hi);
  std::normal_distribution<double> g(0.0, 1.0);
  Points p(dim, m);
  p.col(0).setZero();
  for (int i = 1; i < m; ++i) {
    Vec d(dim);
    for (int k = 0; k < dim; ++k) d(k) = g(rng);
    p.col(i) = p.col(i - 1) + len(rng) * d.normalized();
  }
  return p;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("dlotrack_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
