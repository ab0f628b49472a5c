#ifndef SARW_TESTS_HELPERS_HPP_
#define SARW_TESTS_HELPERS_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sarw/common.hpp"

namespace testing_util {

using sarw::Index;
using sarw::Matrix;
using sarw::Vector;

inline Matrix randn(Index r, Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) m(i, j) = g(rng);
  }
  return m;
}

inline Vector randn_vec(Index n, std::mt19937_64& rng, double sd = 1.0) { return randn(n, 1, rng, sd).col(0); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

//! Fresh empty directory under the system temp dir.
inline std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("sarw_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

inline std::string write_file(const std::string& dir, const std::string& name, const std::string& body) {
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream(path) << body;
  return path;
}

inline std::string boston_path() { return std::string(SARW_DATA_DIR) + "/boston.csv"; }

}  // namespace testing_util

#endif  // SARW_TESTS_HELPERS_HPP_
