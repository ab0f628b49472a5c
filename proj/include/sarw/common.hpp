#ifndef SARW_COMMON_HPP_
#define SARW_COMMON_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sarw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

//! Error raised by any pipeline stage. `module()` names the stage that failed.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

//! Non-fatal diagnostics collected by a stage (ridge fallback, degenerate spectra, ...).
using Warnings = std::vector<std::string>;

inline void require(bool cond, const char* module, const std::string& what) {
  if (!cond) throw Error(module, what);
}

inline void require_same_rows(const Matrix& a, const Vector& b, const char* module) {
  if (a.rows() != b.size()) {
    throw Error(module, "dimension mismatch: " + std::to_string(a.rows()) + " rows vs vector of length " +
                            std::to_string(b.size()));
  }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace sarw

#endif  // SARW_COMMON_HPP_
