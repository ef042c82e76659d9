#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace tcflow {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr const char* kVersion = "tcflow 0.1.0";

/// Invalid parameters, malformed config documents, bad sweep layouts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not conform to the grid.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (t < 0, k = 0 where |k| >= 1 is required).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration produced a non-finite state.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Worker count used by parallel sweeps. 0 selects the hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index writes only its own output slot, so results
/// do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tcflow
