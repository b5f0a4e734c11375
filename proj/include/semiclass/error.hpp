#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semiclass {

/// Argument outside the mathematical domain of an operation (q < 2, h <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A geometric or parametric constraint between arguments is violated
/// (empty dyadic strip range, empty annulus, ...).
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fields, regions or operators living on different grids were combined.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative numerical procedure did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double achieved)
      : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                           ", achieved=" + std::to_string(achieved) + ")"),
        iterations_(iterations),
        achieved_(achieved) {}

  int iterations() const noexcept { return iterations_; }
  double achieved() const noexcept { return achieved_; }

 private:
  int iterations_;
  double achieved_;
};

/// Collects non-fatal warnings (resolution, empty regions, Weyl ratios, ...).
/// Operations take an optional pointer; passing nullptr drops the messages.
struct Diagnostics {
  std::vector<std::string> warnings;
  std::vector<std::string> notes;

  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
  void note(std::string msg) { notes.push_back(std::move(msg)); }

  bool has_warning(const std::string& needle) const {
    for (const auto& w : warnings)
      if (w.find(needle) != std::string::npos) return true;
    return false;
  }
};

inline void warn(Diagnostics* diag, std::string msg) {
  if (diag) diag->warn(std::move(msg));
}

inline void note(Diagnostics* diag, std::string msg) {
  if (diag) diag->note(std::move(msg));
}

}  // namespace semiclass
