#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgefed {

/// Bad argument or malformed domain input (unknown id, invalid coordinates, ...).
class input_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Text input that could not be parsed. Carries the 1-based line number when known.
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Parsed input that violates a domain invariant (e.g. negative demand).
class validation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Missing or inconsistent experiment configuration (contracts, groups, flags).
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A latency term would divide by a zero capacity.
class singularity_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when a slot LP is infeasible and the caller asked to abort.
class infeasible_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class solver_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace edgefed
