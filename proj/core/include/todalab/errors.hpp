#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace todalab {

// Bad argument or violated type invariant.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A mathematical hypothesis required by an operation does not hold.
class PreconditionFailure : public std::runtime_error {
 public:
  PreconditionFailure(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace todalab
