#pragma once

#include <stdexcept>
#include <string>

namespace igam {

// Caller supplied something outside an operation's contract.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Inputs were valid but the computation could not produce a finite result.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace igam
