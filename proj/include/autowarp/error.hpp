#pragma once

#include <stdexcept>
#include <string>

namespace autowarp {

// Caller broke a documented precondition (bad argument, shape mismatch).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data is malformed or degenerate (bad file, zero denominators, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AUTOWARP_REQUIRE(cond, msg)                  \
  do {                                               \
    if (!(cond)) throw ::autowarp::ContractError(msg); \
  } while (0)

}  // namespace autowarp
