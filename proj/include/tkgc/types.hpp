#pragma once

#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace tkgc {

using EntityId = std::int32_t;
using RelationId = std::int32_t;
using TimeIndex = std::int32_t;

struct Quadruple {
  EntityId s = 0;
  RelationId r = 0;
  EntityId o = 0;
  TimeIndex t = 0;

  friend auto operator<=>(const Quadruple&, const Quadruple&) = default;
};

using QuadrupleList = std::vector<Quadruple>;

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace tkgc
