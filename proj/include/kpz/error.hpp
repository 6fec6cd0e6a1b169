#pragma once

#include <stdexcept>
#include <string>

namespace kpz {

// Every failure raised by the library derives from Error so callers can
// catch the whole family at once; the concrete type names the condition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter is outside the domain of the formula or model.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonStochastic : public Error {
 public:
  using Error::Error;
};

class NonTerminating : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class SizeLimit : public Error {
 public:
  using Error::Error;
};

class TailTooLarge : public Error {
 public:
  using Error::Error;
};

class CutoffViolated : public Error {
 public:
  using Error::Error;
};

class InvalidShift : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class E = DomainError>
inline void require(bool ok, const std::string& what) {
  if (!ok) throw E(what);
}

}  // namespace detail
}  // namespace kpz
