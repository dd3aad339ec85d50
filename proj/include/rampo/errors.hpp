#pragma once

#include <stdexcept>
#include <string>

namespace rampo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source location inside controller or STL text (1-based).
struct SourceLoc {
  int line = 1;
  int column = 1;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, SourceLoc loc)
      : Error(std::to_string(loc.line) + ":" + std::to_string(loc.column) +
              ": syntax error: " + what),
        loc_(loc) {}
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

class UnsupportedConstruct : public Error {
 public:
  UnsupportedConstruct(const std::string& what, SourceLoc loc)
      : Error(std::to_string(loc.line) + ":" + std::to_string(loc.column) +
              ": unsupported construct: " + what),
        loc_(loc) {}
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

class NoFeasiblePath : public Error { using Error::Error; };
class PathExplosion : public Error { using Error::Error; };
class OutOfDomain : public Error { using Error::Error; };
class NegativeInterval : public Error { using Error::Error; };
class UnknownChannel : public Error { using Error::Error; };
class NonFiniteState : public Error { using Error::Error; };
class AttackBoundViolated : public Error { using Error::Error; };
class UnknownPlant : public Error { using Error::Error; };
class ChannelMismatch : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

// Solver reached a state that a finite box rules out.
class InternalError : public Error { using Error::Error; };

}  // namespace rampo
