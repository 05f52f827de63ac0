#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed term structure (wrong arity, variable where a ground term is required).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Input that is well-formed syntactically but violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A bounded computation exceeded its configured cap.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t reached)
      : Error(what), reached_(reached) {}
  std::size_t reached() const { return reached_; }

 private:
  std::size_t reached_;
};

struct ParseIssue {
  int line = 0;
  int column = 0;
  std::string message;
};

class ParseError : public Error {
 public:
  explicit ParseError(std::vector<ParseIssue> issues);
  const std::vector<ParseIssue>& issues() const { return issues_; }

 private:
  std::vector<ParseIssue> issues_;
};

}  // namespace kflow
