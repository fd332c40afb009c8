#pragma once

#include <stdexcept>
#include <string>

namespace flowforge {

// Base class for all flowforge failures. Subclasses exist where callers or
// tests need to tell failure modes apart; everything carries a message with
// enough context to act on.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidRangeError : public Error {
 public:
  using Error::Error;
};

class InvalidParamsError : public Error {
 public:
  using Error::Error;
};

class DegeneratePolygonError : public Error {
 public:
  using Error::Error;
};

class FoldUnrecoverableError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

class EmptyPoolError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class NoOpsEnabledError : public Error {
 public:
  using Error::Error;
};

class SingularTransformError : public Error {
 public:
  using Error::Error;
};

class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

class AllCandidatesFailedError : public Error {
 public:
  using Error::Error;
};

class EvaluatorUnavailableError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public Error {
 public:
  using Error::Error;
};

class TruncatedFileError : public Error {
 public:
  using Error::Error;
};

class MissingFileError : public Error {
 public:
  using Error::Error;
};

class HashMismatchError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowforge
