#pragma once

#include <stdexcept>
#include <string>

namespace graspda {

// Base of every error the library raises. Subclasses name the failure class
// so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

// Input data whose statistics make the requested computation ill-posed
// (zero variance, singular covariance after shrinkage, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// nearest_label found nothing to choose from after exclusion.
class NoCandidate : public Error {
 public:
  using Error::Error;
};

class IncompleteLabels : public Error {
 public:
  using Error::Error;
};

class IncompleteTemplate : public Error {
 public:
  using Error::Error;
};

class MissingTemplate : public Error {
 public:
  using Error::Error;
};

class InvalidTrainingSet : public Error {
 public:
  using Error::Error;
};

// A training artifact (bank entry, augmented segment) was sourced from a test
// trial. Always fatal.
class IsolationViolation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace graspda
