#pragma once

#include <stdexcept>
#include <string>

namespace affcode {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMatrixError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Requested depth/level lies beyond the materialized part of a tree.
class DepthError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EmptyShiftError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration would exceed the configured word cap.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class SchemeError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace affcode
