#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfs {

//! Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

//! Grazing view: the Oren-Nayar Case-1 denominator cos(theta_r) vanished.
class DegenerateView : public Error {
 public:
  using Error::Error;
};

//! A brightness value exceeds the maximum the reflectance model can produce.
class BrightnessOutOfRange : public Error {
 public:
  using Error::Error;
};

//! Kruzkov value outside [0, 1/mu).
class DomainError : public Error {
 public:
  using Error::Error;
};

//! The operator coefficient P(x_i, z) went negative at a node.
class NonpositiveP : public Error {
 public:
  NonpositiveP(std::size_t node, double value)
      : Error("coefficient P is negative (" + std::to_string(value) +
              ") at node " + std::to_string(node)),
        node_(node),
        value_(value) {}

  std::size_t node() const noexcept { return node_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t node_;
  double value_;
};

class DegenerateQ : public Error {
 public:
  DegenerateQ(std::size_t node, double value)
      : Error("Phong denominator Q vanished (" + std::to_string(value) +
              ") at node " + std::to_string(node)),
        node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

//! Model/light/viewer combination for which no fixed-point form is available.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

class EmptyMask : public Error {
 public:
  EmptyMask() : Error("mask has no inside nodes") {}
};

class MalformedHeader : public Error {
 public:
  using Error::Error;
};

class UnsupportedDepth : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfs
