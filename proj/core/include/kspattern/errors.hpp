#pragma once

#include <stdexcept>
#include <string>

namespace kspattern {

/// Base class for every failure raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different grids, or a vector has the wrong length.
class dimension_error : public error {
 public:
  using error::error;
};

/// A caller-supplied argument violates a documented precondition.
class invalid_argument : public error {
 public:
  using error::error;
};

/// A time integrator produced a non-finite state.
class integration_fault : public error {
 public:
  using error::error;
};

/// The explicit scheme blew up (|value| above the blow-up threshold).
class instability_fault : public error {
 public:
  instability_fault(const std::string& what, double time)
      : error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Clamped negative mass exceeded the configured positivity budget.
class positivity_fault : public error {
 public:
  positivity_fault(const std::string& what, double time, double clipped)
      : error(what), time_(time), clipped_(clipped) {}
  double time() const noexcept { return time_; }
  double clipped_mass() const noexcept { return clipped_; }

 private:
  double time_;
  double clipped_;
};

/// Density data fell below the floor that keeps the inversion elliptic.
class ellipticity_fault : public error {
 public:
  using error::error;
};

/// A Krylov or triangular solve hit a singular system.
class singular_operator_fault : public error {
 public:
  using error::error;
};

/// NaN or Inf appeared inside a numerical kernel.
class numerical_fault : public error {
 public:
  using error::error;
};

/// A raster could not be read or carries no usable contrast.
class ingestion_fault : public error {
 public:
  using error::error;
};

/// Evaluation too close to the pole of the stationary map.
class pole_fault : public error {
 public:
  using error::error;
};

}  // namespace kspattern
