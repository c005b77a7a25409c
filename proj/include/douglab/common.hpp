#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace douglab {

// Error types named after the failure they signal. All carry a message with
// the offending values so callers can dump counterexamples.
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotSymmetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotPd : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotHurwitzAfterShift : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Diverged : std::runtime_error {
  long long first_bad_index;
  Diverged(const std::string& msg, long long k)
      : std::runtime_error(msg), first_bad_index(k) {}
};
struct TooManyDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EpsOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidRho : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySample : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace douglab
