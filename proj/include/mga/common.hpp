#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mga {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;
inline constexpr long double kTwoPiL = 2.0L * std::numbers::pi_v<long double>;

// Coefficients with magnitude below this are dropped during symbolic arithmetic.
inline constexpr double kPruneTol = 1e-15;

// Typed error carried up to the CLI, which maps categories to exit codes.
struct Error : std::runtime_error {
  enum class Kind {
    InvalidInput,        // malformed spec, precondition violation -> exit 2
    Obstruction,         // mathematical obstruction -> exit 1
    Numerical,           // fit/tolerance failure
  };
  Kind kind;
  std::string code;  // short machine-readable tag, e.g. "MeanNotZero"

  Error(Kind k, std::string c, const std::string& what)
      : std::runtime_error(c + ": " + what), kind(k), code(std::move(c)) {}
};

[[noreturn]] inline void fail_input(const std::string& code, const std::string& msg) {
  throw Error(Error::Kind::InvalidInput, code, msg);
}
[[noreturn]] inline void fail_obstruction(const std::string& code, const std::string& msg) {
  throw Error(Error::Kind::Obstruction, code, msg);
}
[[noreturn]] inline void fail_numerical(const std::string& code, const std::string& msg) {
  throw Error(Error::Kind::Numerical, code, msg);
}

// Unit complex number exp(2*pi*i * num/den) from an exact rational phase.
// One transcendental evaluation, no accumulated drift.
inline cplx unit_phase(std::int64_t num, std::int64_t den) {
  long double ph = kTwoPiL * static_cast<long double>(num) / static_cast<long double>(den);
  return {static_cast<double>(std::cos(ph)), static_cast<double>(std::sin(ph))};
}

// exp(2*pi*i * t) for t computed in extended precision.
inline cplx unit_phase_real(long double t) {
  long double ph = kTwoPiL * t;
  return {static_cast<double>(std::cos(ph)), static_cast<double>(std::sin(ph))};
}

}  // namespace mga
