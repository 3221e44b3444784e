#pragma once

#include <stdexcept>
#include <string>

namespace sigvol {

// Bad or inconsistent configuration (ρ not PSD, dimension overflow, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A tensor operation would produce words beyond the allowed level.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlphabetMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested numerical method is not applicable (e.g. Taylor series outside its radius).
struct MethodError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Price outside no-arbitrage bounds.
struct ArbitrageViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuoteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sigvol
