#pragma once

#include <stdexcept>
#include <string>

namespace czgrape {

/// Bad user input: malformed config files, out-of-range values, unknown keys.
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A pulse pixel drove the model outside its tabulated validity range.
struct PixelRangeError : ConfigError {
  int channel;
  int pixel;
  double value_ghz;

  PixelRangeError(int channel_, int pixel_, double value_ghz_,
                  const std::string& what)
      : ConfigError(what), channel(channel_), pixel(pixel_), value_ghz(value_ghz_) {}
};

/// The optimizer could not make progress. The CLI maps this to exit code 3.
class SolverStall : public std::runtime_error {
 public:
  explicit SolverStall(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace czgrape
