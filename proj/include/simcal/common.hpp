#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace simcal {

// Quadruped joint layout. Leg order FL, FR, HL, HR; within each leg
// hip_x, hip_y, knee. Feature columns and CSV columns follow this order.
inline constexpr int kNumJoints = 12;

inline constexpr std::array<const char*, kNumJoints> kJointNames = {
    "fl_hip_x", "fl_hip_y", "fl_knee",  //
    "fr_hip_x", "fr_hip_y", "fr_knee",  //
    "hl_hip_x", "hl_hip_y", "hl_knee",  //
    "hr_hip_x", "hr_hip_y", "hr_knee",
};

constexpr bool is_knee(int joint) { return joint % 3 == 2; }

// Error taxonomy, mapped to CLI exit codes by the tool:
//   ConfigError/usage -> 2, SchemaError/ParseError -> 3, NumericError -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& what, int line, int column = 0)
      : Error(what + " (line " + std::to_string(line) +
              (column > 0 ? ", column " + std::to_string(column) : "") + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct NumericError : Error {
  using Error::Error;
};

}  // namespace simcal
