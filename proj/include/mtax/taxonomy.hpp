#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mtax {

/// Two-bit engagement sub-class field. Meaning depends on the engagement flag:
/// rigid uses 00 stationary / 11 moving, soft uses 00 admitting, 10
/// manipulator-deforming, 11 manipulatee-deforming.
enum class Subclass : std::uint8_t { b00 = 0, b01 = 1, b10 = 2, b11 = 3 };

/**
 * 8-bit manipulation code.
 *
 * Rendered left to right as: contact, engagement, sub-class (2 bits),
 * prismatic, revolute, duration, manual. "10111010" is a rigid contact
 * motion that moves the passive object along a prismatic path with
 * continuous contact, performed with one hand.
 *
 * A MotionCode may hold an illegal combination; use validate() to check.
 */
struct MotionCode {
  bool contact = false;
  bool soft = false;  ///< engagement: false rigid, true soft
  Subclass subclass = Subclass::b00;
  bool prismatic = false;
  bool revolute = false;
  bool continuous = false;  ///< contact duration
  bool bimanual = false;

  /// Packed byte; the leftmost rendered character is the most significant bit.
  std::uint8_t to_byte() const noexcept;
  static MotionCode from_byte(std::uint8_t byte) noexcept;

  friend bool operator==(const MotionCode &a, const MotionCode &b) noexcept {
    return a.to_byte() == b.to_byte();
  }
  friend std::strong_ordering operator<=>(const MotionCode &a, const MotionCode &b) noexcept {
    return a.to_byte() <=> b.to_byte();
  }
};

/// Parses an 8-character binary string. Legality is not checked here.
/// Throws ParseError on wrong length or a character other than 0/1.
MotionCode parse_code(std::string_view text);

std::string render_code(const MotionCode &code);

struct Violation {
  std::string attribute;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return violations.empty(); }
};

/// Checks the attribute rules: non-contact codes zero engagement, sub-class and
/// duration; rigid sub-class is 00 or 11; soft sub-class is 00, 10 or 11.
/// A code with neither trajectory bit set passes with a warning.
ValidationResult validate(const MotionCode &code);

/// Every legal code in ascending byte order.
std::vector<MotionCode> enumerate_legal_codes();

/// Name of the engagement sub-class given the engagement flag, e.g. "moving".
std::string_view subclass_name(bool soft, Subclass subclass) noexcept;

/// Multi-line human-readable description of each attribute.
std::string describe(const MotionCode &code);

/// Per-bit weights for code_distance, in rendering order.
class CodeDistanceWeights {
public:
  CodeDistanceWeights() { weights_.fill(1.0); }
  /// Throws InvalidArgument if any weight is negative or non-finite, or all are zero.
  explicit CodeDistanceWeights(const std::array<double, 8> &weights);

  double operator[](std::size_t bit) const { return weights_[bit]; }
  const std::array<double, 8> &values() const noexcept { return weights_; }

private:
  std::array<double, 8> weights_{};
};

/// Weighted Hamming distance over the eight bit positions.
double code_distance(const MotionCode &a, const MotionCode &b,
                     const CodeDistanceWeights &weights = {});

} // namespace mtax
