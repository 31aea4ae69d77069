#include "mtax/taxonomy.hpp"

#include <cmath>
#include <sstream>

#include "mtax/error.hpp"

namespace mtax {

std::uint8_t MotionCode::to_byte() const noexcept {
  return static_cast<std::uint8_t>((contact ? 0x80 : 0) | (soft ? 0x40 : 0) |
                                   (static_cast<unsigned>(subclass) << 4) |
                                   (prismatic ? 0x08 : 0) | (revolute ? 0x04 : 0) |
                                   (continuous ? 0x02 : 0) | (bimanual ? 0x01 : 0));
}

MotionCode MotionCode::from_byte(std::uint8_t byte) noexcept {
  MotionCode c;
  c.contact = byte & 0x80;
  c.soft = byte & 0x40;
  c.subclass = static_cast<Subclass>((byte >> 4) & 0x3);
  c.prismatic = byte & 0x08;
  c.revolute = byte & 0x04;
  c.continuous = byte & 0x02;
  c.bimanual = byte & 0x01;
  return c;
}

MotionCode parse_code(std::string_view text) {
  if (text.size() != 8)
    throw ParseError("motion code must have 8 characters, got " + std::to_string(text.size()));
  std::uint8_t byte = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    const char ch = text[i];
    if (ch != '0' && ch != '1')
      throw ParseError("motion code character " + std::to_string(i + 1) + " is not 0 or 1");
    byte = static_cast<std::uint8_t>((byte << 1) | (ch == '1'));
  }
  return MotionCode::from_byte(byte);
}

std::string render_code(const MotionCode &code) {
  std::string out(8, '0');
  const auto byte = code.to_byte();
  for (int i = 0; i < 8; ++i)
    if (byte & (0x80 >> i)) out[i] = '1';
  return out;
}

ValidationResult validate(const MotionCode &code) {
  ValidationResult r;
  if (!code.contact) {
    if (code.soft || code.subclass != Subclass::b00)
      r.violations.push_back({"engagement", "non-contact must zero engagement bits"});
    if (code.continuous)
      r.violations.push_back({"duration", "non-contact must zero contact duration"});
  } else if (!code.soft) {
    if (code.subclass != Subclass::b00 && code.subclass != Subclass::b11)
      r.violations.push_back({"engagement_subclass", "illegal rigid subclass (expected 00 or 11)"});
  } else if (code.subclass == Subclass::b01) {
    r.violations.push_back({"engagement_subclass", "illegal soft subclass (expected 00, 10 or 11)"});
  }
  if (!code.prismatic && !code.revolute)
    r.warnings.push_back("neither prismatic nor revolute trajectory");
  return r;
}

std::vector<MotionCode> enumerate_legal_codes() {
  std::vector<MotionCode> out;
  for (unsigned b = 0; b < 256; ++b) {
    const auto c = MotionCode::from_byte(static_cast<std::uint8_t>(b));
    if (validate(c).ok()) out.push_back(c);
  }
  return out;
}

std::string_view subclass_name(bool soft, Subclass subclass) noexcept {
  if (!soft) {
    switch (subclass) {
    case Subclass::b00: return "stationary";
    case Subclass::b11: return "moving";
    default: return "invalid";
    }
  }
  switch (subclass) {
  case Subclass::b00: return "admitting/penetrative";
  case Subclass::b10: return "manipulator-deforming";
  case Subclass::b11: return "manipulatee-deforming";
  default: return "invalid";
  }
}

std::string describe(const MotionCode &code) {
  const std::string bits = render_code(code);
  std::ostringstream os;
  os << "code:        " << bits << '\n';
  os << "contact:     " << bits[0] << (code.contact ? " contact" : " non-contact") << '\n';
  os << "engagement:  " << bits[1] << (code.soft ? " soft" : " rigid") << '\n';
  os << "subclass:    " << bits.substr(2, 2) << ' '
     << (code.contact ? subclass_name(code.soft, code.subclass) : std::string_view("none")) << '\n';
  os << "prismatic:   " << bits[4] << (code.prismatic ? " yes" : " no") << '\n';
  os << "revolute:    " << bits[5] << (code.revolute ? " yes" : " no") << '\n';
  os << "duration:    " << bits[6] << (code.continuous ? " continuous" : " discontinuous") << '\n';
  os << "manual:      " << bits[7] << (code.bimanual ? " bimanual" : " unimanual") << '\n';
  return os.str();
}

CodeDistanceWeights::CodeDistanceWeights(const std::array<double, 8> &weights) : weights_(weights) {
  bool any_positive = false;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0)
      throw InvalidArgument("code distance weights must be finite and nonnegative");
    any_positive |= w > 0.0;
  }
  if (!any_positive) throw InvalidArgument("at least one code distance weight must be positive");
}

double code_distance(const MotionCode &a, const MotionCode &b, const CodeDistanceWeights &weights) {
  const unsigned diff = a.to_byte() ^ b.to_byte();
  double d = 0.0;
  for (int i = 0; i < 8; ++i)
    if (diff & (0x80u >> i)) d += weights[static_cast<std::size_t>(i)];
  return d;
}

} // namespace mtax
