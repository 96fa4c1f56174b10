#include "adcprune/level_mask.hpp"

#include <bit>
#include <cctype>
#include <stdexcept>

namespace adcprune {
namespace {

void check_bitwidth(int bitwidth) {
  if (bitwidth < kMinBitwidth || bitwidth > kMaxBitwidth) {
    throw std::invalid_argument("ADC bitwidth must be in [1, 6], got " +
                                std::to_string(bitwidth));
  }
}

std::uint64_t all_levels(int bitwidth) {
  return (std::uint64_t{1} << level_count(bitwidth)) - 1;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

int level_count(int bitwidth) {
  check_bitwidth(bitwidth);
  return (1 << bitwidth) - 1;
}

LevelMask LevelMask::full(int bitwidth) {
  return {bitwidth, all_levels(bitwidth)};
}

LevelMask LevelMask::empty(int bitwidth) {
  check_bitwidth(bitwidth);
  return {bitwidth, 0};
}

LevelMask LevelMask::from_bits(int bitwidth, std::uint64_t bits) {
  if ((bits & ~all_levels(bitwidth)) != 0) {
    throw std::invalid_argument("mask has bits above level " +
                                std::to_string(level_count(bitwidth)));
  }
  return {bitwidth, bits};
}

LevelMask LevelMask::from_levels(int bitwidth, std::span<const int> levels) {
  LevelMask mask = empty(bitwidth);
  for (int level : levels) mask.set(level, true);
  return mask;
}

LevelMask LevelMask::parse_hex(int bitwidth, std::string_view hex) {
  check_bitwidth(bitwidth);
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) {
    hex.remove_prefix(2);
  }
  if (hex.empty()) throw std::invalid_argument("empty mask literal");
  std::uint64_t bits = 0;
  for (char c : hex) {
    const int v = hex_value(c);
    if (v < 0) {
      throw std::invalid_argument("invalid hex digit '" + std::string(1, c) +
                                  "' in mask literal");
    }
    if (bits >> 60 != 0) throw std::invalid_argument("mask literal too long");
    bits = (bits << 4) | static_cast<std::uint64_t>(v);
  }
  return from_bits(bitwidth, bits);
}

bool LevelMask::survives(int level) const {
  if (level < 1 || level > size()) return false;
  return (bits_ >> (level - 1)) & 1U;
}

void LevelMask::set(int level, bool keep) {
  if (level < 1 || level > size()) {
    throw std::out_of_range("level " + std::to_string(level) +
                            " outside [1, " + std::to_string(size()) + "]");
  }
  const std::uint64_t bit = std::uint64_t{1} << (level - 1);
  bits_ = keep ? (bits_ | bit) : (bits_ & ~bit);
}

void LevelMask::flip(int level) { set(level, !survives(level)); }

int LevelMask::popcount() const noexcept { return std::popcount(bits_); }

std::vector<int> LevelMask::levels() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(popcount()));
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
    out.push_back(std::countr_zero(b) + 1);
  }
  return out;
}

int LevelMask::floor_level(int level) const {
  if (level <= 0) return 0;
  const std::uint64_t below =
      level >= 64 ? bits_ : bits_ & ((std::uint64_t{1} << level) - 1);
  return std::bit_width(below);
}

bool LevelMask::is_subset_of(const LevelMask& other) const {
  return bitwidth_ == other.bitwidth_ && (bits_ & ~other.bits_) == 0;
}

std::string LevelMask::to_hex() const {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  const int digits = (size() + 3) / 4;
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int i = 0; i < digits; ++i) {
    out[static_cast<std::size_t>(digits - 1 - i)] = kDigits[(bits_ >> (4 * i)) & 0xF];
  }
  return out;
}

}  // namespace adcprune
