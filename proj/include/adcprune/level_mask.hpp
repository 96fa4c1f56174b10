#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adcprune {

inline constexpr int kMinBitwidth = 1;
inline constexpr int kMaxBitwidth = 6;

/// Number of comparator levels of a conventional N-bit flash ADC (2^N - 1).
int level_count(int bitwidth);

/// Set of comparator levels that survive pruning in one flash ADC.
///
/// Level j (1 <= j <= 2^N - 1) is stored at bit j-1. Level 0 owns no
/// comparator and is therefore always representable; it has no bit here.
/// The hex form used on the command line and in run artifacts puts level 1
/// in the least significant bit, e.g. N=3 with levels {5,6} removed is "4F".
class LevelMask {
 public:
  LevelMask() = default;

  static LevelMask full(int bitwidth);
  static LevelMask empty(int bitwidth);
  static LevelMask from_bits(int bitwidth, std::uint64_t bits);
  static LevelMask from_levels(int bitwidth, std::span<const int> levels);
  /// Accepts an optional "0x" prefix, either case. Throws std::invalid_argument
  /// on non-hex characters or bits above level 2^N - 1.
  static LevelMask parse_hex(int bitwidth, std::string_view hex);

  int bitwidth() const noexcept { return bitwidth_; }
  int size() const noexcept { return level_count(bitwidth_); }
  std::uint64_t bits() const noexcept { return bits_; }

  bool survives(int level) const;
  void set(int level, bool keep);
  void flip(int level);

  int popcount() const noexcept;
  /// Surviving levels in ascending order.
  std::vector<int> levels() const;
  /// Highest surviving level <= `level`, or 0 when there is none.
  int floor_level(int level) const;

  bool is_subset_of(const LevelMask& other) const;

  /// Fixed width: ceil((2^N - 1) / 4) upper-case digits.
  std::string to_hex() const;

  friend bool operator==(const LevelMask&, const LevelMask&) = default;

 private:
  LevelMask(int bitwidth, std::uint64_t bits) : bitwidth_(bitwidth), bits_(bits) {}

  int bitwidth_ = 4;
  std::uint64_t bits_ = 0;
};

}  // namespace adcprune
