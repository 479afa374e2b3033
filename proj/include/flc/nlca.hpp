#pragma once

// One-dimensional, two-state cellular automata on cyclic lattices of up to
// 64 cells, with attractor and basin machinery.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flc {

/// Local rule of radius 1 or 2. Bit k of `table` is the next state for the
/// neighborhood whose cells, read left to right, spell k in binary (Wolfram
/// numbering for radius 1).
class NlcaRule {
 public:
  NlcaRule() = default;
  /// Throws std::invalid_argument for radius outside 1..2 or table bits
  /// beyond the neighborhood count.
  NlcaRule(int radius, std::uint32_t table);

  static NlcaRule elementary(std::uint8_t wolframCode) { return NlcaRule(1, wolframCode); }

  int radius() const noexcept { return radius_; }
  std::uint32_t table() const noexcept { return table_; }
  int neighborhoodBits() const noexcept { return 2 * radius_ + 1; }
  std::size_t tableSize() const noexcept { return std::size_t{1} << neighborhoodBits(); }
  int next(unsigned neighborhood) const noexcept { return static_cast<int>((table_ >> neighborhood) & 1); }

  friend bool operator==(const NlcaRule&, const NlcaRule&) = default;

 private:
  int radius_ = 1;
  std::uint32_t table_ = 0;
};

/// Cyclic bit lattice. Cell 0 is the most significant of `bits()`, so numeric
/// order on bits() equals lexicographic order on the cell sequence.
class LatticeConfig {
 public:
  static constexpr int kMaxLength = 64;

  LatticeConfig() = default;
  /// Throws std::invalid_argument unless 1 <= length <= 64.
  LatticeConfig(int length, std::uint64_t bits);
  /// Parses a string of '0'/'1' cells.
  static LatticeConfig fromString(std::string_view cells);

  int length() const noexcept { return length_; }
  std::uint64_t bits() const noexcept { return bits_; }
  std::uint64_t mask() const noexcept { return length_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << length_) - 1; }
  int cell(int i) const noexcept { return static_cast<int>((bits_ >> (length_ - 1 - i)) & 1); }
  int popcount() const noexcept;
  std::string toString() const;

  friend bool operator==(const LatticeConfig&, const LatticeConfig&) = default;
  friend auto operator<=>(const LatticeConfig& a, const LatticeConfig& b) noexcept {
    return a.bits_ <=> b.bits_;
  }

 private:
  int length_ = 1;
  std::uint64_t bits_ = 0;
};

/// Canonical attractor identity: the smallest configuration on the cycle.
using AttractorId = LatticeConfig;

/// Synchronous update of every cell from its cyclic neighborhood.
LatticeConfig stepLattice(const LatticeConfig& c, const NlcaRule& r);

/// True iff the local map is additive over GF(2), checked over every pair of
/// neighborhoods.
bool isLinear(const NlcaRule& r);

/// Iterates until the first revisited configuration and returns the smallest
/// configuration on the cycle; empty when no revisit occurs within maxSteps
/// steps.
std::optional<AttractorId> findAttractor(const LatticeConfig& c, const NlcaRule& r, int maxSteps);

struct BasinPartition {
  int length = 0;
  std::vector<std::uint64_t> labels;  // labels[s] = attractor id bits of state s

  std::size_t basinCount() const;
};

inline constexpr int kMaxExhaustiveLength = 20;

/// Labels all 2^n configurations with their attractor. Throws
/// Error(RefuseExhaustive) for n > 20.
BasinPartition enumerateBasins(const NlcaRule& r, int n);

}  // namespace flc
