#include "flc/nlca.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "flc/error.hpp"

namespace flc {

namespace {

std::uint64_t rotl(std::uint64_t x, int s, int n, std::uint64_t mask) noexcept {
  s %= n;
  if (s < 0) s += n;
  if (s == 0) return x;
  return ((x << s) | (x >> (n - s))) & mask;
}

}  // namespace

NlcaRule::NlcaRule(int radius, std::uint32_t table) : radius_(radius), table_(table) {
  if (radius < 1 || radius > 2) throw std::invalid_argument("rule radius must be 1 or 2");
  if (radius == 1 && table > 0xFF) throw std::invalid_argument("radius-1 table has 8 entries");
}

LatticeConfig::LatticeConfig(int length, std::uint64_t bits) : length_(length) {
  if (length < 1 || length > kMaxLength) throw std::invalid_argument("lattice length must be 1..64");
  bits_ = bits & mask();
}

LatticeConfig LatticeConfig::fromString(std::string_view cells) {
  std::uint64_t bits = 0;
  for (const char c : cells) {
    if (c != '0' && c != '1') throw std::invalid_argument("lattice cells must be '0' or '1'");
    bits = (bits << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return LatticeConfig(static_cast<int>(cells.size()), bits);
}

int LatticeConfig::popcount() const noexcept { return std::popcount(bits_); }

std::string LatticeConfig::toString() const {
  std::string s(static_cast<std::size_t>(length_), '0');
  for (int i = 0; i < length_; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>('0' + cell(i));
  return s;
}

LatticeConfig stepLattice(const LatticeConfig& c, const NlcaRule& r) {
  const int n = c.length();
  const std::uint64_t mask = c.mask();
  const int width = r.neighborhoodBits();
  // shifted[j] holds, for every cell i, the state of cell i + (j - radius).
  std::uint64_t shifted[5];
  for (int j = 0; j < width; ++j) shifted[j] = rotl(c.bits(), j - r.radius(), n, mask);

  std::uint64_t next = 0;
  for (unsigned k = 0; k < r.tableSize(); ++k) {
    if (!r.next(k)) continue;
    std::uint64_t term = mask;
    for (int j = 0; j < width; ++j) {
      const bool one = (k >> (width - 1 - j)) & 1;
      term &= one ? shifted[j] : ~shifted[j];
    }
    next |= term;
  }
  return LatticeConfig(n, next & mask);
}

bool isLinear(const NlcaRule& r) {
  const unsigned size = static_cast<unsigned>(r.tableSize());
  for (unsigned x = 0; x < size; ++x) {
    for (unsigned y = 0; y < size; ++y) {
      if (r.next(x ^ y) != (r.next(x) ^ r.next(y))) return false;
    }
  }
  return true;
}

std::optional<AttractorId> findAttractor(const LatticeConfig& c, const NlcaRule& r, int maxSteps) {
  std::vector<LatticeConfig> trail{c};
  std::unordered_map<std::uint64_t, std::size_t> seen{{c.bits(), 0}};
  LatticeConfig cur = c;
  for (int s = 1; s <= maxSteps; ++s) {
    cur = stepLattice(cur, r);
    const auto [it, fresh] = seen.emplace(cur.bits(), trail.size());
    if (!fresh) return *std::min_element(trail.begin() + static_cast<std::ptrdiff_t>(it->second), trail.end());
    trail.push_back(cur);
  }
  return std::nullopt;
}

std::size_t BasinPartition::basinCount() const {
  return std::unordered_set<std::uint64_t>(labels.begin(), labels.end()).size();
}

BasinPartition enumerateBasins(const NlcaRule& r, int n) {
  if (n > kMaxExhaustiveLength) {
    throw Error(Errc::RefuseExhaustive, "exhaustive basin enumeration limited to n <= 20");
  }
  if (n < 1) throw std::invalid_argument("lattice length must be positive");
  const std::size_t states = std::size_t{1} << n;
  std::vector<std::uint32_t> succ(states);
  for (std::size_t s = 0; s < states; ++s) {
    succ[s] = static_cast<std::uint32_t>(stepLattice(LatticeConfig(n, s), r).bits());
  }

  constexpr std::uint8_t kFresh = 0, kOnPath = 1, kDone = 2;
  std::vector<std::uint8_t> state(states, kFresh);
  BasinPartition out{n, std::vector<std::uint64_t>(states, 0)};
  std::vector<std::uint32_t> path;
  for (std::size_t start = 0; start < states; ++start) {
    if (state[start] != kFresh) continue;
    path.clear();
    std::uint32_t s = static_cast<std::uint32_t>(start);
    while (state[s] == kFresh) {
      state[s] = kOnPath;
      path.push_back(s);
      s = succ[s];
    }
    std::uint64_t label;
    if (state[s] == kOnPath) {
      // The walk closed a new cycle starting at s.
      const auto cycleStart = std::find(path.begin(), path.end(), s);
      label = *std::min_element(cycleStart, path.end());
    } else {
      label = out.labels[s];
    }
    for (const std::uint32_t p : path) {
      out.labels[p] = label;
      state[p] = kDone;
    }
  }
  return out;
}

}  // namespace flc
