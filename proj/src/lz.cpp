#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <memory>
#include <type_traits>
#include <vector>

#include "flc/backend.hpp"

namespace flc::lz {

namespace {

constexpr std::uint8_t kModeStored = 0;
constexpr std::uint8_t kModeCoded = 1;

constexpr int kMaxHashBits = 16;
constexpr int kChainDepth = 32;

// Adaptive bit probability from a pair of counts. Counts start at 1 and are
// halved when their sum reaches 2^16.
constexpr std::uint32_t kCountStep = 24;
constexpr std::uint32_t kCountLimit = 1u << 16;

struct BitModel {
  std::uint16_t n0 = 1;
  std::uint16_t n1 = 1;
  std::uint16_t p = 32768;  // cached from the counts, off the decode critical path

  std::uint32_t p1() const noexcept { return p; }

  void update(int bit) noexcept {
    std::uint32_t a = n0, b = n1;
    (bit ? b : a) += kCountStep;
    if (a + b >= kCountLimit) {
      a = (a + 1) >> 1;
      b = (b + 1) >> 1;
    }
    n0 = static_cast<std::uint16_t>(a);
    n1 = static_cast<std::uint16_t>(b);
    const std::uint32_t q = (b << 16) / (a + b);
    p = static_cast<std::uint16_t>(q < 1 ? 1 : (q > 65535 ? 65535 : q));
  }
};

// Logistic mixing in the integer domain (12-bit probabilities, stretch
// values in [-2047, 2047]) so that coded streams do not depend on libm.
int squash(int d) noexcept {
  static constexpr int kTable[33] = {1,    2,    3,    6,    10,   16,   27,   45,   73,   120,  194,
                                     310,  488,  747,  1101, 1546, 2047, 2549, 2994, 3348, 3607, 3785,
                                     3901, 3975, 4022, 4050, 4068, 4079, 4085, 4089, 4092, 4093, 4094};
  if (d > 2047) return 4095;
  if (d < -2047) return 1;
  const int w = d & 127;
  d = (d >> 7) + 16;
  return (kTable[d] * (128 - w) + kTable[d + 1] * w + 64) >> 7;
}

class StretchTable {
 public:
  StretchTable() {
    int next = 0;
    for (int x = -2047; x <= 2047; ++x) {
      const int v = squash(x);
      for (int j = next; j <= v; ++j) t_[static_cast<std::size_t>(j)] = static_cast<std::int16_t>(x);
      next = v + 1;
    }
    for (int j = next; j < 4096; ++j) t_[static_cast<std::size_t>(j)] = 2047;
  }
  int operator()(std::uint32_t p12) const noexcept { return t_[p12]; }

 private:
  std::array<std::int16_t, 4096> t_{};
};

const StretchTable stretch;

class SquashTable {
 public:
  SquashTable() {
    for (int d = -2048; d <= 2048; ++d) t_[static_cast<std::size_t>(d + 2048)] = static_cast<std::int16_t>(squash(d));
  }
  int operator()(std::int64_t d) const noexcept {
    return t_[static_cast<std::size_t>(std::clamp<std::int64_t>(d, -2048, 2048) + 2048)];
  }

 private:
  std::array<std::int16_t, 4097> t_{};
};

const SquashTable squashed;

// Literal bits are predicted by order-0, order-1 and hashed order-2 models
// plus a bias input, mixed with weights selected by the bit-tree node.
constexpr int kMixInputs = 4;
constexpr int kMixInitWeight = 1 << 14;
constexpr int kMixRate = 2;
constexpr int kMixMaxWeight = 1 << 24;
constexpr int kOrder2Bits = 10;

class Encoder {
 public:
  explicit Encoder(Bytes& out) : out_(out) {}

  void bit(BitModel& m, int b) {
    code(m.p1(), b);
    m.update(b);
  }

  // p1 is the probability of a one in 1/65536 units.
  void code(std::uint32_t p1, int b) {
    const std::uint32_t mid = x1_ + static_cast<std::uint32_t>((static_cast<std::uint64_t>(x2_ - x1_) * p1) >> 16);
    if (b) {
      x2_ = mid;
    } else {
      x1_ = mid + 1;
    }
    while (((x1_ ^ x2_) & 0xFF000000u) == 0) {
      out_.push_back(static_cast<std::uint8_t>(x2_ >> 24));
      x1_ <<= 8;
      x2_ = (x2_ << 8) | 0xFF;
    }
  }

  void flush() {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<std::uint8_t>(x1_ >> 24));
      x1_ <<= 8;
    }
  }

 private:
  Bytes& out_;
  std::uint32_t x1_ = 0;
  std::uint32_t x2_ = 0xFFFFFFFFu;
};

class Decoder {
 public:
  explicit Decoder(ByteView in) : in_(in) {
    for (int i = 0; i < 4; ++i) x_ = (x_ << 8) | next();
  }

  int bit(BitModel& m) {
    const int b = code(m.p1());
    m.update(b);
    return b;
  }

  int code(std::uint32_t p1) {
    const std::uint32_t mid = x1_ + static_cast<std::uint32_t>((static_cast<std::uint64_t>(x2_ - x1_) * p1) >> 16);
    const int b = x_ <= mid;
    if (b) {
      x2_ = mid;
    } else {
      x1_ = mid + 1;
    }
    while (((x1_ ^ x2_) & 0xFF000000u) == 0) {
      x1_ <<= 8;
      x2_ = (x2_ << 8) | 0xFF;
      x_ = (x_ << 8) | next();
    }
    return b;
  }

  bool exhausted() const noexcept { return pos_ == in_.size(); }

 private:
  std::uint32_t next() {
    if (pos_ >= in_.size()) throw Error(Errc::CorruptBlock, "lz: truncated payload");
    return in_[pos_++];
  }

  ByteView in_;
  std::size_t pos_ = 0;
  std::uint32_t x1_ = 0;
  std::uint32_t x2_ = 0xFFFFFFFFu;
  std::uint32_t x_ = 0;
};

// A context-table entry with the epoch of the block that last wrote it.
struct Stamped {
  BitModel model;
  std::uint32_t stamp = 0;
};

// All adaptive state for one block. Encoder and decoder drive it through the
// same sequence of calls. The context tables are large, so a model is reused
// per thread; entries carry the epoch of the block that last wrote them and a
// stale entry reads as fresh, which makes reset() O(1) for those tables.
struct Model {
  std::array<BitModel, 4> kind;                       // by last two symbol kinds
  std::array<BitModel, 256> order0;
  std::array<Stamped, 256 * 256> order1;
  std::array<Stamped, (256 << kOrder2Bits)> order2;  // hashed previous two bytes
  std::array<std::array<int, kMixInputs>, 256> weights;
  std::array<BitModel, 16> lengthSlot;                // bit tree over bit width
  std::array<std::array<BitModel, 16>, 17> lengthBits;
  std::array<std::array<BitModel, 32>, 4> distSlot;   // by min(len - 4, 3)
  std::array<std::array<BitModel, 16>, 17> distBits;
  unsigned history = 0;
  std::uint8_t prevByte = 0;
  std::uint8_t prevByte2 = 0;

  std::uint32_t epoch = 1;

  Model() { resetSmall(); }

  void reset() {
    if (++epoch == 0) {  // wrapped: stamps are ambiguous, start over
      for (auto& e : order1) e.stamp = 0;
      for (auto& e : order2) e.stamp = 0;
      epoch = 1;
    }
    resetSmall();
  }

  BitModel& o1(std::size_t i) noexcept { return live(order1[i]); }
  BitModel& o2(std::size_t i) noexcept { return live(order2[i]); }

  void pushByte(std::uint8_t b) noexcept {
    prevByte2 = prevByte;
    prevByte = b;
  }

 private:
  BitModel& live(Stamped& e) noexcept {
    if (e.stamp != epoch) {
      e.model = BitModel{};
      e.stamp = epoch;
    }
    return e.model;
  }

  void resetSmall() {
    kind.fill({});
    order0.fill({});
    for (auto& w : weights) w.fill(kMixInitWeight);
    lengthSlot.fill({});
    for (auto& a : lengthBits) a.fill({});
    for (auto& a : distSlot) a.fill({});
    for (auto& a : distBits) a.fill({});
    history = 0;
    prevByte = 0;
    prevByte2 = 0;
  }
};

Model& freshModel() {
  thread_local std::unique_ptr<Model> model;
  if (model) {
    model->reset();
  } else {
    model = std::make_unique<Model>();
  }
  return *model;
}

template <class Coder>
std::uint8_t codeLiteral(Coder& c, Model& m, unsigned value) {
  const std::size_t row2 =
      static_cast<std::size_t>(((std::uint32_t{m.prevByte2} << 8 | m.prevByte) * 2654435761u) >> (32 - kOrder2Bits));
  const std::size_t ctx1 = std::size_t{m.prevByte} << 8;
  const std::size_t ctx2 = row2 << 8;
  unsigned node = 1;
  for (int i = 7; i >= 0; --i) {
    BitModel& m0 = m.order0[node];
    BitModel& m1 = m.o1(ctx1 + node);
    BitModel& m2 = m.o2(ctx2 + node);
    auto& w = m.weights[node];
    const int s0 = stretch(m0.p1() >> 4);
    const int s1 = stretch(m1.p1() >> 4);
    const int s2 = stretch(m2.p1() >> 4);
    constexpr int s3 = 256;  // bias
    const std::int64_t dot = std::int64_t{w[0]} * s0 + std::int64_t{w[1]} * s1 + std::int64_t{w[2]} * s2 +
                             std::int64_t{w[3]} * s3;
    const int p = std::clamp(squashed(dot >> 16), 1, 4095);
    int b;
    if constexpr (std::is_same_v<Coder, Encoder>) {
      b = static_cast<int>((value >> i) & 1);
      c.code(static_cast<std::uint32_t>(p) << 4, b);
    } else {
      b = c.code(static_cast<std::uint32_t>(p) << 4);
    }
    const int err = ((b << 12) - p) * kMixRate;
    w[0] = std::clamp(w[0] + ((s0 * err) >> 10), -kMixMaxWeight, kMixMaxWeight);
    w[1] = std::clamp(w[1] + ((s1 * err) >> 10), -kMixMaxWeight, kMixMaxWeight);
    w[2] = std::clamp(w[2] + ((s2 * err) >> 10), -kMixMaxWeight, kMixMaxWeight);
    w[3] = std::clamp(w[3] + ((s3 * err) >> 10), -kMixMaxWeight, kMixMaxWeight);
    m0.update(b);
    m1.update(b);
    m2.update(b);
    node = (node << 1) | static_cast<unsigned>(b);
  }
  return static_cast<std::uint8_t>(node);
}

template <class Coder>
unsigned codeTree(Coder& c, BitModel* tree, int bits, unsigned value) {
  unsigned node = 1;
  for (int i = bits - 1; i >= 0; --i) {
    int b;
    if constexpr (std::is_same_v<Coder, Encoder>) {
      b = static_cast<int>((value >> i) & 1);
      c.bit(tree[node], b);
    } else {
      b = c.bit(tree[node]);
    }
    node = (node << 1) | static_cast<unsigned>(b);
  }
  return node - (1u << bits);
}

// Values >= 1 coded as bit width (tree) followed by the bits below the top one.
template <class Coder>
unsigned codeWidthValue(Coder& c, BitModel* slotTree, int slotBits, std::array<BitModel, 16>* lowBits,
                        unsigned value) {
  const unsigned width = codeTree(c, slotTree, slotBits, static_cast<unsigned>(std::bit_width(value)) - 1) + 1;
  if (width > 16) throw Error(Errc::CorruptBlock, "lz: value width out of range");
  unsigned v = 1;
  for (int i = static_cast<int>(width) - 2; i >= 0; --i) {
    BitModel& m = lowBits[width][static_cast<std::size_t>(i)];
    int b;
    if constexpr (std::is_same_v<Coder, Encoder>) {
      b = static_cast<int>((value >> i) & 1);
      c.bit(m, b);
    } else {
      b = c.bit(m);
    }
    v = (v << 1) | static_cast<unsigned>(b);
  }
  return v;
}

std::uint32_t hash4(const std::uint8_t* p, int bits) noexcept {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return (v * 2654435761u) >> (32 - bits);
}

Bytes stored(ByteView data) {
  Bytes out;
  out.reserve(data.size() + 1);
  out.push_back(kModeStored);
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

}  // namespace

Bytes compress(ByteView data) {
  const std::size_t n = data.size();
  if (n < kMinMatch) return stored(data);

  Bytes out;
  out.reserve(n / 2 + 16);
  out.push_back(kModeCoded);
  Encoder enc(out);
  Model* model = &freshModel();

  // Small inputs get a small head table; clearing 256 KiB per tiny block
  // would dominate the run time.
  const int hashBits = std::clamp(static_cast<int>(std::bit_width(n)), 10, kMaxHashBits);
  std::vector<std::uint32_t> head(std::size_t{1} << hashBits, 0);  // position + 1
  std::vector<std::uint32_t> chain(std::min<std::size_t>(n, kWindow + 1), 0);
  const std::size_t chainMask = chain.size();
  auto insert = [&](std::size_t pos) {
    if (pos + kMinMatch > n) return;
    const std::uint32_t h = hash4(&data[pos], hashBits);
    chain[pos % chainMask] = head[h];
    head[h] = static_cast<std::uint32_t>(pos + 1);
  };

  std::size_t i = 0;
  while (i < n) {
    std::size_t bestLen = 0;
    std::size_t bestDist = 0;
    if (i + kMinMatch <= n) {
      const std::size_t maxLen = std::min(kMaxMatch, n - i);
      std::uint32_t cand = head[hash4(&data[i], hashBits)];
      for (int depth = 0; cand != 0 && depth < kChainDepth; ++depth) {
        const std::size_t pos = cand - 1;
        const std::size_t dist = i - pos;
        if (dist > kWindow || dist > chainMask) break;
        if (data[pos + bestLen] == data[i + bestLen]) {
          std::size_t len = 0;
          while (len < maxLen && data[pos + len] == data[i + len]) ++len;
          if (len > bestLen) {
            bestLen = len;
            bestDist = dist;
            if (len == maxLen) break;
          }
        }
        const std::uint32_t nextCand = chain[pos % chainMask];
        if (nextCand >= cand) break;
        cand = nextCand;
      }
    }

    if (bestLen >= kMinMatch) {
      enc.bit(model->kind[model->history], 1);
      model->history = ((model->history << 1) | 1) & 3;
      codeWidthValue(enc, model->lengthSlot.data(), 4, model->lengthBits.data(),
                     static_cast<unsigned>(bestLen - kMinMatch + 1));
      codeWidthValue(enc, model->distSlot[std::min<std::size_t>(bestLen - kMinMatch, 3)].data(), 5,
                     model->distBits.data(), static_cast<unsigned>(bestDist));
      for (std::size_t k = 0; k < bestLen; ++k) insert(i + k);
      i += bestLen;
      model->pushByte(data[i - 2]);
      model->pushByte(data[i - 1]);
    } else {
      enc.bit(model->kind[model->history], 0);
      model->history = (model->history << 1) & 3;
      codeLiteral(enc, *model, data[i]);
      insert(i);
      model->pushByte(data[i]);
      ++i;
    }
    if (out.size() > n) return stored(data);
  }
  enc.flush();
  if (out.size() > n) return stored(data);
  return out;
}

Bytes decompress(ByteView payload, std::size_t originalLen) {
  if (payload.empty()) throw Error(Errc::CorruptBlock, "lz: empty payload");
  const std::uint8_t mode = payload[0];
  const ByteView body = payload.subspan(1);
  if (mode == kModeStored) {
    if (body.size() != originalLen) throw Error(Errc::CorruptBlock, "lz: stored length mismatch");
    return Bytes(body.begin(), body.end());
  }
  if (mode != kModeCoded) throw Error(Errc::CorruptBlock, "lz: unknown mode");

  Bytes out;
  out.reserve(originalLen);
  Decoder dec(body);
  Model* model = &freshModel();
  while (out.size() < originalLen) {
    if (dec.bit(model->kind[model->history])) {
      model->history = ((model->history << 1) | 1) & 3;
      const std::size_t len =
          codeWidthValue(dec, model->lengthSlot.data(), 4, model->lengthBits.data(), 0) + kMinMatch - 1;
      const std::size_t dist = codeWidthValue(
          dec, model->distSlot[std::min<std::size_t>(len - kMinMatch, 3)].data(), 5, model->distBits.data(), 0);
      if (len > kMaxMatch || dist > out.size() || dist > kWindow || len > originalLen - out.size()) {
        throw Error(Errc::CorruptBlock, "lz: match outside window");
      }
      const std::size_t from = out.size() - dist;
      for (std::size_t k = 0; k < len; ++k) out.push_back(out[from + k]);
      model->pushByte(out[out.size() - 2]);
      model->pushByte(out.back());
    } else {
      model->history = (model->history << 1) & 3;
      out.push_back(codeLiteral(dec, *model, 0));
      model->pushByte(out.back());
    }
  }
  if (!dec.exhausted()) throw Error(Errc::CorruptBlock, "lz: trailing bytes");
  return out;
}

}  // namespace flc::lz
