#include <algorithm>
#include <bit>
#include <cmath>

#include "flc/classifier.hpp"

namespace flc {

namespace {

constexpr std::string_view kModelMagic = "FLCM";
constexpr std::uint8_t kModelVersion = 1;

[[noreturn]] void invalid(const std::string& why) { throw Error(Errc::InvalidModel, "model: " + why); }

std::uint8_t majority(const std::map<std::uint8_t, std::uint64_t>& counts) {
  std::uint8_t best = kNoBasin;
  std::uint64_t bestCount = 0;
  for (const auto& [label, n] : counts) {
    if (n > bestCount) {
      best = label;
      bestCount = n;
    }
  }
  return best;
}

double entropy(const std::map<std::uint8_t, std::size_t>& counts, std::size_t total) {
  double h = 0;
  for (const auto& [label, n] : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

std::uint32_t LogIndexTree::path(const BlockFeatures& f) const {
  std::uint32_t p = 0;
  for (const std::uint8_t feature : featureOrder) p = (p << 4) | (f.values[feature] & 0xF);
  return p;
}

std::uint8_t LogIndexTree::lookup(const BlockFeatures& f) const {
  const std::uint32_t p = path(f);
  if (const auto it = leaves.find(p); it != leaves.end()) return it->second.basin;
  for (int depth = kFeatureCount - 1; depth >= 0; --depth) {
    const int drop = 4 * (kFeatureCount - depth);
    const std::uint32_t prefix = drop >= 32 ? 0 : p >> drop;
    std::map<std::uint8_t, std::uint64_t> counts;
    for (const auto& [leafPath, leaf] : leaves) {
      const std::uint32_t leafPrefix = drop >= 32 ? 0 : leafPath >> drop;
      if (leafPrefix == prefix) counts[leaf.basin] += leaf.count;
    }
    if (!counts.empty()) return majority(counts);
  }
  return kNoBasin;
}

std::optional<std::size_t> NlcaModel::basinOf(const AttractorId& a) const {
  const auto it = std::lower_bound(basins.begin(), basins.end(), a,
                                   [](const Basin& b, const AttractorId& id) { return b.attractor < id; });
  if (it == basins.end() || it->attractor != a) return std::nullopt;
  return static_cast<std::size_t>(it - basins.begin());
}

void NlcaModel::validate() const {
  if (latticeLength != kModelLatticeLength) invalid("lattice length must be 32");
  if (basins.empty()) invalid("no basins");
  if (basins.size() > kMaxBasins) invalid("too many basins");
  if (isLinear(rule)) invalid("rule is linear");
  if (maxSteps < 1) invalid("maxSteps must be positive");
  for (std::size_t i = 0; i < basins.size(); ++i) {
    if (basins[i].attractor.length() != latticeLength) invalid("attractor length");
    if (i > 0 && !(basins[i - 1].attractor < basins[i].attractor)) invalid("attractors not distinct and ordered");
    if (!(basins[i].quality > 0) || !std::isfinite(basins[i].quality)) invalid("basin quality must be positive");
  }
  std::array<bool, kFeatureCount> seen{};
  for (const std::uint8_t f : index.featureOrder) {
    if (f >= kFeatureCount || seen[f]) invalid("feature order is not a permutation");
    seen[f] = true;
  }
  for (const auto& [p, leaf] : index.leaves) {
    if (leaf.basin != kNoBasin && leaf.basin >= basins.size()) invalid("leaf basin out of range");
  }
}

Bytes NlcaModel::serialize() const {
  validate();
  Bytes out;
  ByteWriter w(out);
  w.raw(kModelMagic);
  w.u8(kModelVersion);
  w.u8(static_cast<std::uint8_t>(rule.radius()));
  if (rule.radius() == 1) {
    w.u8(static_cast<std::uint8_t>(rule.table()));
  } else {
    w.u32(rule.table());
  }
  w.u8(static_cast<std::uint8_t>(latticeLength));
  w.u8(static_cast<std::uint8_t>(basins.size()));
  for (const auto& b : basins) {
    w.u32(static_cast<std::uint32_t>(b.attractor.bits()));
    w.u8(static_cast<std::uint8_t>(b.variant.id()));
    w.u64(std::bit_cast<std::uint64_t>(b.quality));
  }
  w.u8(static_cast<std::uint8_t>(defaultVariant.id()));
  w.u16(static_cast<std::uint16_t>(maxSteps));
  for (const std::uint8_t f : index.featureOrder) w.u8(f);
  w.u32(static_cast<std::uint32_t>(index.leaves.size()));
  for (const auto& [p, leaf] : index.leaves) {
    w.u32(p);
    w.u8(leaf.basin);
    w.u32(leaf.count);
  }
  w.u32(crc32(out));
  return out;
}

NlcaModel NlcaModel::deserialize(ByteView data) {
  if (data.size() < 8 || asChars(data.first(4)) != kModelMagic) invalid("bad magic");
  const ByteView body = data.first(data.size() - 4);
  ByteReader crcReader(data.last(4), Errc::InvalidModel);
  if (crc32(body) != crcReader.u32()) invalid("CRC mismatch");

  ByteReader r(body.subspan(4), Errc::InvalidModel);
  if (r.u8() != kModelVersion) invalid("unsupported version");
  NlcaModel m;
  const int radius = r.u8();
  try {
    if (radius == 1) {
      m.rule = NlcaRule(1, r.u8());
    } else if (radius == 2) {
      m.rule = NlcaRule(2, r.u32());
    } else {
      invalid("radius must be 1 or 2");
    }
  } catch (const std::invalid_argument& e) {
    invalid(e.what());
  }
  m.latticeLength = r.u8();
  if (m.latticeLength != kModelLatticeLength) invalid("lattice length must be 32");
  const std::size_t basinCount = r.u8();
  for (std::size_t i = 0; i < basinCount; ++i) {
    Basin b;
    b.attractor = LatticeConfig(m.latticeLength, r.u32());
    const int v = r.u8();
    if (v >= TransformVariant::kCount) invalid("basin variant out of range");
    b.variant = variantFromId(v);
    b.quality = std::bit_cast<double>(r.u64());
    m.basins.push_back(b);
  }
  const int dv = r.u8();
  if (dv >= TransformVariant::kCount) invalid("default variant out of range");
  m.defaultVariant = variantFromId(dv);
  m.maxSteps = r.u16();
  for (auto& f : m.index.featureOrder) f = r.u8();
  const std::uint32_t leafCount = r.u32();
  if (leafCount > r.remaining() / 9) invalid("leaf count exceeds model size");
  for (std::uint32_t i = 0; i < leafCount; ++i) {
    const std::uint32_t p = r.u32();
    LogIndexTree::Leaf leaf;
    leaf.basin = r.u8();
    leaf.count = r.u32();
    if (!m.index.leaves.emplace(p, leaf).second) invalid("duplicate leaf path");
  }
  if (!r.atEnd()) invalid("trailing bytes");
  m.validate();
  return m;
}

Classification classifyFeatures(const BlockFeatures& f, const NlcaModel& m) {
  if (const auto a = findAttractor(f.toLattice(), m.rule, m.maxSteps)) {
    if (const auto basin = m.basinOf(*a)) return {basin, m.basins[*basin].variant};
  }
  return {std::nullopt, m.defaultVariant};
}

Classification classifyBlock(std::span<const TokenizedLine> block, const TokenDictionary& dict, const NlcaModel& m) {
  return classifyFeatures(extractFeatures(block, dict), m);
}

Classification classifyBlockIndexed(std::span<const TokenizedLine> block, const TokenDictionary& dict,
                                    const NlcaModel& m) {
  const std::uint8_t basin = m.index.lookup(extractFeatures(block, dict));
  if (basin == kNoBasin || basin >= m.basins.size()) return {std::nullopt, m.defaultVariant};
  return {std::size_t{basin}, m.basins[basin].variant};
}

std::array<double, kFeatureCount> featureGains(std::span<const BlockFeatures> features,
                                               std::span<const std::uint8_t> labels) {
  std::array<double, kFeatureCount> gains{};
  const std::size_t n = features.size();
  if (n == 0) return gains;
  std::map<std::uint8_t, std::size_t> all;
  for (const std::uint8_t l : labels) ++all[l];
  const double base = entropy(all, n);
  for (int f = 0; f < kFeatureCount; ++f) {
    std::array<std::map<std::uint8_t, std::size_t>, 16> byValue;
    std::array<std::size_t, 16> sizes{};
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t v = features[i].values[static_cast<std::size_t>(f)] & 0xF;
      ++byValue[v][labels[i]];
      ++sizes[v];
    }
    double conditional = 0;
    for (std::size_t v = 0; v < 16; ++v) {
      if (sizes[v] == 0) continue;
      conditional += static_cast<double>(sizes[v]) / static_cast<double>(n) * entropy(byValue[v], sizes[v]);
    }
    gains[static_cast<std::size_t>(f)] = std::max(0.0, base - conditional);
  }
  return gains;
}

LogIndexTree buildLogIndex(const NlcaModel& m, const TrainingSet& training) {
  std::vector<BlockFeatures> feats;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < training.size(); ++i) {
    feats.push_back(training.features(i));
    const Classification c = classifyFeatures(feats.back(), m);
    labels.push_back(c.basin ? static_cast<std::uint8_t>(*c.basin) : kNoBasin);
  }
  const auto gains = featureGains(feats, labels);

  std::array<std::uint8_t, kFeatureCount> ranked{0, 1, 2, 3, 4, 5, 6, 7};
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::uint8_t a, std::uint8_t b) { return gains[a] > gains[b]; });

  LogIndexTree tree;
  std::reverse_copy(ranked.begin(), ranked.end(), tree.featureOrder.begin());

  std::map<std::uint32_t, std::map<std::uint8_t, std::uint64_t>> votes;
  for (std::size_t i = 0; i < feats.size(); ++i) ++votes[tree.path(feats[i])][labels[i]];
  for (const auto& [p, counts] : votes) {
    std::uint64_t total = 0;
    for (const auto& [label, n] : counts) total += n;
    tree.leaves[p] = LogIndexTree::Leaf{majority(counts), static_cast<std::uint32_t>(total)};
  }
  return tree;
}

}  // namespace flc
