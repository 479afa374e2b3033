#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "flc/classifier.hpp"
#include "flc/corpus.hpp"
#include "support.hpp"

namespace flc {
namespace {

using Block = std::vector<TokenizedLine>;

std::vector<Block> blocksOf(const std::string& text, std::size_t blockLines) {
  std::vector<Block> blocks;
  Block cur;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t lf = text.find('\n', start);
    if (lf == std::string::npos) lf = text.size();
    cur.push_back(tokenize(std::string_view(text).substr(start, lf - start), "\n"));
    start = lf + 1;
    if (cur.size() == blockLines) blocks.push_back(std::move(cur)), cur.clear();
  }
  if (!cur.empty()) blocks.push_back(std::move(cur));
  return blocks;
}

std::string corpus(CorpusStyle s, std::uint64_t lines, std::uint64_t seed) {
  return generateCorpus(CorpusSpec{s, lines, seed});
}

TokenDictionary dictFor(const std::vector<Block>& blocks) {
  std::vector<TokenizedLine> sample;
  for (const auto& b : blocks) sample.insert(sample.end(), b.begin(), b.end());
  return buildDictionary(sample, TokenDictionary::kDefaultMaxEntries);
}

TrainingSet makeSet(std::vector<Block> blocks) {
  auto dict = dictFor(blocks);
  return TrainingSet(std::move(blocks), std::move(dict), BackendId::lz());
}

// Apache blocks first, then syslog blocks.
std::vector<Block> twoStyleBlocks(std::uint64_t seed, std::uint64_t linesEach, std::size_t blockLines) {
  auto a = blocksOf(corpus(CorpusStyle::Apache, linesEach, seed), blockLines);
  auto b = blocksOf(corpus(CorpusStyle::Syslog, linesEach, seed + 1), blockLines);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Independent feature computation in exact integer arithmetic.
BlockFeatures referenceFeatures(const Block& block, const TokenDictionary& dict) {
  struct Line {
    std::vector<std::string> texts;
    std::vector<TokenClass> classes;
    std::size_t length = 0;
  };
  std::vector<Line> lines;
  for (const auto& l : block) {
    Line x;
    for (const auto& t : l.tokens) {
      x.length += t.text.size();
      if (t.cls == TokenClass::Separator) continue;
      x.texts.push_back(t.text);
      x.classes.push_back(t.cls);
    }
    lines.push_back(x);
  }
  // Positions for the match features are indices into the full token list,
  // separators included, so keep that view too.
  std::uint64_t comparable = 0, matched = 0, prefixed = 0, words = 0, tempo = 0, ip = 0, dec = 0, hits = 0;
  for (std::size_t li = 0; li < block.size(); ++li) {
    const auto& toks = block[li].tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& t = toks[i];
      if (t.cls == TokenClass::Separator) continue;
      ++words;
      tempo += t.cls == TokenClass::Timestamp || t.cls == TokenClass::Date || t.cls == TokenClass::Time;
      ip += t.cls == TokenClass::IPv4;
      dec += t.cls == TokenClass::Decimal;
      hits += std::count(dict.entries().begin(), dict.entries().end(), t.text) > 0;
      if (li == 0) continue;
      ++comparable;
      const auto& prevToks = block[li - 1].tokens;
      if (i >= prevToks.size()) continue;
      const std::string& p = prevToks[i].text;
      if (p == t.text) {
        ++matched;
      } else if (p.size() >= 2 && t.text.size() >= 2 && p.substr(0, 2) == t.text.substr(0, 2)) {
        ++prefixed;
      }
    }
  }
  auto rate = [](std::uint64_t h, std::uint64_t n) -> std::uint8_t {
    return n == 0 ? 0 : static_cast<std::uint8_t>(std::min<std::uint64_t>(15, h * 16 / n));
  };
  // Largest q with 2^q <= x + 1 where x = num / den.
  auto logBucket = [](unsigned __int128 num, unsigned __int128 den) -> std::uint8_t {
    int q = 15;
    while (q > 0 && (den << q) > num + den) --q;
    return static_cast<std::uint8_t>(q);
  };
  const std::uint64_t n = lines.size();
  std::uint64_t lenSum = 0, cSum = 0;
  unsigned __int128 cSq = 0;
  for (const auto& l : lines) {
    lenSum += l.length;
    cSum += l.texts.size();
    cSq += static_cast<unsigned __int128>(l.texts.size()) * l.texts.size();
  }
  BlockFeatures f;
  f.values = {rate(matched, comparable), rate(prefixed, comparable), rate(tempo, words), rate(ip, words),
              rate(dec, words),          rate(hits, words),          logBucket(lenSum, n),
              logBucket(n * cSq - static_cast<unsigned __int128>(cSum) * cSum, static_cast<unsigned __int128>(n) * n)};
  return f;
}

TEST(Features, IdenticalLinesSaturateMatchRate) {
  const Block b(10, tokenize("GET /index.html 200", "\n"));
  const auto f = extractFeatures(b, TokenDictionary());
  EXPECT_EQ(f[Feature::TokenMatchRate], 15);
  EXPECT_EQ(f[Feature::PrefixSimilarityRate], 0);
  EXPECT_EQ(f[Feature::TokenCountVariance], 0);
}

TEST(Features, NoIpv4MeansZeroRate) {
  const auto blocks = blocksOf(corpus(CorpusStyle::Syslog, 300, 3), 100);
  for (const auto& b : blocks) {
    const auto f = extractFeatures(b, TokenDictionary());
    EXPECT_EQ(f[Feature::Ipv4Rate], 0);
  }
}

TEST(Features, EmptyBlockRejected) { EXPECT_THROW(extractFeatures({}, TokenDictionary()), std::invalid_argument); }

TEST(Features, MatchIndependentComputation) {
  std::mt19937_64 rng(31);
  auto gen = blocksOf(corpus(CorpusStyle::Mixed, 4000, 9), 97);
  const auto dict = dictFor(gen);
  for (int i = 0; i < 300; ++i) {
    gen.push_back(blocksOf(test::randomDocument(rng, 40, 60) + "\n", 1000).front());
  }
  for (const auto& b : gen) {
    if (b.empty()) continue;
    ASSERT_EQ(extractFeatures(b, dict), referenceFeatures(b, dict));
  }
}

TEST(Features, LatticePacksFeatureZeroFirst) {
  BlockFeatures f;
  f.values = {0xA, 0, 0, 0, 0, 0, 0, 0x3};
  EXPECT_EQ(f.toLattice().length(), 32);
  EXPECT_EQ(f.toLattice().bits(), 0xA0000003u);
}

TEST(Features, SeededApacheBlockIsPinned) {
  const auto blocks = blocksOf(corpus(CorpusStyle::Apache, 256, 42), 256);
  ASSERT_EQ(blocks.size(), 1u);
  const auto f = extractFeatures(blocks[0], TokenDictionary({"GET", "HTTP/1.1", "200", "-"}));
  EXPECT_EQ(f, referenceFeatures(blocks[0], TokenDictionary({"GET", "HTTP/1.1", "200", "-"})));
  const BlockFeatures pinned{{11, 0, 0, 1, 3, 4, 6, 0}};
  EXPECT_EQ(f, pinned);
}

TEST(Fitness, HomogeneousSingleBasinScoresZero) {
  const auto set = makeSet(blocksOf(corpus(CorpusStyle::Apache, 4096, 5), 128));
  const auto rule = NlcaRule::elementary(128);
  ASSERT_FALSE(isLinear(rule));
  const auto a = assignBasins(rule, set);
  ASSERT_EQ(a.distinctAttractors, 1u);
  EXPECT_EQ(fitness(rule, set, 1), 0.0);
  EXPECT_LE(fitness(rule, set, 2), -1e6);
}

TEST(Fitness, MatchesDefinition) {
  const auto set = makeSet(twoStyleBlocks(6, 4096, 128));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const NlcaRule r(2, static_cast<std::uint32_t>(rng()));
    if (isLinear(r)) continue;
    // Recompute: group blocks by attractor, take each group's cheapest variant.
    std::map<std::uint64_t, std::vector<std::size_t>> groups;
    std::uint64_t unrouted = 0;
    const auto global = set.bestGlobalVariant();
    for (std::size_t b = 0; b < set.size(); ++b) {
      const auto att = findAttractor(set.features(b).toLattice(), r, kDefaultMaxSteps);
      if (att) {
        groups[att->bits()].push_back(b);
      } else {
        unrouted += set.cost(b, global);
      }
    }
    std::uint64_t routed = unrouted;
    for (const auto& [id, members] : groups) {
      std::uint64_t best = UINT64_MAX;
      for (int v = 0; v < 8; ++v) {
        std::uint64_t sum = 0;
        for (auto b : members) sum += set.cost(b, variantFromId(v));
        best = std::min(best, sum);
      }
      routed += best;
    }
    const double k = 4;
    const double expected = static_cast<double>(set.totalCost(global)) - static_cast<double>(routed) -
                            1e6 * std::max(0.0, k - static_cast<double>(groups.size()));
    if (groups.size() <= kMaxBasins) EXPECT_EQ(fitness(r, set, 4), expected) << r.table();
  }
}

TEST(TrainingSetTest, BestGlobalVariantIsCheapest) {
  const auto set = makeSet(twoStyleBlocks(7, 2048, 128));
  const auto best = set.bestGlobalVariant();
  for (int v = 0; v < 8; ++v) {
    EXPECT_LE(set.totalCost(best), set.totalCost(variantFromId(v)));
    if (v < best.id()) {
      EXPECT_LT(set.totalCost(best), set.totalCost(variantFromId(v)));
    }
  }
}

TEST(TrainingSetTest, LoadsFilesAndRejectsEmpty) {
  test::TempDir dir;
  test::writeFile(dir.file("a.log"), corpus(CorpusStyle::Apache, 1000, 1));
  test::writeFile(dir.file("b.log"), corpus(CorpusStyle::Syslog, 300, 1));
  test::writeFile(dir.file("empty.log"), "");
  const auto set = loadTrainingSet({dir.file("a.log"), dir.file("b.log")}, 256, BackendId::lz());
  EXPECT_EQ(set.size(), 4u + 2u);
  EXPECT_FALSE(set.dictionary().empty());
  try {
    loadTrainingSet({dir.file("empty.log")}, 256, BackendId::lz());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientTraining);
  }
  try {
    loadTrainingSet({dir.file("missing.log")}, 256, BackendId::lz());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
}

GaConfig smallGa(std::size_t pop, std::size_t gens, std::uint64_t seed) {
  GaConfig c;
  c.populationSize = pop;
  c.generations = gens;
  c.seed = seed;
  return c;
}

TEST(Train, ZeroGenerationsStillValid) {
  const auto set = makeSet(twoStyleBlocks(8, 2048, 128));
  const auto r = trainModel(set, smallGa(10, 0, 3), TrainOptions{2, 2, kDefaultMaxSteps});
  EXPECT_NO_THROW(r.model.validate());
  EXPECT_FALSE(isLinear(r.model.rule));
  EXPECT_EQ(r.curve.size(), 1u);
}

TEST(Train, FewerBlocksThanKIsInsufficient) {
  const auto set = makeSet(blocksOf(corpus(CorpusStyle::Apache, 100, 1), 128));
  try {
    trainModel(set, smallGa(4, 1, 1), TrainOptions{2, 2, kDefaultMaxSteps});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientTraining);
  }
}

class TwoStyleTraining : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    set_ = new TrainingSet(makeSet(twoStyleBlocks(21, 8192, 128)));
    result_ = new TrainResult(trainModel(*set_, smallGa(50, 30, 5), TrainOptions{2, 2, kDefaultMaxSteps}));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete set_;
  }
  static TrainingSet* set_;
  static TrainResult* result_;
};
TrainingSet* TwoStyleTraining::set_ = nullptr;
TrainResult* TwoStyleTraining::result_ = nullptr;

TEST_F(TwoStyleTraining, FindsSeveralBasinsAndGains) {
  const auto& m = result_->model;
  EXPECT_GE(m.basins.size(), 2u);
  EXPECT_GT(result_->fitness, 0.0);
  const auto a = assignBasins(m.rule, *set_, m.maxSteps);
  EXPECT_LE(a.routedBytes, set_->totalCost(set_->bestGlobalVariant()));
  EXPECT_EQ(m.defaultVariant, set_->bestGlobalVariant());
}

TEST_F(TwoStyleTraining, EachBasinVariantIsCheapestForItsBlocks) {
  const auto& m = result_->model;
  std::vector<std::array<std::uint64_t, 8>> sums(m.basins.size());
  for (std::size_t b = 0; b < set_->size(); ++b) {
    const auto c = classifyFeatures(set_->features(b), m);
    if (!c.basin) continue;
    for (int v = 0; v < 8; ++v) sums[*c.basin][static_cast<std::size_t>(v)] += set_->cost(b, variantFromId(v));
  }
  for (std::size_t q = 0; q < m.basins.size(); ++q) {
    const auto& s = sums[q];
    const auto best = static_cast<int>(std::min_element(s.begin(), s.end()) - s.begin());
    EXPECT_EQ(m.basins[q].variant.id(), best) << "basin " << q;
    const double rq = static_cast<double>(s[static_cast<std::size_t>(best)]) /
                      static_cast<double>(s[static_cast<std::size_t>(m.defaultVariant.id())]);
    EXPECT_DOUBLE_EQ(m.basins[q].quality, rq);
  }
}

TEST_F(TwoStyleTraining, StylesLandInDifferentBasins) {
  const auto& m = result_->model;
  const auto held = twoStyleBlocks(99, 4096, 128);
  const auto& dict = set_->dictionary();
  std::set<std::size_t> apache, syslog;
  const std::size_t half = held.size() / 2;
  for (std::size_t i = 0; i < held.size(); ++i) {
    const auto c = classifyBlock(held[i], dict, m);
    if (c.basin) (i < half ? apache : syslog).insert(*c.basin);
  }
  std::set<std::size_t> all = apache;
  all.insert(syslog.begin(), syslog.end());
  EXPECT_GE(all.size(), 2u);
}

TEST_F(TwoStyleTraining, SameSeedSameModel) {
  const auto again = trainModel(*set_, smallGa(50, 30, 5), TrainOptions{2, 2, kDefaultMaxSteps});
  EXPECT_EQ(again.model.serialize(), result_->model.serialize());
  ASSERT_EQ(again.curve.size(), result_->curve.size());
  for (std::size_t g = 0; g < again.curve.size(); ++g) EXPECT_EQ(again.curve[g].best, result_->curve[g].best);
}

TEST_F(TwoStyleTraining, EliteFitnessNeverDrops) {
  for (std::size_t g = 1; g < result_->curve.size(); ++g) {
    EXPECT_GE(result_->curve[g].best, result_->curve[g - 1].best);
  }
}

TEST_F(TwoStyleTraining, LogIndexAgreesWithDynamics) {
  const auto& m = result_->model;
  std::size_t agree = 0;
  for (std::size_t b = 0; b < set_->size(); ++b) {
    const auto ca = classifyFeatures(set_->features(b), m);
    const auto idx = m.index.lookup(set_->features(b));
    const std::uint8_t caBasin = ca.basin ? static_cast<std::uint8_t>(*ca.basin) : kNoBasin;
    agree += caBasin == idx;
  }
  EXPECT_GE(agree * 10, set_->size() * 9);
  // The deepest level holds the feature with the largest gain.
  std::vector<BlockFeatures> feats;
  std::vector<std::uint8_t> labels;
  for (std::size_t b = 0; b < set_->size(); ++b) {
    feats.push_back(set_->features(b));
    const auto c = classifyFeatures(feats.back(), m);
    labels.push_back(c.basin ? static_cast<std::uint8_t>(*c.basin) : kNoBasin);
  }
  const auto gains = featureGains(feats, labels);
  const double top = *std::max_element(gains.begin(), gains.end());
  EXPECT_EQ(gains[m.index.featureOrder.back()], top);
}

TEST_F(TwoStyleTraining, ModelRoundTripsThroughBytes) {
  const auto bytes = result_->model.serialize();
  ASSERT_EQ(asChars(ByteView(bytes).first(4)), "FLCM");
  const auto back = NlcaModel::deserialize(bytes);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_EQ(back.index, result_->model.index);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    Bytes bad = bytes;
    bad[i] ^= 0x40;
    try {
      NlcaModel::deserialize(bad);
      FAIL() << "byte " << i;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidModel);
    }
  }
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(NlcaModel::deserialize(ByteView(bytes.data(), n)), Error);
  }
}

TEST(Model, LinearRuleRejectedEvenWithValidCrc) {
  NlcaModel m;
  m.rule = NlcaRule(2, 0x12345678);
  ASSERT_FALSE(isLinear(m.rule));
  m.basins.push_back(Basin{LatticeConfig(32, 0), variantFromId(3), 1.0});
  m.defaultVariant = variantFromId(3);
  Bytes bytes = m.serialize();
  // magic(4) version(1) radius(1) then the 4-byte table; rule 90's radius-2
  // analogue x[-1] ^ x[+1] is linear.
  std::uint32_t linear = 0;
  for (unsigned k = 0; k < 32; ++k) linear |= static_cast<std::uint32_t>(((k >> 3) ^ (k >> 1)) & 1) << k;
  ASSERT_TRUE(isLinear(NlcaRule(2, linear)));
  for (int i = 0; i < 4; ++i) bytes[6 + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(linear >> (8 * i));
  bytes.resize(bytes.size() - 4);
  const std::uint32_t crc = crc32(bytes);
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  try {
    NlcaModel::deserialize(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidModel);
  }
  m.rule = NlcaRule(2, linear);
  EXPECT_THROW(m.validate(), Error);
}

TEST(Model, UnknownAttractorFallsBackToDefault) {
  NlcaModel m;
  m.rule = NlcaRule::elementary(128);
  m.basins.push_back(Basin{LatticeConfig(32, 0xFFFFFFFFu), variantFromId(1), 1.0});
  m.defaultVariant = variantFromId(6);
  BlockFeatures f;  // all zeros: rule 128 keeps it at zero, which is no basin here
  const auto c = classifyFeatures(f, m);
  EXPECT_FALSE(c.basin.has_value());
  EXPECT_EQ(c.variant.id(), 6);
  f.values.fill(15);
  const auto d = classifyFeatures(f, m);
  ASSERT_TRUE(d.basin.has_value());
  EXPECT_EQ(d.variant.id(), 1);
  // Rule 184 moves this lattice, so one step is not enough to see a repeat.
  m.rule = NlcaRule::elementary(184);
  m.maxSteps = 1;
  f.values = {1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_FALSE(classifyFeatures(f, m).basin.has_value());
}

TEST(LogIndex, SingleBasinModelMapsEverythingToZero) {
  const auto set = makeSet(blocksOf(corpus(CorpusStyle::Apache, 4096, 5), 128));
  NlcaModel m;
  m.rule = NlcaRule::elementary(128);
  const auto a = assignBasins(m.rule, set);
  m.basins = a.basins;
  m.defaultVariant = a.defaultVariant;
  ASSERT_EQ(m.basins.size(), 1u);
  m.index = buildLogIndex(m, set);
  ASSERT_FALSE(m.index.leaves.empty());
  for (const auto& [p, leaf] : m.index.leaves) EXPECT_EQ(leaf.basin, 0);
}

TEST(LogIndex, ConstantFeatureHasNoGain) {
  std::vector<BlockFeatures> f(4);
  f[0].values = {3, 1, 0, 0, 0, 0, 0, 0};
  f[1].values = {3, 1, 0, 0, 0, 0, 0, 0};
  f[2].values = {3, 2, 0, 0, 0, 0, 0, 0};
  f[3].values = {3, 2, 0, 0, 0, 0, 0, 0};
  const std::vector<std::uint8_t> labels{0, 0, 1, 1};
  const auto g = featureGains(f, labels);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_NEAR(g[1], 1.0, 1e-12);  // one full bit
}

TEST(GaConfigTest, Validation) {
  GaConfig c;
  EXPECT_NO_THROW(c.validate());
  c.populationSize = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GaConfig{};
  c.elitism = c.populationSize;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GaConfig{};
  c.mutationRate = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GaConfig{};
  c.crossoverRate = -0.1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Density, IdentityRuleIsPerfect) {
  EXPECT_EQ(evalDensityRule(NlcaRule::elementary(204), 59, 500, 1), 1.0);
  EXPECT_EQ(evalDensityRule(NlcaRule::elementary(0), 59, 500, 1) + evalDensityRule(NlcaRule::elementary(255), 59, 500, 1),
            1.0);
  EXPECT_THROW(evalDensityRule(NlcaRule::elementary(204), 58, 10, 1), std::invalid_argument);
}

TEST(Density, DeterministicPerSeed) {
  const NlcaRule r(2, 0xDEADBEEF);
  EXPECT_EQ(evalDensityRule(r, 59, 200, 9), evalDensityRule(r, 59, 200, 9));
  const auto a = trainDensityRule(smallGa(20, 5, 4), 59);
  const auto b = trainDensityRule(smallGa(20, 5, 4), 59);
  EXPECT_EQ(a.rule, b.rule);
  EXPECT_EQ(a.championAccuracy, b.championAccuracy);
}

TEST(Density, ChampionAccuracyNeverDrops) {
  const auto r = trainDensityRule(smallGa(30, 15, 8), 59);
  ASSERT_EQ(r.championAccuracy.size(), 16u);
  for (std::size_t g = 1; g < r.championAccuracy.size(); ++g) {
    EXPECT_GE(r.championAccuracy[g], r.championAccuracy[g - 1]);
  }
  EXPECT_EQ(r.rule.radius(), 2);
}

TEST(Evolve, ElitesCarryOver) {
  // Score = popcount of the table: the elite's score must never fall.
  std::vector<double> bests;
  evolveRules(smallGa(12, 20, 3), 2,
              [](std::size_t, const NlcaRule& r) { return static_cast<double>(__builtin_popcount(r.table())); },
              [&](std::size_t, const GaOutcome& o) { bests.push_back(*std::max_element(o.scores.begin(), o.scores.end())); });
  ASSERT_EQ(bests.size(), 21u);
  for (std::size_t g = 1; g < bests.size(); ++g) EXPECT_GE(bests[g], bests[g - 1]);
  EXPECT_GT(bests.back(), bests.front());
}

}  // namespace
}  // namespace flc
