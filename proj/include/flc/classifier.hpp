#pragma once

// Block classifier: quantized block features feed a 32-cell non-linear CA
// whose attractor selects a transform variant. Rules are evolved by a
// genetic algorithm whose fitness is the compression gained by routing.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flc/backend.hpp"
#include "flc/nlca.hpp"
#include "flc/tokenizer.hpp"
#include "flc/transform.hpp"

namespace flc {

enum class Feature : std::uint8_t {
  TokenMatchRate,
  PrefixSimilarityRate,
  TimestampRate,
  Ipv4Rate,
  DecimalRate,
  DictionaryHitRate,
  MeanLineLength,
  TokenCountVariance,
};

inline constexpr int kFeatureCount = 8;
inline constexpr int kModelLatticeLength = 4 * kFeatureCount;
inline constexpr int kDefaultMaxSteps = 4 * kModelLatticeLength;
inline constexpr int kDefaultBasinCount = 4;
inline constexpr std::uint8_t kNoBasin = 0xFF;
inline constexpr std::size_t kMaxBasins = 255;

struct BlockFeatures {
  std::array<std::uint8_t, kFeatureCount> values{};  // each 0..15

  std::uint8_t operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  /// Feature 0 occupies cells 0..3, most significant bit first.
  LatticeConfig toLattice() const;

  friend bool operator==(const BlockFeatures&, const BlockFeatures&) = default;
};

/// Rates are computed over non-separator tokens and quantized as
/// min(15, floor(16 * rate)); the two size features as min(15, floor(log2(x + 1))).
/// Throws std::invalid_argument for an empty block.
BlockFeatures extractFeatures(std::span<const TokenizedLine> block, const TokenDictionary& dict);

struct Basin {
  AttractorId attractor;
  TransformVariant variant;
  double quality = 1.0;  // R_q: bytes under own variant / bytes under global best variant
};

/// Feature-ordered lookup structure over training blocks. featureOrder runs
/// root to leaf, so the most discriminative feature sits at the bottom.
struct LogIndexTree {
  struct Leaf {
    std::uint8_t basin = kNoBasin;
    std::uint32_t count = 0;
    friend bool operator==(const Leaf&, const Leaf&) = default;
  };

  std::array<std::uint8_t, kFeatureCount> featureOrder{0, 1, 2, 3, 4, 5, 6, 7};
  std::map<std::uint32_t, Leaf> leaves;  // packed feature path -> majority basin

  std::uint32_t path(const BlockFeatures& f) const;
  /// Exact leaf when the path was seen in training, otherwise the majority
  /// basin under the deepest matching prefix. kNoBasin when the tree is empty.
  std::uint8_t lookup(const BlockFeatures& f) const;

  friend bool operator==(const LogIndexTree&, const LogIndexTree&) = default;
};

struct NlcaModel {
  NlcaRule rule;
  int latticeLength = kModelLatticeLength;
  std::vector<Basin> basins;
  TransformVariant defaultVariant;
  int maxSteps = kDefaultMaxSteps;
  LogIndexTree index;

  std::optional<std::size_t> basinOf(const AttractorId& a) const;

  /// Throws Error(InvalidModel) when an invariant fails.
  void validate() const;

  Bytes serialize() const;
  /// Throws Error(InvalidModel) on bad magic, version, CRC or invariants.
  static NlcaModel deserialize(ByteView data);
};

struct Classification {
  std::optional<std::size_t> basin;
  TransformVariant variant;
};

Classification classifyFeatures(const BlockFeatures& f, const NlcaModel& m);
Classification classifyBlock(std::span<const TokenizedLine> block, const TokenDictionary& dict, const NlcaModel& m);
/// Same routing through the LOG INDEX tree instead of the CA dynamics.
Classification classifyBlockIndexed(std::span<const TokenizedLine> block, const TokenDictionary& dict,
                                    const NlcaModel& m);

struct GaConfig {
  std::size_t populationSize = 50;
  std::size_t generations = 30;
  double crossoverRate = 0.9;
  double mutationRate = 0.05;
  std::size_t elitism = 2;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Training blocks with their features and the backend-compressed size of
/// every block under every variant. Sizes do not depend on the rule, so they
/// are computed once.
class TrainingSet {
 public:
  TrainingSet(std::vector<std::vector<TokenizedLine>> blocks, TokenDictionary dict, const BackendId& backend,
              const FilterRegistry* filters = nullptr);

  std::size_t size() const noexcept { return features_.size(); }
  const TokenDictionary& dictionary() const noexcept { return dict_; }
  const BlockFeatures& features(std::size_t i) const { return features_.at(i); }
  std::uint64_t cost(std::size_t block, TransformVariant v) const {
    return costs_.at(block)[static_cast<std::size_t>(v.id())];
  }
  std::uint64_t totalCost(TransformVariant v) const;
  /// Cheapest single variant over all blocks (ties: lower id).
  TransformVariant bestGlobalVariant() const;

 private:
  TokenDictionary dict_;
  std::vector<BlockFeatures> features_;
  std::vector<std::array<std::uint64_t, TransformVariant::kCount>> costs_;
};

/// Reads each file as LF-separated lines cut into blocks of `blockLines`
/// (a file's last block may be short) and builds the dictionary from the
/// first lines across all files, as the archive writer does. Throws
/// Error(IoError) for unreadable files and Error(InsufficientTraining) when
/// no lines are found.
TrainingSet loadTrainingSet(const std::vector<std::string>& paths, std::uint32_t blockLines,
                            const BackendId& backend, const FilterRegistry* filters = nullptr);

/// Routing of training blocks implied by a rule: blocks grouped by attractor,
/// capped at 255 basins (largest groups first), each basin assigned its
/// cheapest variant.
struct BasinAssignment {
  std::vector<Basin> basins;                    // ordered by attractor id
  std::vector<std::size_t> basinBlocks;         // training blocks per basin
  std::vector<std::uint8_t> blockBasin;         // per block, kNoBasin if unrouted
  std::size_t distinctAttractors = 0;           // before the cap
  TransformVariant defaultVariant;
  std::uint64_t routedBytes = 0;                // total size under the routing
  std::uint64_t globalBestBytes = 0;
};

BasinAssignment assignBasins(const NlcaRule& r, const TrainingSet& training, int maxSteps = kDefaultMaxSteps);

inline constexpr double kBasinPenalty = 1e6;

/// (bytes under the best single variant - bytes under per-basin variants)
/// - 1e6 * max(0, k - distinct attractors observed). Higher is better.
double fitness(const NlcaRule& r, const TrainingSet& training, int k, int maxSteps = kDefaultMaxSteps);

struct TrainOptions {
  int k = kDefaultBasinCount;
  int radius = 2;
  int maxSteps = kDefaultMaxSteps;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best = 0;
  double mean = 0;
};

struct TrainResult {
  NlcaModel model;
  double fitness = 0;
  std::size_t distinctAttractors = 0;
  std::vector<std::size_t> basinBlocks;
  std::vector<GenerationStats> curve;
};

/// Throws Error(InsufficientTraining) when there are fewer than k blocks or
/// no rule reaches an attractor.
TrainResult trainModel(const TrainingSet& training, const GaConfig& cfg, const TrainOptions& opts = {});

LogIndexTree buildLogIndex(const NlcaModel& m, const TrainingSet& training);

/// Information gain of each feature with respect to the given block labels.
std::array<double, kFeatureCount> featureGains(std::span<const BlockFeatures> features,
                                               std::span<const std::uint8_t> labels);

/// Fraction of `trials` random initial configurations whose majority the
/// rule preserves after 2n steps (final majority read as the prediction).
/// Requires odd n.
double evalDensityRule(const NlcaRule& r, int n, std::size_t trials, std::uint64_t seed);

struct DensityTrainResult {
  NlcaRule rule;
  std::vector<double> championAccuracy;  // per generation, on a fixed validation set
};

inline constexpr std::size_t kDensityTrialsPerGeneration = 100;

/// GA over radius-2 rules with fitness evalDensityRule on fresh ICs each
/// generation.
DensityTrainResult trainDensityRule(const GaConfig& cfg, int n);

/// Generic GA over rule tables used by both training tasks. `score` is called
/// as score(generation, rule) and must be deterministic for a given pair.
struct GaOutcome {
  std::vector<NlcaRule> population;  // final generation, best first
  std::vector<double> scores;
  std::vector<GenerationStats> curve;
};

GaOutcome evolveRules(const GaConfig& cfg, int radius,
                      const std::function<double(std::size_t, const NlcaRule&)>& score,
                      const std::function<void(std::size_t, const GaOutcome&)>& onGeneration = {});

}  // namespace flc
