#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "flc/backend.hpp"
#include "flc/classifier.hpp"

namespace flc {

struct BenchRow {
  std::string corpus;
  std::string pipeline;
  std::uint64_t originalBytes = 0;
  std::uint64_t compressedBytes = 0;
  double wallTimeMs = 0;
  bool skipped = false;

  /// compressed / original in millionths, rounded half up.
  std::int64_t ratioMicros() const;
};

struct BenchOptions {
  std::vector<BackendId> backends{BackendId::store(), BackendId::lz()};
  const NlcaModel* model = nullptr;
  std::uint32_t blockLines = 256;
  bool timing = true;
  const FilterRegistry* filters = nullptr;
};

/// For every corpus file and backend: the archive with untransformed blocks
/// (the backend alone plus container overhead), the archive under each fixed
/// variant, and the model-routed archive when a
/// model is given. Pipelines whose external filter is missing or fails are
/// reported as skipped. Rows are ordered by (corpus, pipeline) as listed.
std::vector<BenchRow> runBench(const std::vector<std::string>& corpusPaths, const BenchOptions& options);

inline constexpr std::string_view kBenchCsvHeader = "corpus,pipeline,original,compressed,ratio,compaction,ms";

/// ratio is printed with six decimals and compaction as 100 - 100 * ratio
/// from that printed value with four decimals, so the identity holds exactly.
void writeBenchCsv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace flc
