// flca: log-file archiver.
//
// Exit codes: 0 success, 1 usage, 2 I/O or insufficient training data,
// 3 corrupt input (archive or model), 4 external backend failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "flc/bench.hpp"
#include "flc/classifier.hpp"
#include "flc/container.hpp"
#include "flc/corpus.hpp"
#include "flc/error.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitCorrupt = 3;
constexpr int kExitBackend = 4;

int exitCodeFor(flc::Errc code) {
  switch (code) {
    case flc::Errc::InvalidVariant:
      return kExitUsage;
    case flc::Errc::IoError:
    case flc::Errc::InsufficientTraining:
      return kExitIo;
    case flc::Errc::BackendError:
      return kExitBackend;
    case flc::Errc::CorruptRecord:
    case flc::Errc::CorruptBlock:
    case flc::Errc::NotAnArchive:
    case flc::Errc::UnexpectedEof:
    case flc::Errc::InvalidModel:
    case flc::Errc::InternalError:
    case flc::Errc::RefuseExhaustive:
      return kExitCorrupt;
  }
  return kExitCorrupt;
}

// "-" selects stdin / stdout.
class Input {
 public:
  explicit Input(const std::string& path) {
    if (path == "-") return;
    file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file_) throw flc::Error(flc::Errc::IoError, "cannot open '" + path + "'");
  }
  std::istream& stream() { return file_ ? *file_ : std::cin; }

 private:
  std::unique_ptr<std::ifstream> file_;
};

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw flc::Error(flc::Errc::IoError, "cannot create '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

  void close() {
    if (!file_) {
      std::cout.flush();
      return;
    }
    file_->close();
    if (file_->fail()) throw flc::Error(flc::Errc::IoError, "cannot write '" + path_ + "'");
  }

  // Drops a partially written file.
  void discard() {
    if (!file_) return;
    file_.reset();
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

flc::Bytes readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw flc::Error(flc::Errc::IoError, "cannot open '" + path + "'");
  flc::Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw flc::Error(flc::Errc::IoError, "cannot read '" + path + "'");
  return data;
}

void writeFile(const std::string& path, flc::ByteView data) {
  Output out(path);
  out.stream().write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.close();
}

flc::NlcaModel loadModel(const std::string& path) { return flc::NlcaModel::deserialize(readFile(path)); }

std::string ratioText(std::uint64_t out, std::uint64_t in) {
  if (in == 0) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << static_cast<double>(out) / static_cast<double>(in);
  return s.str();
}

// Regular files directly inside `dir`, sorted by name.
std::vector<std::string> corpusFiles(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw flc::Error(flc::Errc::IoError, "'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  }
  if (ec) throw flc::Error(flc::Errc::IoError, "cannot list '" + dir + "': " + ec.message());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw flc::Error(flc::Errc::InsufficientTraining, "corpus directory '" + dir + "' is empty");
  return files;
}

struct CompressArgs {
  std::string in, out, model, variant, backend = "lz";
  std::uint32_t blockLines = flc::kDefaultBlockLines;
  bool noEmbed = false;
};

int runCompress(const CompressArgs& a) {
  flc::WriteSettings s;
  s.backend = flc::BackendId::parse(a.backend);
  s.blockLines = a.blockLines;
  s.embedModel = !a.noEmbed;

  std::optional<flc::NlcaModel> model;
  if (!a.model.empty()) model = loadModel(a.model);
  std::string variant = a.variant;
  if (variant.empty()) variant = model ? "auto" : "7";
  if (variant == "none") {
    s.transform = false;
  } else if (variant == "auto") {
    if (!model) throw std::invalid_argument("--variant auto needs --model");
    s.model = &*model;
  } else {
    int id = -1;
    try {
      std::size_t used = 0;
      id = std::stoi(variant, &used);
      if (used != variant.size()) id = -1;
    } catch (const std::exception&) {
    }
    s.variant = flc::variantFromId(id);
    if (model) s.model = &*model;  // embedded for reference only
  }

  Input in(a.in);
  Output out(a.out);
  flc::WriteSummary sum;
  try {
    sum = flc::writeArchive(in.stream(), s, out.stream());
    out.close();
  } catch (...) {
    out.discard();
    throw;
  }
  std::cerr << "compressed " << sum.inBytes << " -> " << sum.outBytes << " bytes (ratio "
            << ratioText(sum.outBytes, sum.inBytes) << ", " << sum.blocks << " blocks";
  if (!s.variant) {
    std::cerr << "; variants";
    for (int v = 0; v < flc::TransformVariant::kCount; ++v) {
      if (sum.variantBlocks[static_cast<std::size_t>(v)]) std::cerr << ' ' << v << ':' << sum.variantBlocks[static_cast<std::size_t>(v)];
    }
  }
  std::cerr << ")\n";
  return 0;
}

int runDecompress(const std::string& inPath, const std::string& outPath) {
  Input in(inPath);
  Output out(outPath);
  const flc::ReadSummary sum = flc::readArchive(in.stream(), out.stream());
  out.close();
  std::cerr << "decompressed " << sum.inBytes << " -> " << sum.outBytes << " bytes, " << sum.blocks << " blocks\n";
  return 0;
}

int runVerify(const std::string& inPath) {
  Input in(inPath);
  const flc::VerifyReport r = flc::verifyArchive(in.stream());
  if (r.ok) {
    std::cerr << "ok: " << r.blocks << " blocks verified\n";
    return 0;
  }
  std::cerr << "verify failed after " << r.blocks << " good blocks: " << r.firstError << '\n';
  return exitCodeFor(r.errorCode.value_or(flc::Errc::CorruptBlock));
}

struct TrainArgs {
  std::string corpus, backend = "lz", out;
  int k = flc::kDefaultBasinCount;
  int radius = 2;
  std::size_t pop = 50, gens = 30;
  std::uint64_t seed = 1;
  std::uint32_t blockLines = flc::kDefaultBlockLines;
};

int runTrain(const TrainArgs& a) {
  flc::GaConfig cfg;
  cfg.populationSize = a.pop;
  cfg.generations = a.gens;
  cfg.seed = a.seed;
  cfg.validate();
  flc::TrainOptions opts;
  opts.k = a.k;
  opts.radius = a.radius;

  const auto files = corpusFiles(a.corpus);
  const flc::TrainingSet training = flc::loadTrainingSet(files, a.blockLines, flc::BackendId::parse(a.backend));
  std::cerr << "training on " << training.size() << " blocks from " << files.size() << " files\n";
  const flc::TrainResult result = flc::trainModel(training, cfg, opts);
  writeFile(a.out, result.model.serialize());

  std::cout << "generation,best_fitness,mean_fitness\n";
  for (const auto& g : result.curve) {
    std::cout << g.generation << ',' << std::fixed << std::setprecision(1) << g.best << ',' << g.mean << '\n';
  }
  std::cout << "\nbasin,attractor,variant,blocks,r_q\n";
  for (std::size_t i = 0; i < result.model.basins.size(); ++i) {
    const auto& b = result.model.basins[i];
    std::cout << i << ',' << b.attractor.toString() << ',' << b.variant.id() << ',' << result.basinBlocks[i] << ','
              << std::setprecision(6) << b.quality << '\n';
  }
  if (result.distinctAttractors < static_cast<std::size_t>(a.k)) {
    std::cerr << "warning: only " << result.distinctAttractors << " distinct attractors for k=" << a.k
              << "; fitness carries a penalty of " << std::setprecision(0)
              << flc::kBasinPenalty * static_cast<double>(static_cast<std::size_t>(a.k) - result.distinctAttractors)
              << '\n';
  }
  std::cerr << "model written to " << a.out << " (" << result.model.basins.size() << " basins, default variant "
            << result.model.defaultVariant.id() << ")\n";
  return 0;
}

struct BenchArgs {
  std::vector<std::string> corpus;
  std::string backends = "store,lz", model, report = "-";
  std::uint32_t blockLines = flc::kDefaultBlockLines;
  bool noTiming = false;
};

int runBenchCmd(const BenchArgs& a) {
  flc::BenchOptions opts;
  opts.backends.clear();
  std::stringstream list(a.backends);
  for (std::string item; std::getline(list, item, ',');) {
    if (!item.empty()) opts.backends.push_back(flc::BackendId::parse(item));
  }
  if (opts.backends.empty()) throw std::invalid_argument("--backends is empty");
  std::optional<flc::NlcaModel> model;
  if (!a.model.empty()) {
    model = loadModel(a.model);
    opts.model = &*model;
  }
  opts.blockLines = a.blockLines;
  opts.timing = !a.noTiming;
  const flc::FilterRegistry filters = flc::FilterRegistry::fromEnvironment();
  opts.filters = &filters;

  const auto rows = flc::runBench(a.corpus, opts);
  for (const auto& r : rows) {
    if (r.skipped) std::cerr << "skipped " << r.corpus << ' ' << r.pipeline << ": backend unavailable\n";
  }
  Output out(a.report);
  flc::writeBenchCsv(rows, out.stream());
  out.close();
  return 0;
}

struct GenArgs {
  std::string style = "apache", out = "-";
  std::uint64_t lines = 0, seed = 1;
};

int runGen(const GenArgs& a) {
  flc::CorpusSpec spec;
  spec.style = flc::parseCorpusStyle(a.style);
  spec.lines = a.lines;
  spec.seed = a.seed;
  Output out(a.out);
  flc::generateCorpus(spec, out.stream());
  out.close();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);

  CLI::App app{"flca: lossless log-file compressor"};
  app.require_subcommand(1);

  CompressArgs ca;
  auto* compress = app.add_subcommand("compress", "Compress a log file into an archive");
  compress->add_option("--model", ca.model, "Trained .flcm model")->check(CLI::ExistingFile);
  compress->add_option("--variant", ca.variant, "Transform variant 0..7, auto, or none (default: auto with a model, else 7)");
  compress->add_option("--backend", ca.backend, "store, lz or ext:NAME")->capture_default_str();
  compress->add_option("--block-lines", ca.blockLines, "Lines per block")->capture_default_str()
      ->check(CLI::PositiveNumber);
  compress->add_flag("--no-embed", ca.noEmbed, "Do not embed the model in the archive");
  compress->add_option("IN", ca.in, "Input log file or -")->required();
  compress->add_option("OUT", ca.out, "Output archive or -")->required();

  std::string dIn, dOut;
  auto* decompress = app.add_subcommand("decompress", "Restore the original bytes of an archive");
  decompress->add_option("IN", dIn, "Archive or -")->required();
  decompress->add_option("OUT", dOut, "Output file or -")->required();

  std::string vIn;
  auto* verify = app.add_subcommand("verify", "Check every block of an archive");
  verify->add_option("IN", vIn, "Archive or -")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a block classifier model");
  train->add_option("--corpus", ta.corpus, "Directory of training logs")->required();
  train->add_option("--k", ta.k, "Target number of basins")->capture_default_str()->check(CLI::Range(1, 255));
  train->add_option("--pop", ta.pop, "Population size")->capture_default_str();
  train->add_option("--gens", ta.gens, "Generations")->capture_default_str();
  train->add_option("--seed", ta.seed, "GA seed")->capture_default_str();
  train->add_option("--backend", ta.backend, "Backend used to score variants")->capture_default_str();
  train->add_option("--radius", ta.radius, "Rule radius")->capture_default_str()->check(CLI::Range(1, 2));
  train->add_option("--block-lines", ta.blockLines, "Lines per training block")->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("-o,--output", ta.out, "Model file to write")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Compression report over corpus files");
  bench->add_option("--corpus", ba.corpus, "Corpus files")->required()->check(CLI::ExistingFile);
  bench->add_option("--backends", ba.backends, "Comma-separated backends")->capture_default_str();
  bench->add_option("--model", ba.model, "Model for the auto pipeline")->check(CLI::ExistingFile);
  bench->add_option("--block-lines", ba.blockLines, "Lines per block")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--report", ba.report, "CSV output or -")->capture_default_str();
  bench->add_flag("--no-timing", ba.noTiming, "Write 0 in the ms column");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic log corpus");
  gen->add_option("--style", ga.style, "apache, syslog or mixed")->capture_default_str()
      ->check(CLI::IsMember({"apache", "syslog", "mixed"}));
  gen->add_option("--lines", ga.lines, "Number of lines")->capture_default_str();
  gen->add_option("--seed", ga.seed, "Seed")->capture_default_str();
  gen->add_option("-o,--output", ga.out, "Output file or -")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*compress) return runCompress(ca);
    if (*decompress) return runDecompress(dIn, dOut);
    if (*verify) return runVerify(vIn);
    if (*train) return runTrain(ta);
    if (*bench) return runBenchCmd(ba);
    if (*gen) return runGen(ga);
  } catch (const flc::Error& e) {
    std::cerr << "flca: " << flc::errcName(e.code()) << ": " << e.what() << '\n';
    return exitCodeFor(e.code());
  } catch (const std::invalid_argument& e) {
    std::cerr << "flca: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "flca: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
