#include "flc/bench.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <streambuf>

#include "flc/container.hpp"
#include "flc/error.hpp"

namespace flc {

namespace {

class CountingBuf : public std::streambuf {
 public:
  std::uint64_t count() const noexcept { return count_; }

 protected:
  int_type overflow(int_type ch) override {
    if (!traits_type::eq_int_type(ch, traits_type::eof())) ++count_;
    return traits_type::not_eof(ch);
  }
  std::streamsize xsputn(const char*, std::streamsize n) override {
    count_ += static_cast<std::uint64_t>(n);
    return n;
  }

 private:
  std::uint64_t count_ = 0;
};

std::ifstream openInput(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  return in;
}

std::uint64_t archived(const std::string& path, const WriteSettings& settings) {
  std::ifstream in = openInput(path);
  CountingBuf buf;
  std::ostream out(&buf);
  writeArchive(in, settings, out);
  return buf.count();
}

template <class F>
BenchRow measure(const std::string& corpus, std::string pipeline, std::uint64_t original, bool timing, F&& run) {
  BenchRow row;
  row.corpus = corpus;
  row.pipeline = std::move(pipeline);
  row.originalBytes = original;
  const auto start = std::chrono::steady_clock::now();
  try {
    row.compressedBytes = run();
  } catch (const Error& e) {
    if (e.code() != Errc::BackendError) throw;
    row.skipped = true;
  }
  if (timing && !row.skipped) {
    row.wallTimeMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

void appendFixed(std::string& out, std::int64_t value, std::int64_t scale, int digits) {
  char buf[64];
  const char* sign = value < 0 ? "-" : "";
  const std::uint64_t mag = value < 0 ? static_cast<std::uint64_t>(-value) : static_cast<std::uint64_t>(value);
  std::snprintf(buf, sizeof buf, "%s%" PRIu64 ".%0*" PRIu64, sign, mag / static_cast<std::uint64_t>(scale), digits,
                mag % static_cast<std::uint64_t>(scale));
  out += buf;
}

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

std::int64_t BenchRow::ratioMicros() const {
  if (originalBytes == 0) return 0;
  const auto num = static_cast<unsigned __int128>(compressedBytes) * 1000000u + originalBytes / 2;
  return static_cast<std::int64_t>(num / originalBytes);
}

std::vector<BenchRow> runBench(const std::vector<std::string>& corpusPaths, const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (const auto& path : corpusPaths) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw Error(Errc::IoError, "cannot stat '" + path + "': " + ec.message());
    const std::string corpus = std::filesystem::path(path).filename().string();

    for (const auto& backend : options.backends) {
      const std::string name = backend.toString();
      WriteSettings settings;
      settings.backend = backend;
      settings.blockLines = options.blockLines;
      settings.filters = options.filters;
      settings.transform = false;
      rows.push_back(measure(corpus, name, size, options.timing, [&] { return archived(path, settings); }));

      settings.transform = true;
      for (int v = 0; v < TransformVariant::kCount; ++v) {
        settings.variant = variantFromId(v);
        rows.push_back(measure(corpus, name + "+v" + std::to_string(v), size, options.timing,
                               [&] { return archived(path, settings); }));
      }
      if (options.model != nullptr) {
        settings.variant.reset();
        settings.model = options.model;
        rows.push_back(measure(corpus, name + "+auto", size, options.timing,
                               [&] { return archived(path, settings); }));
      }
    }
  }
  return rows;
}

void writeBenchCsv(const std::vector<BenchRow>& rows, std::ostream& out) {
  std::string text(kBenchCsvHeader);
  text += '\n';
  for (const auto& row : rows) {
    text += csvField(row.corpus);
    text += ',';
    text += csvField(row.pipeline);
    text += ',';
    text += std::to_string(row.originalBytes);
    text += ',';
    if (row.skipped) {
      text += "skipped,,,\n";
      continue;
    }
    text += std::to_string(row.compressedBytes);
    text += ',';
    const std::int64_t ratio = row.ratioMicros();
    appendFixed(text, ratio, 1000000, 6);
    text += ',';
    appendFixed(text, 1000000 - ratio, 10000, 4);
    text += ',';
    appendFixed(text, static_cast<std::int64_t>(row.wallTimeMs * 1000.0 + 0.5), 1000, 3);
    text += '\n';
  }
  out << text;
  if (!out) throw Error(Errc::IoError, "cannot write bench report");
}

}  // namespace flc
