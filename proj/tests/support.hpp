#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace flc::test {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "flc-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void writeFile(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

struct CommandResult {
  int status = -1;
  std::string out;
  std::string err;
};

inline std::string shellQuote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

// Runs `args` through /bin/sh with stdout and stderr captured to files in `dir`.
inline CommandResult run(const std::vector<std::string>& args, const TempDir& dir, const std::string& env = {}) {
  std::string cmd = env.empty() ? "" : env + " ";
  for (const auto& a : args) cmd += shellQuote(a) + " ";
  const std::string outPath = dir.file(".stdout");
  const std::string errPath = dir.file(".stderr");
  cmd += ">" + shellQuote(outPath) + " 2>" + shellQuote(errPath);
  const int raw = std::system(cmd.c_str());
  CommandResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = readFile(outPath);
  r.err = readFile(errPath);
  return r;
}

// Random line material: mostly printable log-ish bytes with occasional raw
// binary, tabs and runs of spaces.
inline std::string randomLineContent(std::mt19937_64& rng, std::size_t maxLen) {
  static const std::string alphabet = "abcXYZ0123456789.:-/T[]=\"_ \t";
  std::uniform_int_distribution<std::size_t> lenDist(0, maxLen);
  const std::size_t len = lenDist(rng);
  std::string s;
  s.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    const auto pick = rng() % 10;
    char c;
    if (pick == 0) {
      c = static_cast<char>(rng() % 256);
    } else {
      c = alphabet[rng() % alphabet.size()];
    }
    if (c == '\n') c = 'n';
    s += c;
  }
  return s;
}

// A multi-line document mixing LF, CRLF and stray CR, with or without a
// final terminator.
inline std::string randomDocument(std::mt19937_64& rng, std::size_t maxLines, std::size_t maxLineLen) {
  std::string doc;
  const std::size_t lines = rng() % (maxLines + 1);
  for (std::size_t i = 0; i < lines; ++i) {
    doc += randomLineContent(rng, maxLineLen);
    const auto t = rng() % 8;
    if (t == 0) {
      doc += "\r\n";
    } else if (t == 1) {
      doc += "\r\r\n";
    } else {
      doc += "\n";
    }
  }
  if (!doc.empty() && rng() % 3 == 0) doc.pop_back();
  if (rng() % 4 == 0) doc += randomLineContent(rng, maxLineLen);
  return doc;
}

}  // namespace flc::test
