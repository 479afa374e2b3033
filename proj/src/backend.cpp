#include "flc/backend.hpp"

#include <fcntl.h>
#include <pthread.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <thread>

extern char** environ;

namespace flc {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

const FilterCommand& resolve(const std::string& name, const FilterRegistry* filters, FilterRegistry& scratch) {
  if (filters == nullptr) {
    scratch = FilterRegistry::fromEnvironment();
    filters = &scratch;
  }
  const FilterCommand* cmd = filters->find(name);
  if (cmd == nullptr) throw Error::backend(-1, "external filter '" + name + "' is not configured");
  return *cmd;
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

}  // namespace

BackendId BackendId::external(std::string name) {
  if (name.empty()) throw std::invalid_argument("external backend needs a name");
  return {Kind::External, lower(name)};
}

BackendId BackendId::parse(std::string_view text) {
  if (text == "store") return store();
  if (text == "lz") return lz();
  if (text.starts_with("ext:")) return external(std::string(text.substr(4)));
  throw std::invalid_argument("unknown backend '" + std::string(text) + "' (expected store, lz or ext:NAME)");
}

std::string BackendId::toString() const {
  switch (kind) {
    case Kind::Store: return "store";
    case Kind::Lz: return "lz";
    case Kind::External: return "ext:" + name;
  }
  return "?";
}

FilterRegistry FilterRegistry::fromEnvironment() {
  constexpr std::string_view kPrefix = "FLCA_EXT_";
  std::map<std::string, std::string> comp, decomp;
  for (char** env = environ; env && *env; ++env) {
    const std::string_view entry(*env);
    const std::size_t eq = entry.find('=');
    if (eq == std::string_view::npos || !entry.starts_with(kPrefix)) continue;
    const std::string_view key = entry.substr(kPrefix.size(), eq - kPrefix.size());
    const std::string value(entry.substr(eq + 1));
    if (key.size() > 2 && key.ends_with("_C")) comp[lower(key.substr(0, key.size() - 2))] = value;
    if (key.size() > 2 && key.ends_with("_D")) decomp[lower(key.substr(0, key.size() - 2))] = value;
  }
  FilterRegistry reg;
  for (auto& [name, c] : comp) {
    const auto it = decomp.find(name);
    if (it != decomp.end()) reg.add(name, FilterCommand{c, it->second});
  }
  return reg;
}

void FilterRegistry::add(std::string name, FilterCommand cmd) { filters_[lower(name)] = std::move(cmd); }

const FilterCommand* FilterRegistry::find(std::string_view name) const {
  const auto it = filters_.find(lower(name));
  return it == filters_.end() ? nullptr : &it->second;
}

CompressedBlock compressBlock(ByteView data, const BackendId& backend, const FilterRegistry* filters) {
  if (data.size() >= (std::uint64_t{1} << 32)) throw std::invalid_argument("block larger than 4 GiB");
  CompressedBlock out{backend, data.size(), {}};
  switch (backend.kind) {
    case BackendId::Kind::Store:
      out.payload.assign(data.begin(), data.end());
      break;
    case BackendId::Kind::Lz:
      out.payload = lz::compress(data);
      break;
    case BackendId::Kind::External: {
      FilterRegistry scratch;
      out.payload = runFilter(resolve(backend.name, filters, scratch).compress, data);
      break;
    }
  }
  return out;
}

Bytes decompressBlock(const CompressedBlock& block, const FilterRegistry* filters) {
  Bytes out;
  switch (block.backend.kind) {
    case BackendId::Kind::Store:
      out = block.payload;
      break;
    case BackendId::Kind::Lz:
      return lz::decompress(block.payload, static_cast<std::size_t>(block.originalLen));
    case BackendId::Kind::External: {
      FilterRegistry scratch;
      out = runFilter(resolve(block.backend.name, filters, scratch).decompress, block.payload);
      break;
    }
  }
  if (out.size() != block.originalLen) throw Error(Errc::CorruptBlock, "decompressed length mismatch");
  return out;
}

Bytes runFilter(const std::string& command, ByteView input) {
  int inPipe[2], outPipe[2];
  if (::pipe2(inPipe, O_CLOEXEC) != 0) throw Error::backend(-1, "pipe: " + std::string(std::strerror(errno)));
  if (::pipe2(outPipe, O_CLOEXEC) != 0) {
    ::close(inPipe[0]);
    ::close(inPipe[1]);
    throw Error::backend(-1, "pipe: " + std::string(std::strerror(errno)));
  }
  Fd childIn(inPipe[0]), toChild(inPipe[1]), fromChild(outPipe[0]), childOut(outPipe[1]);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error::backend(-1, "fork: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::dup2(childIn.get(), STDIN_FILENO);
    ::dup2(childOut.get(), STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  childIn.reset();
  childOut.reset();

  // The child may exit before draining its input; block SIGPIPE in the
  // feeding thread so the write fails with EPIPE instead.
  std::thread feeder([&toChild, input] {
    sigset_t mask;
    sigemptyset(&mask);
    sigaddset(&mask, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &mask, nullptr);
    std::size_t off = 0;
    while (off < input.size()) {
      const ssize_t n = ::write(toChild.get(), input.data() + off, input.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      off += static_cast<std::size_t>(n);
    }
    toChild.reset();
  });

  Bytes out;
  std::uint8_t buf[65536];
  while (true) {
    const ssize_t n = ::read(fromChild.get(), buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    out.insert(out.end(), buf, buf + n);
  }
  feeder.join();

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (code != 0) throw Error::backend(code, "external filter '" + command + "' exited with status " + std::to_string(code));
  return out;
}

}  // namespace flc
