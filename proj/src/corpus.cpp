#include "flc/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "flc/rng.hpp"
#include "temporal.hpp"

namespace flc {

namespace {

constexpr std::array<const char*, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                 "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

// Inverse-CDF sampler over ranks 0..n-1 with P(k) proportional to 1/(k+1)^s.
class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double total = 0;
    for (std::size_t k = 0; k < n; ++k) {
      total += 1.0 / std::pow(static_cast<double>(k + 1), s);
      cdf_[k] = total;
    }
    for (auto& c : cdf_) c /= total;
  }

  std::size_t operator()(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

template <class T, std::size_t N>
const T& pick(const std::array<T, N>& items, Rng& rng) {
  return items[rng.below(N)];
}

std::string randomIp(Rng& rng) {
  std::string ip = std::to_string(1 + rng.below(223));
  for (int i = 0; i < 3; ++i) ip += '.' + std::to_string(rng.below(256));
  return ip;
}

void append2(std::string& out, unsigned v) {
  out += static_cast<char>('0' + v / 10 % 10);
  out += static_cast<char>('0' + v % 10);
}

// Wall clock shared by both styles: seconds since the epoch.
struct Clock {
  std::int64_t now = 0;

  void advance(Rng& rng, int maxStep) {
    const double u = rng.uniform();
    if (u < 0.55) return;
    now += u < 0.85 ? 1 : 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(maxStep)));
  }

  void civil(std::int64_t& y, unsigned& mo, unsigned& d, unsigned& h, unsigned& mi, unsigned& s) const {
    const std::int64_t days = now / detail::kSecondsPerDay;
    const auto secs = static_cast<unsigned>(now % detail::kSecondsPerDay);
    detail::civilFromDays(days, y, mo, d);
    h = secs / 3600;
    mi = secs / 60 % 60;
    s = secs % 60;
  }
};

class ApacheSource {
 public:
  explicit ApacheSource(std::uint64_t seed) : rng_(Rng::stream(seed, 0xA9AC4E)), ipRank_(2000, 1.1),
                                               pathRank_(600, 1.05), userRank_(24, 1.3) {
    clock_.now = detail::daysFromCivil(2024, 3, 17) * detail::kSecondsPerDay +
                 static_cast<std::int64_t>(rng_.below(86400));
    for (int i = 0; i < 2000; ++i) ips_.push_back(randomIp(rng_));
    static constexpr std::array<const char*, 8> kTop = {"static", "images", "api", "blog",
                                                        "docs", "assets", "products", "user"};
    static constexpr std::array<const char*, 10> kLeaf = {"index", "main", "logo", "style", "app",
                                                          "search", "list", "detail", "feed", "item"};
    static constexpr std::array<const char*, 6> kExt = {".html", ".css", ".js", ".png", ".json", ".gif"};
    for (int i = 0; i < 600; ++i) {
      std::string path = "/" + std::string(pick(kTop, rng_));
      if (rng_.chance(0.6)) path += "/v" + std::to_string(1 + rng_.below(3));
      path += "/" + std::string(pick(kLeaf, rng_));
      if (rng_.chance(0.3)) path += "_" + std::to_string(rng_.below(1000));
      path += pick(kExt, rng_);
      paths_.push_back(path);
      sizes_.push_back(200 + rng_.below(60000));
    }
    static constexpr std::array<const char*, 24> kUsers = {
        "alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy", "mallory", "niaj",
        "olivia", "peggy", "rupert", "sybil", "trent", "victor", "walter", "yolanda", "zoe", "quinn", "ursula", "xavier"};
    users_.assign(kUsers.begin(), kUsers.end());
  }

  // Requests come in client sessions: one address and user issuing a short
  // burst, occasionally interleaved with a stray request from elsewhere.
  void next(std::string& out) {
    if (remaining_ == 0) {
      session_.ip = ipRank_(rng_);
      session_.user = rng_.chance(0.85) ? kAnonymous : userRank_(rng_);
      session_.http10 = rng_.chance(0.08);
      remaining_ = 1 + rng_.below(12);
      clock_.advance(rng_, 6);
    } else if (rng_.chance(0.6)) {
      clock_.now += rng_.chance(0.7) ? 0 : 1;
    }
    Session s = session_;
    if (rng_.chance(0.1)) {
      s.ip = ipRank_(rng_);
      s.user = kAnonymous;
    } else {
      --remaining_;
    }

    const std::size_t path = pathRank_(rng_);
    out += ips_[s.ip];
    out += " - ";
    out += s.user == kAnonymous ? "-" : users_[s.user];
    out += " [";
    std::int64_t y;
    unsigned mo, d, h, mi, sec;
    clock_.civil(y, mo, d, h, mi, sec);
    append2(out, d);
    out += '/';
    out += kMonths[mo - 1];
    out += '/';
    out += std::to_string(y);
    out += ':';
    append2(out, h);
    out += ':';
    append2(out, mi);
    out += ':';
    append2(out, sec);
    out += " +0000] \"";
    const double m = rng_.uniform();
    out += m < 0.86 ? "GET " : (m < 0.96 ? "POST " : "HEAD ");
    out += paths_[path];
    out += s.http10 ? " HTTP/1.0\" " : " HTTP/1.1\" ";
    const double st = rng_.uniform();
    if (st < 0.80) {
      out += "200 ";
      out += std::to_string(rng_.chance(0.9) ? sizes_[path] : 100 + rng_.below(100000));
    } else if (st < 0.88) {
      out += "304 -";
    } else if (st < 0.94) {
      out += "404 209";
    } else if (st < 0.97) {
      out += "301 235";
    } else if (st < 0.99) {
      out += "500 527";
    } else {
      out += "403 199";
    }
    out += '\n';
  }

 private:
  static constexpr std::size_t kAnonymous = ~std::size_t{0};

  struct Session {
    std::size_t ip = 0;
    std::size_t user = kAnonymous;
    bool http10 = false;
  };

  Rng rng_;
  Clock clock_;
  Zipf ipRank_, pathRank_, userRank_;
  Session session_;
  std::uint64_t remaining_ = 0;
  std::vector<std::string> ips_, paths_, users_;
  std::vector<std::uint64_t> sizes_;
};

class SyslogSource {
 public:
  explicit SyslogSource(std::uint64_t seed) : rng_(Rng::stream(seed, 0x5E5106)), ipRank_(300, 1.2) {
    clock_.now = detail::daysFromCivil(2024, 3, 7) * detail::kSecondsPerDay +
                 static_cast<std::int64_t>(rng_.below(86400));
    for (int i = 0; i < 300; ++i) ips_.push_back(randomIp(rng_));
    for (auto& pid : pids_) pid = 300 + rng_.below(30000);
    uptime_ = 1000 + rng_.below(100000);
  }

  void next(std::string& out) {
    clock_.advance(rng_, 30);
    std::int64_t y;
    unsigned mo, d, h, mi, s;
    clock_.civil(y, mo, d, h, mi, s);
    out += kMonths[mo - 1];
    out += ' ';
    out += d < 10 ? ' ' : static_cast<char>('0' + d / 10);
    out += static_cast<char>('0' + d % 10);
    out += ' ';
    append2(out, h);
    out += ':';
    append2(out, mi);
    out += ':';
    append2(out, s);
    static constexpr std::array<const char*, 3> kHosts = {"web01", "web02", "db01"};
    out += ' ';
    out += kHosts[rng_.chance(0.7) ? 0 : 1 + rng_.below(2)];
    out += ' ';

    static constexpr std::array<const char*, 8> kUsers = {"root", "admin", "deploy", "ubuntu",
                                                          "git", "backup", "test", "oracle"};
    const double app = rng_.uniform();
    if (app < 0.45) {
      out += "sshd[" + pid(0) + "]: ";
      const std::string ip = ips_[ipRank_(rng_)];
      const std::string port = std::to_string(30000 + rng_.below(35000));
      const double k = rng_.uniform();
      if (k < 0.4) {
        out += "Failed password for invalid user " + std::string(pick(kUsers, rng_)) + " from " + ip + " port " +
               port + " ssh2";
      } else if (k < 0.7) {
        out += "Accepted publickey for " + std::string(pick(kUsers, rng_)) + " from " + ip + " port " + port + " ssh2";
      } else {
        out += "Connection closed by " + ip + " port " + port + " [preauth]";
      }
    } else if (app < 0.60) {
      out += "CRON[" + pid(1) + "]: (root) CMD (run-parts /etc/cron.hourly)";
    } else if (app < 0.75) {
      uptime_ += rng_.below(5000000);
      char buf[32];
      std::snprintf(buf, sizeof buf, "[%llu.%06llu]", static_cast<unsigned long long>(uptime_ / 1000000),
                    static_cast<unsigned long long>(uptime_ % 1000000));
      static constexpr std::array<const char*, 4> kKernel = {
          "eth0: link up, 1000Mbps, full-duplex", "EXT4-fs (sda1): re-mounted. Opts: errors=remount-ro",
          "TCP: request_sock_TCP: Possible SYN flooding on port 80. Sending cookies.",
          "audit: type=1400 audit: apparmor=\"STATUS\" operation=\"profile_load\""};
      out += "kernel: ";
      out += buf;
      out += ' ';
      out += pick(kKernel, rng_);
    } else if (app < 0.88) {
      out += "systemd[1]: ";
      if (rng_.chance(0.5)) {
        out += "Started Session " + std::to_string(++session_) + " of user " + pick(kUsers, rng_) + ".";
      } else {
        out += "Starting Daily apt upgrade and clean activities...";
      }
    } else {
      out += "postfix/smtpd[" + pid(2) + "]: ";
      out += rng_.chance(0.5) ? "connect from unknown[" : "disconnect from unknown[";
      out += ips_[ipRank_(rng_)];
      out += ']';
    }
    out += '\n';
  }

 private:
  std::string pid(std::size_t app) {
    if (rng_.chance(0.2)) pids_[app] = 300 + rng_.below(30000);
    return std::to_string(pids_[app]);
  }

  Rng rng_;
  Clock clock_;
  Zipf ipRank_;
  std::vector<std::string> ips_;
  std::array<std::uint64_t, 3> pids_{};
  std::uint64_t uptime_ = 0;
  std::uint64_t session_ = 100;
};

}  // namespace

CorpusStyle parseCorpusStyle(std::string_view name) {
  if (name == "apache") return CorpusStyle::Apache;
  if (name == "syslog") return CorpusStyle::Syslog;
  if (name == "mixed") return CorpusStyle::Mixed;
  throw std::invalid_argument("unknown corpus style '" + std::string(name) + "'");
}

std::string_view corpusStyleName(CorpusStyle s) noexcept {
  switch (s) {
    case CorpusStyle::Apache: return "apache";
    case CorpusStyle::Syslog: return "syslog";
    case CorpusStyle::Mixed: return "mixed";
  }
  return "?";
}

struct CorpusGenerator::Impl {
  explicit Impl(const CorpusSpec& s) : spec(s), apache(s.seed), syslog(s.seed) {}

  CorpusSpec spec;
  ApacheSource apache;
  SyslogSource syslog;
  std::uint64_t produced = 0;
};

CorpusGenerator::CorpusGenerator(const CorpusSpec& spec) : impl_(std::make_unique<Impl>(spec)) {}
CorpusGenerator::~CorpusGenerator() = default;
CorpusGenerator::CorpusGenerator(CorpusGenerator&&) noexcept = default;
CorpusGenerator& CorpusGenerator::operator=(CorpusGenerator&&) noexcept = default;

bool CorpusGenerator::next(std::string& out) {
  Impl& g = *impl_;
  if (g.produced >= g.spec.lines) return false;
  bool apache = g.spec.style == CorpusStyle::Apache;
  if (g.spec.style == CorpusStyle::Mixed) apache = (g.produced / kMixedRunLines) % 2 == 0;
  if (apache) {
    g.apache.next(out);
  } else {
    g.syslog.next(out);
  }
  ++g.produced;
  return true;
}

void generateCorpus(const CorpusSpec& spec, std::ostream& out) {
  CorpusGenerator gen(spec);
  std::string buf;
  while (gen.next(buf)) {
    if (buf.size() >= (1u << 16)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string generateCorpus(const CorpusSpec& spec) {
  std::ostringstream out;
  generateCorpus(spec, out);
  return std::move(out).str();
}

}  // namespace flc
