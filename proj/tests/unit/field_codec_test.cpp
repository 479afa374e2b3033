#include <gtest/gtest.h>

#include <cstdio>
#include <random>

#include "flc/transform.hpp"

namespace flc {
namespace {

Token tok(const std::string& s) {
  Token t{classifyToken(s), s};
  return t;
}

Bytes bytes(std::initializer_list<int> v) {
  Bytes b;
  for (int x : v) b.push_back(static_cast<std::uint8_t>(x));
  return b;
}

std::string roundTrip(const std::string& a, const std::string& b) {
  return decodeField(tok(a), encodeField(tok(a), tok(b))).text;
}

TEST(FieldCodec, DecimalDeltaPayload) {
  // width 3, zigzag(+3) = 6
  EXPECT_EQ(encodeField(tok("100"), tok("103")), bytes({3, 6}));
  EXPECT_EQ(encodeField(tok("103"), tok("100")), bytes({3, 5}));
  EXPECT_EQ(roundTrip("100", "103"), "103");
}

TEST(FieldCodec, DecimalKeepsLeadingZeros) {
  EXPECT_EQ(encodeField(tok("007"), tok("010")), bytes({3, 6}));
  EXPECT_EQ(roundTrip("007", "010"), "010");
}

TEST(FieldCodec, DecimalWidthChangeFallsBackToDigits) {
  EXPECT_EQ(encodeField(tok("99"), tok("100")), bytes({0, '1', '0', '0'}));
  EXPECT_EQ(roundTrip("99", "100"), "100");
}

TEST(FieldCodec, DecimalOverflowFallsBackToDigits) {
  const std::string big = "99999999999999999999";
  const std::string big2 = "99999999999999999998";
  const Bytes p = encodeField(tok(big), tok(big2));
  ASSERT_EQ(p.size(), 1 + big2.size());
  EXPECT_EQ(p[0], 0);
  EXPECT_EQ(roundTrip(big, big2), big2);
  // 2^63 itself is outside the delta domain; 2^63 - 1 is inside it.
  EXPECT_EQ(encodeField(tok("9223372036854775808"), tok("9223372036854775807"))[0], 0);
  EXPECT_EQ(encodeField(tok("9223372036854775806"), tok("9223372036854775807")), bytes({19, 2}));
}

TEST(FieldCodec, IdenticalTimeIsZeroDelta) {
  EXPECT_EQ(encodeField(tok("12:34:56"), tok("12:34:56")), bytes({0, 0}));
  EXPECT_EQ(encodeField(tok("12:34:56"), tok("12:34:58")), bytes({0, 4}));
}

TEST(FieldCodec, DateDeltaInDays) {
  EXPECT_EQ(encodeField(tok("2024-02-28"), tok("2024-03-01")), bytes({0, 4}));
  EXPECT_EQ(roundTrip("2024-02-28", "01/Mar/2024"), "01/Mar/2024");
  EXPECT_EQ(roundTrip("31/Dec/1999", "2000-01-01"), "2000-01-01");
}

TEST(FieldCodec, Ipv4IsFourOctets) {
  EXPECT_EQ(encodeField(tok("10.0.0.1"), tok("192.168.1.255")), bytes({192, 168, 1, 255}));
}

TEST(FieldCodec, TimestampCrossesMidnight) {
  EXPECT_EQ(roundTrip("2023-12-31T23:59:59", "2024-01-01T00:00:01"), "2024-01-01T00:00:01");
  EXPECT_EQ(roundTrip("17/Mar/2024:10:00:00", "17/Mar/2024:09:59:59.5"), "17/Mar/2024:09:59:59.5");
}

TEST(FieldCodec, RejectsMismatchedClasses) {
  EXPECT_THROW(encodeField(tok("100"), tok("10.0.0.1")), Error);
  EXPECT_THROW(encodeField(tok("abc"), tok("abd")), Error);
}

TEST(FieldCodec, TruncatedPayloadIsCorruptRecord) {
  const Bytes p = encodeField(tok("2024-03-17T10:00:00.123"), tok("2024-03-17T10:00:01.456"));
  for (std::size_t n = 0; n < p.size(); ++n) {
    try {
      decodeField(tok("2024-03-17T10:00:00.123"), ByteView(p.data(), n));
      FAIL() << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::CorruptRecord);
    }
  }
}

// Random valid texts for each field class.
struct Gen {
  std::mt19937_64 rng;
  int below(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
  std::string two(int v) {
    char b[8];
    std::snprintf(b, sizeof b, "%02d", v);
    return b;
  }
  std::string date() {
    static const char* mon[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    const int y = 1970 + below(100);
    const int m = 1 + below(12);
    const int d = 1 + below(28);
    char b[16];
    if (below(2)) {
      std::snprintf(b, sizeof b, "%04d-%02d-%02d", y, m, d);
    } else {
      std::snprintf(b, sizeof b, "%02d/%s/%04d", d, mon[m - 1], y);
    }
    return b;
  }
  std::string time() {
    std::string s = two(below(24)) + ":" + two(below(60)) + ":" + two(below(60));
    if (below(3) == 0) {
      s += '.';
      const int w = 1 + below(9);
      for (int i = 0; i < w; ++i) s += static_cast<char>('0' + below(10));
    }
    return s;
  }
  std::string timestamp() { return date() + (below(2) ? "T" : ":") + time(); }
  std::string ipv4() {
    std::string s;
    for (int i = 0; i < 4; ++i) s += (i ? "." : "") + std::to_string(below(256));
    return s;
  }
  std::string decimal() {
    const int w = 1 + below(22);
    std::string s;
    for (int i = 0; i < w; ++i) s += static_cast<char>('0' + below(10));
    return s;
  }
  std::string of(TokenClass c) {
    switch (c) {
      case TokenClass::Timestamp: return timestamp();
      case TokenClass::Date: return date();
      case TokenClass::Time: return time();
      case TokenClass::IPv4: return ipv4();
      default: return decimal();
    }
  }
};

TEST(FieldCodec, RandomPairsRoundTripPerClass) {
  Gen g{std::mt19937_64(2024)};
  for (TokenClass c : {TokenClass::Timestamp, TokenClass::Date, TokenClass::Time, TokenClass::IPv4,
                       TokenClass::Decimal}) {
    ASSERT_TRUE(isFieldClass(c));
    for (int i = 0; i < 10000; ++i) {
      const Token a = tok(g.of(c));
      Token b = tok(g.of(c));
      // Near neighbours exercise the small-delta paths.
      if (i % 2 == 0 && c == TokenClass::Decimal && a.text.size() <= 18) {
        b = tok(std::to_string(std::stoull(a.text) + static_cast<unsigned>(g.below(5))));
        if (b.text.size() < a.text.size()) b.text.insert(0, a.text.size() - b.text.size(), '0');
      }
      ASSERT_EQ(a.cls, c) << a.text;
      ASSERT_EQ(b.cls, c) << b.text;
      const Bytes p = encodeField(a, b);
      ASSERT_EQ(decodeField(a, p), b) << a.text << " -> " << b.text;
    }
  }
}

TEST(FieldCodec, GarbagePayloadNeverCrashes) {
  std::mt19937_64 rng(7);
  const std::vector<Token> bases = {tok("2024-03-17T10:00:00"), tok("17/Mar/2024"), tok("23:59:59.999"),
                                    tok("10.1.2.3"), tok("000123")};
  for (int i = 0; i < 20000; ++i) {
    Bytes p(rng() % 12);
    for (auto& x : p) x = static_cast<std::uint8_t>(rng());
    const Token& base = bases[static_cast<std::size_t>(i) % bases.size()];
    try {
      const Token t = decodeField(base, p);
      EXPECT_FALSE(t.text.empty());
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::CorruptRecord);
    }
  }
}

}  // namespace
}  // namespace flc
