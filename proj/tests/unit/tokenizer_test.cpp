#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <regex>

#include "flc/tokenizer.hpp"
#include "support.hpp"

namespace flc {
namespace {

// Reference classifier written directly from the grammar with std::regex
// and std::chrono calendar validation.
bool validYmd(int y, unsigned m, unsigned d) {
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

bool refDate(const std::string& s) {
  static const std::regex iso(R"(^(\d{4})-(\d{2})-(\d{2})$)");
  static const std::regex clf(R"(^(\d{2})/(Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec)/(\d{4})$)");
  static const std::vector<std::string> months = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  std::smatch m;
  if (std::regex_match(s, m, iso)) {
    return validYmd(std::stoi(m[1]), static_cast<unsigned>(std::stoi(m[2])), static_cast<unsigned>(std::stoi(m[3])));
  }
  if (std::regex_match(s, m, clf)) {
    const auto mon = static_cast<unsigned>(std::find(months.begin(), months.end(), m[2].str()) - months.begin()) + 1;
    return validYmd(std::stoi(m[3]), mon, static_cast<unsigned>(std::stoi(m[1])));
  }
  return false;
}

bool refTime(const std::string& s) {
  static const std::regex t(R"(^([01]\d|2[0-3]):[0-5]\d:[0-5]\d(\.\d{1,9})?$)");
  return std::regex_match(s, t);
}

bool refTimestamp(const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((s[i] == 'T' || s[i] == ':') && refDate(s.substr(0, i)) && refTime(s.substr(i + 1))) return true;
  }
  return false;
}

TokenClass refClassify(const std::string& s) {
  static const std::regex octet(R"((25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d))");
  static const std::regex ipv4(R"(^(25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)(\.(25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)){3}$)");
  static const std::regex hexPrefixed(R"(^0[xX][0-9a-fA-F]+$)");
  static const std::regex hexBare(R"(^[0-9a-fA-F]{4,}$)");
  static const std::regex hasLetter(R"([a-fA-F])");
  static const std::regex decimal(R"(^[0-9]+$)");
  static const std::regex word(R"(^[A-Za-z]+$)");
  static const std::regex sep(R"(^[ \t]+$)");
  if (refTimestamp(s)) return TokenClass::Timestamp;
  if (refDate(s)) return TokenClass::Date;
  if (refTime(s)) return TokenClass::Time;
  if (std::regex_match(s, ipv4)) return TokenClass::IPv4;
  if (std::regex_match(s, hexPrefixed) || (std::regex_match(s, hexBare) && std::regex_search(s, hasLetter))) {
    return TokenClass::Hex;
  }
  if (std::regex_match(s, decimal)) return TokenClass::Decimal;
  if (std::regex_match(s, word)) return TokenClass::Word;
  if (std::regex_match(s, sep)) return TokenClass::Separator;
  return TokenClass::Other;
}

TEST(Tokenizer, EmptyLineHasNoTokens) { EXPECT_TRUE(tokenize("").tokens.empty()); }

TEST(Tokenizer, RequestLine) {
  const auto t = tokenize("GET /index 200");
  const std::vector<Token> want = {{TokenClass::Word, "GET"},
                                   {TokenClass::Separator, " "},
                                   {TokenClass::Other, "/index"},
                                   {TokenClass::Separator, " "},
                                   {TokenClass::Decimal, "200"}};
  EXPECT_EQ(t.tokens, want);
}

TEST(Tokenizer, AddressDateTimeLine) {
  const auto t = tokenize("10.0.0.1 - 2023-01-02 12:00:01");
  auto has = [&](TokenClass c, const std::string& s) {
    return std::find(t.tokens.begin(), t.tokens.end(), Token{c, s}) != t.tokens.end();
  };
  EXPECT_TRUE(has(TokenClass::IPv4, "10.0.0.1"));
  EXPECT_TRUE(has(TokenClass::Date, "2023-01-02"));
  EXPECT_TRUE(has(TokenClass::Time, "12:00:01"));
}

TEST(Tokenizer, DoubleSpaceIsOneSeparator) {
  const auto t = tokenize("a  b");
  ASSERT_EQ(t.tokens.size(), 3u);
  EXPECT_EQ(t.tokens[1], (Token{TokenClass::Separator, "  "}));
  EXPECT_EQ(detokenize(t), "a  b");
}

TEST(Tokenizer, TerminatorKept) {
  const auto t = tokenize("x y", "\r\n");
  EXPECT_EQ(t.terminator, "\r\n");
  EXPECT_EQ(detokenize(t), "x y\r\n");
  EXPECT_EQ(contentLength(t), 3u);
}

TEST(Classify, GrammarExamples) {
  EXPECT_EQ(classifyToken("404"), TokenClass::Decimal);
  EXPECT_EQ(classifyToken("999.1.1.1"), TokenClass::Other);
  EXPECT_EQ(classifyToken("17/Mar/2024"), TokenClass::Date);
  EXPECT_EQ(classifyToken("2024-03-17T10:11:12.250"), TokenClass::Timestamp);
  EXPECT_EQ(classifyToken("17/Mar/2024:10:11:12"), TokenClass::Timestamp);
  EXPECT_EQ(classifyToken("2023-02-29"), TokenClass::Other);
  EXPECT_EQ(classifyToken("2024-02-29"), TokenClass::Date);
  EXPECT_EQ(classifyToken("24:00:00"), TokenClass::Other);
  EXPECT_EQ(classifyToken("0xff"), TokenClass::Hex);
  EXPECT_EQ(classifyToken("dead"), TokenClass::Hex);
  EXPECT_EQ(classifyToken("deal"), TokenClass::Word);
  EXPECT_EQ(classifyToken("1234"), TokenClass::Decimal);
  EXPECT_EQ(classifyToken("01.2.3.4"), TokenClass::Other);
  EXPECT_EQ(classifyToken(" \t"), TokenClass::Separator);
  EXPECT_EQ(classifyToken("error=404"), TokenClass::Other);
}

TEST(Classify, AgreesWithReferenceOnStructuredFuzz) {
  std::mt19937_64 rng(20240317);
  const std::vector<std::string> seeds = {"2024-03-17", "17/Mar/2024", "23:59:59", "00:00:00.123456789",
                                          "2024-03-17T23:59:59", "17/Mar/2024:01:02:03", "192.168.0.255",
                                          "0x1F", "abcd", "12345", "Word", "2000-02-29"};
  const std::string mutations = "0123456789:-./TxXaAfFgZ \t";
  for (int i = 0; i < 20000; ++i) {
    std::string s = seeds[rng() % seeds.size()];
    const int edits = static_cast<int>(rng() % 3);
    for (int e = 0; e < edits && !s.empty(); ++e) {
      const std::size_t pos = rng() % s.size();
      switch (rng() % 3) {
        case 0: s[pos] = mutations[rng() % mutations.size()]; break;
        case 1: s.erase(pos, 1); break;
        default: s.insert(pos, 1, mutations[rng() % mutations.size()]); break;
      }
    }
    if (s.empty()) continue;
    // Only runs without mixed separators are whole tokens.
    const bool allSep = s.find_first_not_of(" \t") == std::string::npos;
    const bool anySep = s.find_first_of(" \t") != std::string::npos;
    if (anySep && !allSep) continue;
    ASSERT_EQ(classifyToken(s), refClassify(s)) << "token '" << s << "'";
  }
}

TEST(Tokenizer, RandomBytesRoundTripAndPartition) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    std::string line = test::randomLineContent(rng, 200);
    const auto t = tokenize(line);
    ASSERT_EQ(detokenize(t), line);
    // Tokens alternate between separator and non-separator runs and each is
    // the maximal run at its offset.
    std::size_t offset = 0;
    for (std::size_t k = 0; k < t.tokens.size(); ++k) {
      const auto& tok = t.tokens[k];
      ASSERT_FALSE(tok.text.empty());
      ASSERT_EQ(line.compare(offset, tok.text.size(), tok.text), 0);
      const bool sep = isSeparatorByte(static_cast<unsigned char>(tok.text[0]));
      for (char c : tok.text) ASSERT_EQ(isSeparatorByte(static_cast<unsigned char>(c)), sep);
      offset += tok.text.size();
      if (offset < line.size()) {
        ASSERT_NE(isSeparatorByte(static_cast<unsigned char>(line[offset])), sep);
      }
      ASSERT_EQ(tok.cls, refClassify(tok.text));
    }
    ASSERT_EQ(offset, line.size());
    ASSERT_EQ(tokenize(line), t);
  }
}

TEST(Tokenizer, OneMebibyteLine) {
  std::string line(1 << 20, 'a');
  for (std::size_t i = 0; i < line.size(); i += 97) line[i] = ' ';
  EXPECT_EQ(detokenize(tokenize(line)), line);
}

}  // namespace
}  // namespace flc
