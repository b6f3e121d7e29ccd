#include <gtest/gtest.h>

#include <sstream>

#include "tutor/csv.hpp"

using tutor::csv::ParseError;
using tutor::csv::Reader;

namespace {

std::vector<std::vector<std::string>> read_all(const std::string& text) {
  std::istringstream in(text);
  Reader r(in);
  std::vector<std::vector<std::string>> out;
  while (auto rec = r.next()) out.push_back(rec->fields);
  return out;
}

}  // namespace

TEST(Csv, PlainRows) {
  const auto rows = read_all("a,b\nc,d\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"c", "d"}));
}

TEST(Csv, QuotedFieldsAndEscapes) {
  const auto rows = read_all("\"x, y\",\"say \"\"hi\"\"\"\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][0], "x, y");
  EXPECT_EQ(rows[0][1], "say \"hi\"");
}

TEST(Csv, MultilineQuotedFieldKeepsStartLine) {
  std::istringstream in("h\n\"one\ntwo\",3\nlast,4\n");
  Reader r(in);
  r.next();
  const auto rec = r.next();
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->line, 2u);
  EXPECT_EQ(rec->fields[0], "one\ntwo");
  EXPECT_EQ(r.next()->line, 4u);
}

TEST(Csv, CrlfBomAndBlankLines) {
  const auto rows = read_all("\xEF\xBB\xBFword,level\r\n\r\nrun,2\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "word");
  EXPECT_EQ(rows[1][1], "2");
}

TEST(Csv, UnterminatedQuoteIsAnError) {
  EXPECT_THROW(read_all("\"open,1\n"), ParseError);
}

TEST(Csv, TrimStripsSpaces) { EXPECT_EQ(tutor::csv::trim("  a b \t"), "a b"); }
