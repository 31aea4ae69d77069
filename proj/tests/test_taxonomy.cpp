#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mtax/lexicon.hpp"
#include "mtax/taxonomy.hpp"
#include "mtax/text.hpp"
#include "oracles.hpp"

using namespace mtax;

namespace {

const std::vector<std::string> kTableCodes = {"00000100", "00001000", "10111000", "10111010", "10111100",
                                              "11001000", "11001010", "11001100", "11101010", "11110100",
                                              "11110111", "11111010", "11111011", "11111110"};

std::string bits_of(unsigned b) {
  std::string s;
  for (int i = 7; i >= 0; --i) s.push_back((b >> i) & 1 ? '1' : '0');
  return s;
}

} // namespace

TEST(MotionCode, ParsesCaptionExample) {
  const auto c = parse_code("10111010");
  EXPECT_TRUE(c.contact);
  EXPECT_FALSE(c.soft);
  EXPECT_EQ(c.subclass, Subclass::b11);
  EXPECT_EQ(subclass_name(c.soft, c.subclass), "moving");
  EXPECT_TRUE(c.prismatic);
  EXPECT_FALSE(c.revolute);
  EXPECT_TRUE(c.continuous);
  EXPECT_FALSE(c.bimanual);
}

TEST(MotionCode, ParsesTwist) {
  const auto c = parse_code("11110111");
  EXPECT_TRUE(c.contact);
  EXPECT_TRUE(c.soft);
  EXPECT_EQ(subclass_name(c.soft, c.subclass), "manipulatee-deforming");
  EXPECT_FALSE(c.prismatic);
  EXPECT_TRUE(c.revolute);
  EXPECT_TRUE(c.continuous);
  EXPECT_TRUE(c.bimanual);
}

TEST(MotionCode, ParseErrors) {
  EXPECT_THROW(parse_code("1011"), ParseError);
  EXPECT_THROW(parse_code("101110100"), ParseError);
  EXPECT_THROW(parse_code("1011101x"), ParseError);
  EXPECT_THROW(parse_code(""), ParseError);
}

TEST(MotionCode, RenderKnownCodes) {
  const auto lex = paper_table_lexicon();
  EXPECT_EQ(render_code(lookup("pick-and-place", lex)), "10111010");
  EXPECT_EQ(render_code(lookup("fold", lex)), "11111110");
  EXPECT_EQ(render_code(MotionCode{}), "00000000");
}

TEST(MotionCode, RoundTripAllBytes) {
  for (unsigned b = 0; b < 256; ++b) {
    const auto s = bits_of(b);
    EXPECT_EQ(render_code(parse_code(s)), s);
    const auto c = MotionCode::from_byte(static_cast<std::uint8_t>(b));
    EXPECT_EQ(parse_code(render_code(c)), c);
    EXPECT_EQ(c.to_byte(), b);
  }
}

TEST(Validate, Examples) {
  EXPECT_TRUE(validate(parse_code("10111010")).ok());

  const auto rigid01 = validate(parse_code("10011010"));
  ASSERT_FALSE(rigid01.ok());
  EXPECT_EQ(rigid01.violations[0].attribute, "engagement_subclass");
  EXPECT_NE(rigid01.violations[0].message.find("rigid"), std::string::npos);

  const auto noncontact_soft = validate(parse_code("01000000"));
  ASSERT_FALSE(noncontact_soft.ok());
  EXPECT_EQ(noncontact_soft.violations[0].attribute, "engagement");
  EXPECT_NE(noncontact_soft.violations[0].message.find("non-contact"), std::string::npos);

  EXPECT_FALSE(validate(parse_code("00000010")).ok());  // duration without contact
  EXPECT_FALSE(validate(parse_code("11011010")).ok());  // soft subclass 01
}

TEST(Validate, MissingTrajectoryWarns) {
  const auto r = validate(parse_code("10110010"));
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_TRUE(validate(parse_code("10111010")).warnings.empty());
}

TEST(Validate, TableCodesAreLegal) {
  for (const auto &s : kTableCodes) EXPECT_TRUE(validate(parse_code(s)).ok()) << s;
}

TEST(EnumerateLegal, MatchesConstructiveOracle) {
  const auto legal = enumerate_legal_codes();
  EXPECT_EQ(legal.size(), 88u);
  EXPECT_TRUE(std::is_sorted(legal.begin(), legal.end()));
  std::set<std::uint8_t> got;
  for (const auto &c : legal) got.insert(c.to_byte());
  EXPECT_EQ(got, oracle::legal_codes_by_construction());
  for (const auto &s : kTableCodes) EXPECT_TRUE(got.count(parse_code(s).to_byte())) << s;
  EXPECT_FALSE(got.count(parse_code("10011010").to_byte()));
  // brute force over all bytes
  for (unsigned b = 0; b < 256; ++b)
    EXPECT_EQ(validate(MotionCode::from_byte(static_cast<std::uint8_t>(b))).ok(), got.count(b) == 1);
}

TEST(CodeDistance, Examples) {
  const auto lex = paper_table_lexicon();
  EXPECT_EQ(code_distance(lookup("cut", lex), lookup("slice", lex)), 0.0);
  EXPECT_EQ(code_distance(parse_code("11111010"), parse_code("11111011")), 1.0);
  const auto x = parse_code("11001010");
  EXPECT_EQ(code_distance(x, x), 0.0);
}

TEST(CodeDistance, UnitWeightsEqualHamming) {
  for (unsigned a = 0; a < 256; a += 7)
    for (unsigned b = 0; b < 256; b += 5)
      EXPECT_EQ(code_distance(MotionCode::from_byte(static_cast<std::uint8_t>(a)),
                              MotionCode::from_byte(static_cast<std::uint8_t>(b))),
                oracle::hamming(bits_of(a), bits_of(b)));
}

TEST(CodeDistance, MetricOverLegalCodesWithRandomPositiveWeights) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::array<double, 8> w{};
  for (auto &x : w) x = u(rng);
  const CodeDistanceWeights weights(w);
  const auto legal = enumerate_legal_codes();
  for (const auto &a : legal)
    for (const auto &b : legal) {
      const double dab = code_distance(a, b, weights);
      EXPECT_GE(dab, 0.0);
      EXPECT_EQ(dab, code_distance(b, a, weights));
      EXPECT_EQ(dab == 0.0, a == b);
    }
  // triangle inequality on every triple would be 88^3; a seeded subsample of c suffices with all (a,b)
  std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
  for (const auto &a : legal)
    for (const auto &b : legal)
      for (int t = 0; t < 4; ++t) {
        const auto &c = legal[pick(rng)];
        EXPECT_LE(code_distance(a, b, weights), code_distance(a, c, weights) + code_distance(c, b, weights) + 1e-12);
      }
}

TEST(CodeDistance, WeightValidation) {
  std::array<double, 8> w{};
  EXPECT_THROW(CodeDistanceWeights{w}, InvalidArgument);
  w[3] = -1.0;
  w[0] = 1.0;
  EXPECT_THROW(CodeDistanceWeights{w}, InvalidArgument);
  w[3] = 0.0;
  const CodeDistanceWeights only_contact(w);
  EXPECT_EQ(code_distance(parse_code("10111010"), parse_code("00001010"), only_contact), 1.0);
}

TEST(Text, Normalization) {
  EXPECT_EQ(text::normalize_label("  Pick   And\tPlace "), "pick and place");
  EXPECT_EQ(text::strip_qualifiers("Roll (Bimanual)"), "roll");
  EXPECT_EQ(text::strip_qualifiers("twist (open/close container)"), "twist");
  EXPECT_EQ(text::edit_distance("kitten", "sitting"), 3u);
}

TEST(Lexicon, SeedHasFourteenLegalCodes) {
  const auto lex = paper_table_lexicon();
  const auto codes = lex.codes();
  ASSERT_EQ(codes.size(), 14u);
  std::vector<std::string> rendered;
  for (const auto &c : codes) rendered.push_back(render_code(c));
  EXPECT_EQ(rendered, kTableCodes);
  for (const auto &e : lex.entries()) {
    EXPECT_TRUE(validate(e.code).ok());
    EXPECT_EQ(e.source, EntrySource::paper_table);
  }
}

TEST(Lexicon, EveryNameResolvesToOneCode) {
  const auto lex = paper_table_lexicon();
  for (const auto &e : lex.entries()) {
    EXPECT_EQ(lookup(e.label, lex), e.code) << e.label;
    for (const auto &a : e.aliases) EXPECT_EQ(lookup(a, lex), e.code) << a;
  }
}

TEST(Lexicon, LookupExamples) {
  const auto lex = paper_table_lexicon();
  EXPECT_EQ(render_code(lookup("insert", lex)), "11001010");
  EXPECT_EQ(lookup("pierce", lex), lookup("insert", lex));
  EXPECT_EQ(lookup("pour", lex), lookup("rotate", lex));
  EXPECT_EQ(lookup("  SPRINKLE ", lex), lookup("shake", lex));
  EXPECT_EQ(render_code(lookup("crack", lex)), "11110100");
  EXPECT_EQ(render_code(lookup("twist", lex)), "11110111");
  EXPECT_EQ(render_code(lookup("roll (bimanual)", lex)), "11111011");
}

TEST(Lexicon, UnknownAndAmbiguous) {
  const auto lex = paper_table_lexicon();
  try {
    lookup("teleport", lex);
    FAIL() << "expected UnknownLabel";
  } catch (const UnknownLabel &e) {
    EXPECT_EQ(e.status(), LookupStatus::unknown);
    EXPECT_EQ(e.candidates().size(), 3u);
  }
  try {
    lookup("slise", lex);
    FAIL();
  } catch (const UnknownLabel &e) {
    EXPECT_EQ(e.candidates().front(), "slice");
  }
  const auto push = lex.resolve("push");
  EXPECT_EQ(push.status, LookupStatus::ambiguous);
  EXPECT_EQ(push.candidates.size(), 2u);
  EXPECT_FALSE(lex.find("roll").has_value());
}

TEST(Lexicon, ProseCorrectedSwapsTrajectoryOfNonContactRows) {
  const auto v = paper_table_lexicon(LexiconVariant::verbatim);
  const auto p = paper_table_lexicon(LexiconVariant::prose_corrected);
  EXPECT_EQ(render_code(lookup("pour", v)), "00001000");
  EXPECT_EQ(render_code(lookup("pour", p)), "00000100");
  EXPECT_TRUE(lookup("pour", p).revolute);
  EXPECT_EQ(render_code(lookup("shake", p)), "00001000");
  for (const auto &e : v.entries())
    if (e.code.contact) EXPECT_EQ(lookup(e.label, p), e.code);
}

TEST(Lexicon, FixtureFileMatchesBuiltInSeed) {
  const auto file = load_lexicon(std::string(MTAX_SOURCE_DIR) + "/data/lexicon/table2_v1.json", EntrySource::paper_table);
  const auto seed = paper_table_lexicon();
  ASSERT_EQ(file.size(), seed.size());
  for (std::size_t i = 0; i < seed.size(); ++i) {
    EXPECT_EQ(file.entries()[i].label, seed.entries()[i].label);
    EXPECT_EQ(file.entries()[i].aliases, seed.entries()[i].aliases);
    EXPECT_EQ(file.entries()[i].code, seed.entries()[i].code);
  }
  const auto again = parse_lexicon_json(lexicon_to_json(seed));
  EXPECT_EQ(again.size(), seed.size());
}

TEST(Lexicon, RejectsConflictsAndBadJson) {
  EXPECT_THROW(parse_lexicon_json(R"([{"label":"a","code":"10011010"}])"), InvalidArgument);
  EXPECT_THROW(parse_lexicon_json(R"([{"label":"a","code":"10111010"},{"label":"A ","code":"11111010"}])"),
               InvalidArgument);
  EXPECT_THROW(parse_lexicon_json(R"({"label":"a"})"), ParseError);
  EXPECT_THROW(parse_lexicon_json(R"([{"label":"a"}])"), ParseError);
  EXPECT_THROW(parse_lexicon_json("[{"), ParseError);
  const auto user = parse_lexicon_json(R"([{"label":"julienne","aliases":["matchstick cut"],"code":"11111010"}])");
  EXPECT_EQ(user.entries()[0].source, EntrySource::user);
  EXPECT_EQ(render_code(lookup("matchstick cut", user)), "11111010");
}

TEST(Consolidate, Examples) {
  const auto lex = paper_table_lexicon();
  const std::vector<std::string> a{"cut", "chop", "slice", "pour"};
  const auto ra = consolidate(a, lex);
  ASSERT_EQ(ra.groups.size(), 2u);
  EXPECT_EQ(ra.groups.at(parse_code("11111010")), (std::vector<std::string>{"cut", "chop", "slice"}));
  EXPECT_EQ(ra.groups.at(lookup("pour", lex)), (std::vector<std::string>{"pour"}));
  EXPECT_TRUE(ra.unknowns.empty());

  EXPECT_TRUE(consolidate(std::vector<std::string>{}, lex).groups.empty());

  const std::vector<std::string> b{"insert", "pierce", "mix", "stir"};
  const auto rb = consolidate(b, lex);
  ASSERT_EQ(rb.groups.size(), 1u);
  EXPECT_EQ(rb.groups.begin()->second.size(), 4u);
}

TEST(Consolidate, IsAPartitionOfDeduplicatedInput) {
  const auto lex = paper_table_lexicon();
  std::vector<std::string> all;
  for (const auto &e : lex.entries()) all.push_back(e.label);
  all.insert(all.end(), {"teleport", "Cut", " cut ", "push", "julienne"});
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(all.begin(), all.end(), rng);
    const std::vector<std::string> input(all.begin(), all.begin() + 20);
    const auto r = consolidate(input, lex);
    std::multiset<std::string> seen;
    for (const auto &[code, labels] : r.groups) {
      for (const auto &l : labels) {
        seen.insert(l);
        EXPECT_EQ(lookup(l, lex), code);
      }
    }
    for (const auto &u : r.unknowns) seen.insert(u);
    std::set<std::string> expected;
    for (const auto &l : input) expected.insert(text::normalize_label(l));
    EXPECT_EQ(seen.size(), expected.size());  // disjoint
    EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()), expected);
    EXPECT_LE(r.groups.size(), 14u);
  }
}
