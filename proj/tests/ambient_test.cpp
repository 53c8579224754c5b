#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace memlab;
using namespace memlab::testing;

namespace {

AmbientTerm amb_of(const std::string& text) {
  auto p = parse_ambient(text);
  if (!p.ok()) throw std::runtime_error("bad ambient fixture: " + text);
  return *p.value;
}

std::vector<std::string> reducts(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& r : reduce_ambient(amb_of(text))) out.push_back(print_ambient(r));
  return out;
}

std::vector<std::string> rule_lines(const SystemDefinition& s) {
  std::vector<std::string> out;
  for (const auto& r : s.rules) out.push_back(print_rule(r.schema));
  return out;
}

// Replace the i-th co-capability prefix (in print order of a walk) by 0.
AmbientTerm drop_co(const AmbientTerm& t, int& index) {
  if (t.kind == AmbientTerm::Kind::Prefix && t.cap.co() && index-- == 0) return amb::nil();
  AmbientTerm out = t;
  for (auto& s : out.sub) s = drop_co(s, index);
  return normalize(out);
}

int count_co(const AmbientTerm& t) {
  int n = t.kind == AmbientTerm::Kind::Prefix && t.cap.co() ? 1 : 0;
  for (const auto& s : t.sub) n += count_co(s);
  return n;
}

}  // namespace

TEST(AmbientParse, PrintsInNormalForm) {
  EXPECT_EQ(print_ambient(amb_of("n[in m.0] | m[coin m.0]")), "m[coin m.0] | n[in m.0]");
  EXPECT_EQ(print_ambient(amb_of("n[in m.(in k.0 | out m.0)]")), "n[in m.(in k.0 | out m.0)]");
}

TEST(AmbientParse, ParallelNilCollapses) {
  auto t = amb_of("0 | 0");
  EXPECT_EQ(t.kind, AmbientTerm::Kind::Nil);
  EXPECT_EQ(print_ambient(t), "0");
}

TEST(AmbientParse, EmptyAmbientAndDashedCoCapabilities) {
  EXPECT_EQ(amb_of("n[]"), amb_of("n[0]"));
  EXPECT_EQ(amb_of("m[co-in m.0]"), amb_of("m[coin m.0]"));
  EXPECT_EQ(amb_of("m[co-out m.0 | co-open m.0]"), amb_of("m[coout m.0 | coopen m.0]"));
}

TEST(AmbientParse, RejectsReplicationAndBrokenInput) {
  auto rep = parse_ambient("!in m.0");
  ASSERT_FALSE(rep.ok());
  EXPECT_NE(rep.diagnostics.front().message.find("replication"), std::string::npos);
  EXPECT_FALSE(parse_ambient("n[in m.0").ok());
  EXPECT_FALSE(parse_ambient("in .0").ok());
  EXPECT_FALSE(parse_ambient("n[] |").ok());
}

TEST(AmbientParse, CorpusRoundTrips) {
  auto files = corpus_files(".amb");
  ASSERT_GE(files.size(), 10u);
  for (const auto& f : files) {
    auto t = amb_of(read_file(f));
    EXPECT_EQ(amb_of(print_ambient(t)), t) << f;
  }
}

TEST(AmbientParse, RandomTermsRoundTrip) {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    auto t = random_ambient(rng, 4, true);
    auto p = parse_ambient(print_ambient(t));
    ASSERT_TRUE(p.ok()) << print_ambient(t);
    EXPECT_EQ(*p.value, t);
  }
}

TEST(AmbientReduce, In) {
  EXPECT_EQ(reducts("n[in m.out k.0 | a[]] | m[coin m.b[]]"),
            std::vector<std::string>{"m[b[] | n[a[] | out k.0]]"});
}

TEST(AmbientReduce, Out) {
  EXPECT_EQ(reducts("m[n[out m.in k.0] | coout m.0 | c[]]"),
            (std::vector<std::string>{"m[c[]] | n[in k.0]"}));
}

TEST(AmbientReduce, Open) {
  EXPECT_EQ(reducts("open n.a[] | n[coopen n.b[] | c[]]"),
            (std::vector<std::string>{"a[] | b[] | c[]"}));
}

TEST(AmbientReduce, NeedsTheMatchingCoCapability) {
  EXPECT_TRUE(reducts("n[in m.0] | m[0]").empty());
  EXPECT_TRUE(reducts("n[in m.0] | m[coin k.0]").empty());
  EXPECT_TRUE(reducts("n[in m.0] | k[coin m.0]").empty());
  EXPECT_TRUE(reducts("m[n[out m.0]]").empty());
}

TEST(AmbientReduce, ReducesUnderAmbientsButNotUnderPrefixes) {
  EXPECT_EQ(reducts("k[n[in m.0] | m[coin m.0]]"), std::vector<std::string>{"k[m[n[]]]"});
  EXPECT_TRUE(reducts("in k.(n[in m.0] | m[coin m.0])").empty());
}

TEST(AmbientReduce, EqualRedexesGiveOneReduct) {
  EXPECT_EQ(reducts("a[in m.0] | a[in m.0] | m[coin m.0]").size(), 1u);
  EXPECT_EQ(reducts("a[in m.0] | b[in m.0] | m[coin m.0]").size(), 2u);
}

// Withdrawing a co-capability can only remove redexes.
TEST(AmbientReduce, DroppingACoCapabilityNeverAddsReducts) {
  Rng rng(17);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    auto t = random_ambient(rng, 4, true);
    const auto before = reduce_ambient(t).size();
    for (int j = 0, n = count_co(t); j < n; ++j) {
      int idx = j;
      EXPECT_LE(reduce_ambient(drop_co(t, idx)).size(), before) << print_ambient(t);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(AmbientTranslate, InRedexBecomesMendo) {
  auto s = translate_ambient(amb_of("n[in m.0] | m[coin m.0]"));
  EXPECT_EQ(s.kind, SystemKind::Plain);
  EXPECT_EQ(canonical_encoding(s.initial), key("skin{; m{~coin_m} n{in_m}}"));
  EXPECT_EQ(rule_lines(s), std::vector<std::string>{"mendo n(in_m ->) m(~coin_m ->)"});
}

TEST(AmbientTranslate, OutRedexBecomesMexo) {
  auto s = translate_ambient(amb_of("m[n[out m.0] | coout m.0]"));
  EXPECT_EQ(rule_lines(s), std::vector<std::string>{"mexo n(out_m ->) m(~coout_m ->)"});
}

TEST(AmbientTranslate, ContinuationsBecomeProgramObjects) {
  auto s = translate_ambient(amb_of("n[in m.(out m.0 | in k.0)] | m[coin m.coout m.0]"));
  EXPECT_EQ(canonical_encoding(s.initial),
            key("skin{; m{~\"coin_m.coout_m\"} n{\"in_m.(in_k|out_m)\"}}"));
  // the later out m step is generated from the produced objects
  EXPECT_EQ(rule_lines(s),
            (std::vector<std::string>{"mendo n(\"in_m.(in_k|out_m)\" -> in_k,out_m) m(~coin_m.coout_m -> ~coout_m)",
                                      "mexo n(out_m ->) m(~coout_m ->)"}));
}

TEST(AmbientTranslate, NoCounterpartNoRule) {
  EXPECT_TRUE(translate_ambient(amb_of("n[in m.0] | m[0]")).rules.empty());
  EXPECT_TRUE(translate_ambient(amb_of("0")).rules.empty());
  EXPECT_EQ(canonical_encoding(encode_ambient(amb_of("0"))), key("skin{}"));
}

TEST(AmbientTranslate, UnsupportedFragments) {
  EXPECT_THROW(translate_ambient(amb_of("open n.0 | n[coopen n.0]")), UnsupportedFragment);
  EXPECT_THROW(translate_ambient(amb_of("in m.n[]")), UnsupportedFragment);
  EXPECT_THROW(translate_ambient(amb_of("skin[]")), UnsupportedFragment);
  EXPECT_THROW(encode_ambient(amb_of("in m.n[]")), UnsupportedFragment);
}

TEST(AmbientTranslate, CorpusTranslationsValidateAndRoundTrip) {
  int encodable = 0;
  for (const auto& f : corpus_files(".amb")) {
    auto t = amb_of(read_file(f));
    SystemDefinition s;
    try {
      s = translate_ambient(t);
    } catch (const UnsupportedFragment&) {
      continue;
    }
    ++encodable;
    EXPECT_TRUE(validate(s).empty()) << f;
    auto back = parse_system(print_system(s));
    ASSERT_TRUE(back.ok()) << f << "\n" << print_system(s);
    EXPECT_EQ(print_system(*back.system), print_system(s)) << f;
  }
  EXPECT_GE(encodable, 10);
}

// Totality on the open-free fragment, plus the encoding respects congruence
// in both directions.
TEST(AmbientTranslate, RandomTermsEncodeUpToCongruence) {
  Rng rng(23);
  std::map<std::string, std::string> by_key;
  for (int i = 0; i < 400; ++i) {
    auto t = random_ambient(rng, 5);
    SystemDefinition s;
    ASSERT_NO_THROW(s = translate_ambient(t)) << print_ambient(t);
    EXPECT_TRUE(validate(s).empty()) << print_ambient(t);
    const std::string k = canonical_encoding(s.initial);
    EXPECT_EQ(canonical_encoding(encode_ambient(shuffled(rng, t))), k) << print_ambient(t);
    auto [it, fresh] = by_key.emplace(k, print_ambient(t));
    if (!fresh) EXPECT_EQ(it->second, print_ambient(t)) << "distinct terms share " << k;
  }
  EXPECT_GT(by_key.size(), 200u);
}
