#include <gtest/gtest.h>

#include "rforge/problem_io.hpp"
#include "rforge/template_io.hpp"

using namespace rforge;

namespace {

PolySystem fixture(const std::string& name) { return load_system(std::string(RFORGE_FIXTURES) + "/" + name); }

}  // namespace

TEST(TemplateIo, RoundTripIsByteIdentical) {
  for (const char* f : {"cubic.json", "s1.json"}) {
    const GeneratedTemplate g = generate(fixture(f), {});
    const std::string text = serialize_bundle(g.bundle);
    const TemplateBundle back = parse_bundle(text);
    EXPECT_EQ(serialize_bundle(back), text) << f;
    EXPECT_EQ(back.trace, g.bundle.trace);
    EXPECT_EQ(back.primary.placements.size(), g.bundle.primary.placements.size());
    EXPECT_EQ(back.fallback.has_value(), g.bundle.fallback.has_value());
  }
}

TEST(TemplateIo, GenerationIsDeterministic) {
  const PolySystem sys = fixture("s1.json");
  SearchConfig a, b;
  b.jobs = 3;
  EXPECT_EQ(serialize_bundle(generate(sys, a).bundle), serialize_bundle(generate(sys, b).bundle));
  SearchConfig c;
  c.seed = 99;
  EXPECT_EQ(generate(sys, a).bundle.primary.basis_size(), generate(sys, c).bundle.primary.basis_size());
}

TEST(TemplateIo, VersionMismatchIsReported) {
  const GeneratedTemplate g = generate(fixture("cubic.json"), {});
  std::string text = serialize_bundle(g.bundle);
  const std::string key = "\"version\": 1";
  const auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, key.size(), "\"version\": 2");
  try {
    parse_bundle(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::VersionMismatch);
  }
}

TEST(TemplateIo, MalformedInputIsAParseError) {
  for (const std::string bad : {std::string("{"), std::string("[]"), std::string(R"({"format":"other","version":1})"),
                                std::string(R"({"format":"resultant-forge-template","version":1})")}) {
    try {
      parse_bundle(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Parse) << bad;
    }
  }
}

TEST(TemplateIo, MissingFileIsReported) {
  try {
    load_bundle("/nonexistent/dir/t.tpl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
  }
}
