#include <gtest/gtest.h>

#include <sstream>

#include "tdrepair/dataset/augment.hpp"
#include "tdrepair/dataset/corpus.hpp"
#include "tdrepair/errors.hpp"
#include "temp_dir.hpp"

using namespace tdrepair;
using namespace tdrepair::dataset;

namespace {

std::vector<TaskInstance> parse(const std::string& text, CorpusSchema schema = CorpusSchema::kGeneric) {
  std::istringstream in(text);
  return read_instances(in, schema);
}

ExternalTests parse_ext(const std::string& text, LoadReport* report = nullptr) {
  std::istringstream in(text);
  return read_external_tests(in, report);
}

const char* kRecord =
    R"j({"id":"t1","instruction":"ন্যূনতম খরচ বের করুন","function_name":"min_cost","arg_names":["cost","m","n"],)j"
    R"j("tests":["assert min_cost([[1,2,3],[4,8,2],[1,5,3]],2,2)==8"]})j";

}  // namespace

TEST(LoadInstances, ParsesRecord) {
  const auto v = parse(std::string(kRecord) + "\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].id, "t1");
  EXPECT_EQ(v[0].function_name, "min_cost");
  EXPECT_EQ(v[0].arg_names, (std::vector<std::string>{"cost", "m", "n"}));
  EXPECT_EQ(v[0].instruction, "ন্যূনতম খরচ বের করুন");
  ASSERT_EQ(v[0].tests.size(), 1u);
  EXPECT_EQ(v[0].tests[0].provenance, Provenance::kProvided);
  EXPECT_EQ(v[0].tests[0].normalized_form, "assert min_cost([[1, 2, 3], [4, 8, 2], [1, 5, 3]], 2, 2) == 8");
}

TEST(LoadInstances, TestSplitOf500) {
  std::string text;
  for (int i = 0; i < 500; ++i) {
    text += R"j({"id":"t)j" + std::to_string(i) + R"j(","instruction":"x","function_name":"f)j" + std::to_string(i) +
            R"j(","arg_names":["a"],"tests":["assert f)j" + std::to_string(i) + "(1) == 1\"]}\n";
  }
  const auto v = parse(text, CorpusSchema::kTestSplit);
  ASSERT_EQ(v.size(), 500u);
  for (const auto& inst : v) EXPECT_EQ(inst.tests.size(), 1u);
  EXPECT_EQ(v[499].id, "t499");
}

TEST(LoadInstances, SchemaCountEnforced) {
  EXPECT_THROW(parse(kRecord, CorpusSchema::kDevSplit), SchemaError);
  EXPECT_NO_THROW(parse(kRecord, CorpusSchema::kTestSplit));
}

TEST(LoadInstances, EmptyFile) {
  EXPECT_THROW(parse(""), EmptyCorpusError);
  EXPECT_THROW(parse("\n  \n"), EmptyCorpusError);
}

TEST(LoadInstances, Errors) {
  struct Case {
    std::string text;
    std::size_t line;
    std::string id;
  };
  const Case cases[] = {
      {R"j({"id":"a","instruction":"x","function_name":"f","arg_names":[],"tests":[]})j", 1, "a"},
      {R"j({"instruction":"x","function_name":"f","tests":["assert f()"]})j", 1, ""},
      {R"j({"id":"a","instruction":"x","tests":["assert f()"]})j", 1, "a"},
      {R"j({"id":"a","instruction":"x","function_name":"1f","tests":["assert f()"]})j", 1, "a"},
      {R"j({"id":"a","instruction":"x","function_name":"f","tests":["print(f())"]})j", 1, "a"},
      {std::string(kRecord) + "\n\n{not json", 3, ""},
      {std::string(kRecord) + "\n" + kRecord, 2, "t1"},
  };
  for (const auto& c : cases) {
    try {
      parse(c.text);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.line(), c.line) << e.what();
      EXPECT_EQ(e.record_id(), c.id) << e.what();
    }
  }
}

TEST(LoadInstances, EmptyTestsCitesId) {
  try {
    parse(R"j({"id":"rec-7","instruction":"x","function_name":"f","arg_names":[],"tests":[]})j");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("rec-7"), std::string::npos);
  }
}

TEST(LoadInstances, DuplicateProvidedTestsCollapse) {
  const auto v = parse(R"j({"id":"a","instruction":"x","function_name":"f","tests":["assert f(1)==2","assert f( 1 ) == 2"]})j");
  EXPECT_EQ(v[0].tests.size(), 1u);
  EXPECT_EQ(v[0].tests[0].assert_source, "assert f(1)==2");
}

TEST(LoadInstances, MissingFileIsIoError) {
  EXPECT_THROW(load_instances("/nonexistent/corpus.jsonl"), IoError);
}

TEST(LoadInstances, RoundTripWithProvenance) {
  auto v = parse(std::string(kRecord) + "\n" +
                 R"j({"id":"t2","instruction":"y","function_name":"g","arg_names":["a","b"],"tests":["assert g(1, 2) == 3"]})j");
  ExternalTests ext;
  ext["g"] = {TestCase::make("assert g(0, 0) == 0", Provenance::kExternal)};
  v = augment(v, ext);

  test_support::TempDir dir;
  save_instances(dir / "c.jsonl", v);
  EXPECT_EQ(load_instances(dir / "c.jsonl"), v);

  std::ostringstream a, b;
  write_instances(a, v);
  write_instances(b, load_instances(dir / "c.jsonl"));
  EXPECT_EQ(a.str(), b.str());
}

TEST(ExternalTests, LoadsAndReports) {
  LoadReport r;
  const auto ext = parse_ext(
      R"j({"function_name":"add","tests":["assert add(1,2)==3","assert add(0,0)==0","assert add(-1,1)==0"]})j"
      "\n"
      R"j({"function_name":"sub","tests":["assert sub(1,2","assert sub(2,1)==1", 5]})j"
      "\n"
      "garbage\n"
      R"j({"function_name":"add","tests":["assert add(5,5)==10"]})j"
      "\n",
      &r);
  ASSERT_EQ(ext.size(), 2u);
  EXPECT_EQ(ext.at("add").size(), 4u);
  EXPECT_EQ(ext.at("sub").size(), 1u);
  for (const auto& tc : ext.at("add")) EXPECT_EQ(tc.provenance, Provenance::kExternal);
  EXPECT_EQ(r.records, 4u);
  EXPECT_EQ(r.malformed_records, 1u);
  EXPECT_EQ(r.loaded, 5u);
  EXPECT_EQ(r.dropped, 2u);
  EXPECT_EQ(r.functions, 2u);
}

TEST(ExternalTests, ZeroUsable) {
  EXPECT_THROW(parse_ext(R"j({"function_name":"f","tests":["x = 1"]})j"), EmptyCorpusError);
  EXPECT_THROW(load_external_tests("/nonexistent/ext.jsonl"), IoError);
}

TEST(Augment, AppendsNonOverlapping) {
  // Expected size checked by comparing ast.dump() sets in CPython.
  auto v = parse(R"j({"id":"a","instruction":"x","function_name":"f","tests":["assert f(1)==2"]})j");
  const auto ext = parse_ext(R"j({"function_name":"f","tests":["assert f(1) == 2","assert (f(2)==3)","assert f(3) == 4"]})j");
  AugmentStats s;
  const auto out = augment(v, ext, &s);
  ASSERT_EQ(out[0].tests.size(), 3u);
  EXPECT_EQ(out[0].tests[0].assert_source, "assert f(1)==2");
  EXPECT_EQ(out[0].tests[0].provenance, Provenance::kProvided);
  EXPECT_EQ(out[0].tests[1].provenance, Provenance::kExternal);
  EXPECT_EQ(out[0].tests[2].assert_source, "assert f(3) == 4");
  EXPECT_EQ(s.matched, 1u);
  EXPECT_EQ(s.appended, 2u);
  EXPECT_EQ(s.overlapping, 1u);
}

TEST(Augment, NoMatchUnchanged) {
  const auto v = parse(kRecord);
  const auto ext = parse_ext(R"j({"function_name":"other","tests":["assert other() == 1"]})j");
  EXPECT_EQ(augment(v, ext), v);
}

TEST(Augment, IdenticalExternalTestsAppendedOnce) {
  const auto v = parse(kRecord);
  const auto ext = parse_ext(R"j({"function_name":"min_cost","tests":["assert min_cost([], 0, 0) == 0","assert min_cost([],0,0)==0"]})j");
  const auto out = augment(v, ext);
  EXPECT_EQ(out[0].tests.size(), 2u);
  EXPECT_EQ(augment(out, ext), out);
}

TEST(TestSuite, ProvidedMustPrecedeAugmented) {
  TestSuite s;
  EXPECT_TRUE(s.add(TestCase::make("assert f(1)", Provenance::kProvided)));
  EXPECT_TRUE(s.add(TestCase::make("assert f(2)", Provenance::kGenerated)));
  EXPECT_THROW(s.add(TestCase::make("assert f(3)", Provenance::kProvided)), ContractViolation);
  EXPECT_FALSE(s.add(TestCase::make("assert f( 2 )", Provenance::kExternal)));
}

TEST(NormalizeTest, Examples) {
  EXPECT_EQ(normalize_test("assert f( 1,2 )==3"), normalize_test("assert f(1, 2) == 3"));
  EXPECT_EQ(normalize_test("assert f(1, 2) == 3"), "assert f(1, 2) == 3");
  EXPECT_NE(normalize_test("assert f(1)==2"), normalize_test("assert f(2)==1"));
  EXPECT_THROW(normalize_test("assert f(1"), ValidationError);
}
