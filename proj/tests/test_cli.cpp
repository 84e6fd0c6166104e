#include "flowhopf/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace {

struct Out {
  int code;
  std::string text;
};

Out run(std::vector<std::string> args) {
  std::ostringstream out;
  const int code = flowhopf::cli::run(args, out);
  return {code, out.str()};
}

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, Coproduct) {
  const auto r = run({"coproduct", "--tree", "b(c,r)"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.text, "terms: 5"));
  EXPECT_TRUE(has(r.text, "c*r (x) b"));
  EXPECT_TRUE(has(r.text, "cutoff="));
}

TEST(Cli, BkBinaryPreset) {
  const auto r = run({"dse", "solve", "--preset", "bk-binary", "--cutoff", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.text, "x_1 [3 terms] = b(#,#) + c(#,#) + r(#,#)"));
  EXPECT_TRUE(has(r.text, "x_2 [9 terms] = 2 b(b(#,#),#)"));
}

TEST(Cli, Eval) {
  const auto r = run({"eval", "--expr", "rec(S; comp(P[3,3]; S))", "--args", "2,3", "--fuel", "10000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.text, "\nHalted(5)\n"));
  EXPECT_TRUE(has(r.text, "fuel=10000"));
  EXPECT_TRUE(has(run({"eval", "--expr", "mu(comp(C[2];S))", "--args", "7", "--fuel", "1000"}).text, "OutOfFuel"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"parse", "--tree", "b(c"}).code, 2);
  EXPECT_EQ(run({"dse", "solve", "--preset", "nope"}).code, 2);
  EXPECT_EQ(run({"eval", "--expr", "S", "--args", "1,2"}).code, 2);
  EXPECT_EQ(run({"operad", "solve", "--series", "1,1", "--beta", "1:1"}).code, 2);
  EXPECT_EQ(run({"dse", "check-hopf", "--series", "1,0,1", "--cutoff", "3"}).code, 1);
  EXPECT_EQ(run({"cocycle-check", "--op", "binary:r", "--max-degree", "2"}).code, 1);
  EXPECT_EQ(run({"flowchart", "--tree", "r(in(S),in(S))"}).code, 1);
  EXPECT_EQ(run({"flowchart", "--tree", "c(in(S),in(S))", "--args", "3"}).code, 0);
  EXPECT_EQ(run({"dse", "check-hopf", "--preset", "foissy-geometric", "--cutoff", "3"}).code, 0);
  EXPECT_EQ(run({"properad", "verify", "--preset", "properad-diagonal", "--cutoff", "2"}).code, 0);
}

TEST(Cli, Json) {
  auto r = run({"dse", "solve", "--series", "geometric", "--cutoff", "2", "--json"});
  ASSERT_EQ(r.code, 0);
  auto j = flowhopf::Json::parse(r.text);
  EXPECT_EQ(j["meta"]["cutoff"], 2);
  const auto& x2 = j["components"][2];
  EXPECT_EQ(x2["mode"], "nc");
  EXPECT_EQ(x2["cutoff"], 2);
  EXPECT_EQ(x2["terms"][0]["coef"], "1");
  EXPECT_EQ(x2["terms"][0]["forest"][0]["label"], "b");
  EXPECT_EQ(x2["terms"][0]["forest"][0]["children"][0]["label"], "b");

  r = run({"renorm", "--preset", "halting-demo", "--json"});
  ASSERT_EQ(r.code, 0);
  j = flowhopf::Json::parse(r.text);
  for (const char* key : {"phi", "phi_minus", "phi_plus", "fuel", "eps"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j["phi"]["polar"].contains("3"));
  EXPECT_TRUE(j["phi_plus"]["polar"].empty());

  r = run({"coproduct", "--tree", "b(c)", "--json"});
  j = flowhopf::Json::parse(r.text);
  EXPECT_EQ(j["coproduct"]["terms"].size(), 3u);
  EXPECT_TRUE(j["coproduct"]["terms"][0].contains("left"));
}

TEST(Cli, Deterministic) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"flowchart", "--random", "30", "--seed", "4"},
        std::vector<std::string>{"properad", "solve", "--preset", "properad-diagonal", "--cutoff", "2", "--json"},
        std::vector<std::string>{"renorm", "--tree", "c(m(in(comp(C[2];S))),in(S))", "--k", "3,1"}})
    EXPECT_EQ(run(args).text, run(args).text);
}
