#include <catch_amalgamated.hpp>
#include <sstream>

#include "nocrit/cli/config.hpp"
#include "nocrit/cli/io.hpp"

using namespace nocrit;
using namespace nocrit::cli;

TEST_CASE("config file parsing") {
  std::istringstream in("# run\ndim = 32\n  seed=9   # trailing\n\ntol_rank = 1e-5\nout = a b\n");
  const auto kv = parse_key_values(in);
  REQUIRE(kv.size() == 4);
  CHECK(kv[1] == std::pair<std::string, std::string>{"seed", "9"});
  RunConfig c;
  for (const auto& [k, v] : kv) c.set(k, v);
  CHECK(c.dim == 32);
  CHECK(c.seed == 9);
  CHECK(c.tol_rank == 1e-5);
  CHECK(c.out == "a b");
  c.set("dim", "40");  // a later flag wins
  CHECK(c.dim == 40);
  CHECK_NOTHROW(c.validate());

  std::istringstream bad("dim 32\n");
  CHECK_THROWS_AS(parse_key_values(bad), ConfigError);
  CHECK_THROWS_AS(c.set("nope", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("dim", "12x"), ConfigError);
  CHECK_THROWS_AS(c.set("corpus", "-3"), ConfigError);
}

TEST_CASE("config validation") {
  RunConfig c;
  c.tol_fp = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.extraction_size = 40;  // 48 unguarded indices at D = 64
  CHECK_NOTHROW(c.validate());
  c.extraction_size = 45;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.extraction_size = 48;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.dim = 8;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("sparse vector json") {
  const SparseVec v(64, {{3, 0.5}, {17, -2.0}, {64, 1e-300}});
  const Json j = to_json(v);
  CHECK(j.dump() == R"({"entries":[[3,0.5],[17,-2.0],[64,1e-300]]})");
  CHECK(sparse_from_json(Json::parse(j.dump()), 64) == v);
  CHECK_THROWS_AS(sparse_from_json(Json::parse(R"({"entries":[[5,1],[2,1]]})"), 64), ConfigError);
  CHECK_THROWS_AS(sparse_from_json(Json::parse(R"({"entries":[[5]]})"), 64), ConfigError);
  CHECK_THROWS(sparse_from_json(Json::parse(R"({"entries":[[65,1]]})"), 64));
}

TEST_CASE("csv quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CsvWriter w({"id", "note"});
  w.row(std::vector<std::string>{"1", "x,y"});
  w.row(std::vector<double>{0.1, 2});
  CHECK(w.text() == "id,note\r\n1,\"x,y\"\r\n0.10000000000000001,2\r\n");
}

TEST_CASE("failure records") {
  const Json j = to_json(std::vector<FailureRecord>{{"flatten", "AC5", "flatten:picard-ratio", "ratio=0.7"}});
  CHECK(j.dump() ==
        R"({"failures":[{"subcommand":"flatten","check":"AC5","clause":"flatten:picard-ratio","detail":"ratio=0.7"}]})");
}
