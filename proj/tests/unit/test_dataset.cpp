#include <doctest.h>

#include <cmath>
#include <string>

#include "natfx/dataset.hpp"
#include "natfx/errors.hpp"

using namespace natfx;

namespace {
const Roles kRoles{"A", "M1", std::string("M2"), "Y", {"age"}};
}

TEST_CASE("well-formed file") {
  auto d = parse_dataset("A,M1,M2,Y,age\n1,0,1,2.5,40\n0,1,1,3,51\n1,1,0,-1e-1,60\n", kRoles, {});
  CHECK(d.rows() == 3);
  CHECK(d.dropped() == 0);
  CHECK(d.column("Y").values()[2] == doctest::Approx(-0.1));
  CHECK(d.column("A").levels() == std::vector<std::string>{"0", "1"});
}

TEST_CASE("missing bound cell drops the row") {
  auto d = parse_dataset("A,M1,M2,Y,age,note\n1,0,1,,40,x\n0,1,1,3,51,\n", kRoles, {});
  CHECK(d.rows() == 1);
  CHECK(d.dropped() == 1);
  CHECK(d.source_row(0) == 2);
  CHECK_FALSE(d.has("note"));
}

TEST_CASE("header errors name every missing column") {
  Roles r = kRoles;
  r.covariates = {"bmi", "sex"};
  try {
    parse_dataset("A,M1,M2,Y\n1,0,1,2\n", r, {});
    FAIL("expected UnknownColumn");
  } catch (const UnknownColumn& e) {
    std::string msg = e.what();
    CHECK(msg.find("bmi") != std::string::npos);
    CHECK(msg.find("sex") != std::string::npos);
  }
}

TEST_CASE("RFC 4180 quoting") {
  auto recs = parse_csv("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n\"multi\nline\",2\n");
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].fields[0] == "x, y");
  CHECK(recs[1].fields[1] == "say \"hi\"");
  CHECK(recs[2].fields[0] == "multi\nline");
  CHECK(recs[2].line == 3);
  CHECK_THROWS_AS(parse_csv("a,b\n\"open,1\n"), CsvError);
  CHECK_THROWS_AS(parse_dataset("A,M1,M2,Y,age\n1,0,1,2,3,4\n", kRoles, {}), CsvError);
}

TEST_CASE("unparseable numeric cell") {
  try {
    parse_dataset("A,M1,M2,Y,age\n1,0,1,abc,40\n", kRoles, {});
    FAIL("expected UnparseableCell");
  } catch (const UnparseableCell& e) {
    std::string msg = e.what();
    CHECK(msg.find("abc") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
  }
}

TEST_CASE("log transform domain") {
  LoadOptions numeric{true};
  std::vector<Transform> t{{"M2", Transform::Kind::Log}};
  auto d = parse_dataset("A,M1,M2,Y,age\n1,0,2.718281828459045,1,1\n0,1,1,1,1\n", kRoles, t, numeric);
  CHECK(d.column("M2").values()[0] == doctest::Approx(1.0));
  CHECK(d.applied_transforms() == std::vector<std::string>{"log(M2)"});
  try {
    parse_dataset("A,M1,M2,Y,age\n1,0,1,1,1\n0,1,0,1,1\n1,1,-3,1,1\n", kRoles, t, numeric);
    FAIL("expected TransformDomainError");
  } catch (const TransformDomainError& e) {
    std::string msg = e.what();
    CHECK(msg.find("2, 3") != std::string::npos);
  }
}

TEST_CASE("every row missing") {
  CHECK_THROWS_AS(parse_dataset("A,M1,M2,Y,age\n1,,1,1,1\n", kRoles, {}), InvalidArgument);
}

TEST_CASE("resampling keeps columns aligned") {
  auto d = parse_dataset("A,M1,M2,Y,age\n1,0,1,10,40\n0,1,1,20,51\n", kRoles, {});
  std::vector<std::size_t> rows{1, 1, 0};
  auto r = d.take(rows);
  CHECK(r.rows() == 3);
  CHECK(r.column("Y").values() == std::vector<double>{20, 20, 10});
  CHECK(r.column("A").label(2) == "1");
}

TEST_CASE("roles JSON") {
  auto r = Roles::from_json(R"({"exposure":"alcohol","m1":"bmi","m2":"ggt","outcome":"sbp","covariates":["sex","age"]})");
  CHECK(r.exposure == "alcohol");
  CHECK(r.m2 == std::optional<std::string>("ggt"));
  CHECK(Roles::from_json(r.to_json()).covariates == r.covariates);
  CHECK_THROWS_AS(Roles::from_json(R"({"exposure":"a"})"), InvalidArgument);
}
