#include <doctest.h>

#include <cmath>
#include <limits>

#include "dipole/error.hpp"
#include "dipole/report.hpp"

using namespace dipole;

TEST_CASE("statistical verdicts") {
  CHECK(statistical_check("a", "x", 1.0, 1.0, 0.1).verdict == Verdict::pass);
  CHECK(statistical_check("a", "x", 1.25, 1.0, 0.1).verdict == Verdict::warn);
  CHECK(statistical_check("a", "x", 1.35, 1.0, 0.1).verdict == Verdict::fail);
  CHECK(statistical_check("a", "x", 1.35, 1.0, 0.1).margin < 0.0);
}

TEST_CASE("names are unique") {
  Report r("t");
  r.add(make_check("one", "a", true, 1.0, 0.0));
  CHECK_THROWS_AS(r.add(make_check("one", "a", true, 1.0, 0.0)), Error);
}

TEST_CASE("json round trip") {
  Report r("title");
  r.add(make_check("one", "anchor one", true, 0.5, 1e-8, "detail"));
  Check inf = make_check("two", "anchor two", false, -std::numeric_limits<double>::infinity(), 0.1);
  r.add(inf);
  r.add(statistical_check("three", "anchor three", 1.25, 1.0, 0.1));
  const Report back = Report::from_json(r.to_json());
  CHECK(back.title() == "title");
  REQUIRE(back.checks().size() == 3);
  CHECK(back.checks()[0].detail == "detail");
  CHECK(std::isinf(back.checks()[1].margin));
  CHECK(back.checks()[2].verdict == Verdict::warn);
  CHECK(back.to_json() == r.to_json());
  CHECK_FALSE(back.passed());
  CHECK(back.count(Verdict::fail) == 1);
}

TEST_CASE("malformed json is rejected") {
  CHECK_THROWS(Report::from_json("{"));
  CHECK_THROWS(Report::from_json(R"({"schema_version": 99, "title": "", "checks": []})"));
}
