#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "perfora/grid.hpp"
#include "perfora/json_io.hpp"
#include "perfora/solver.hpp"

using namespace perfora;
using nlohmann::json;

TEST_CASE("domain JSON round-trips bit-exactly") {
  json j = {
      {"schema", 1},
      {"dim", 2},
      {"mode", "periodic"},
      {"t", {1.5, 0.5}},
      {"hole", {{"kind", "ball"}, {"center", {0.1, -0.1}}, {"radius", 0.2}}},
      {"modifications",
       {{{"cell", {0, 0}},
         {"hole", {{"kind", "box"}, {"center", {0.0, 0.0}}, {"half_widths", {0.3, 0.2}}}}}}},
  };
  PerforatedDomain dom = domain_from_json(j);
  json out = domain_to_json(dom);
  CHECK(out == j);
  // A second pass is canonical.
  CHECK(domain_to_json(domain_from_json(out)) == out);
  CHECK(out.dump() == domain_to_json(domain_from_json(out)).dump());
}

TEST_CASE("union, mask, empty, and cylinder holes round-trip") {
  json mask_hole;
  {
    int res = 4;
    std::vector<int> bits(16, 0);
    bits[5] = 1;
    bits[6] = 1;
    mask_hole = {{"kind", "mask"}, {"dim", 2}, {"resolution", res}, {"bits", bits}};
  }
  json j = {{"schema", 1},
            {"dim", 2},
            {"mode", "periodic"},
            {"t", {1.0, 1.0}},
            {"hole",
             {{"kind", "union"},
              {"parts",
               {{{"kind", "ball"}, {"center", {0.0, 0.0}}, {"radius", 0.1}}, mask_hole}}}}};
  CHECK(domain_to_json(domain_from_json(j)) == j);

  json cyl = {{"schema", 1},
              {"dim", 2},
              {"mode", "cylinder"},
              {"t", {1.0}},
              {"hole", {{"kind", "ball"}, {"center", {0.0, 0.0}}, {"radius", 0.2}}},
              {"cylinder", {{"periodic_axes", 1}, {"slab_width", 1.0}}}};
  CHECK(domain_to_json(domain_from_json(cyl)) == cyl);
}

TEST_CASE("unknown keys are rejected by name") {
  json j = {{"schema", 1},
            {"dim", 2},
            {"t", {1.0, 1.0}},
            {"extra_key", true},
            {"hole", {{"kind", "ball"}, {"center", {0.0, 0.0}}, {"radius", 0.2}}}};
  try {
    domain_from_json(j);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("extra_key") != std::string::npos);
  }
  json h = {{"kind", "ball"}, {"center", {0.0, 0.0}}, {"radius", 0.2}, {"colour", "red"}};
  CHECK_THROWS_AS(hole_from_json(h), std::invalid_argument);
}

TEST_CASE("schema and value validation") {
  json j = {{"schema", 2},
            {"dim", 2},
            {"t", {1.0, 1.0}},
            {"hole", {{"kind", "ball"}, {"center", {0.0, 0.0}}, {"radius", 0.2}}}};
  CHECK_THROWS_AS(domain_from_json(j), std::invalid_argument);
  j["schema"] = 1;
  j["t"] = {1.0, 0.0};  // zero period entry
  CHECK_THROWS_AS(domain_from_json(j), std::invalid_argument);
  j["t"] = {1.0, 1.0};
  j["hole"] = {{"kind", "wedge"}};
  CHECK_THROWS_AS(domain_from_json(j), std::invalid_argument);
  CHECK_THROWS_AS(domain_from_file("does_not_exist.json"), std::invalid_argument);
}

TEST_CASE("reports embed version and config and serialize deterministically") {
  PerforatedDomain dom = PerforatedDomain::periodic(
      2, {1.0, 1.0}, HoleShape::ball(Point{0.0, 0.0}, 0.25));
  Grid g = discretize(dom, 0, 1.0 / 16);
  SolveConfig cfg;
  cfg.p = 2;
  cfg.q = 4;
  cfg.tol = 1e-9;
  SolveReport rep = lambda_pq(g, cfg);
  json j = report_to_json(rep, cfg);
  CHECK(j["version"] == kArtifactVersion);
  CHECK(j["config"]["p"] == 2.0);
  CHECK(j["config"]["tol"] == 1e-9);
  CHECK(j.dump() == report_to_json(rep, cfg).dump());

  // The same solve twice gives byte-identical serialized reports.
  SolveReport rep2 = lambda_pq(g, cfg);
  CHECK(report_to_json(rep2, cfg).dump() == j.dump());
}
