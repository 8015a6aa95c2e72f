#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nvscat/error.hpp"
#include "nvscat/verify.hpp"

using namespace nvscat;
using std::numbers::pi;

namespace {

Potential gaussian(const Grid& g, double A, cplx c = 0.0) {
  return sample_potential(g, Family::gaussian, {A, 1.0, 1.0, c});
}

ScanOptions no_det() {
  ScanOptions o;
  o.determinant = false;
  return o;
}

}  // namespace

TEST_CASE("report assembly") {
  VerificationReport empty = assemble_report({});
  CHECK(empty.overall);
  CHECK(empty.records.empty());

  std::vector<CheckRecord> recs{make_record("z.last", "x", 0.1, 1.0), make_record("a.first", "x", 2.0, 1.0)};
  VerificationReport r = assemble_report(recs);
  CHECK_FALSE(r.overall);
  CHECK(r.records[0].id == "a.first");
  CHECK(r.records[0].status == Status::fail);
  CHECK(r.records[1].status == Status::pass);

  CheckRecord inap = make_record("b", "x", 0, 0);
  inap.status = Status::inapplicable;
  CHECK(assemble_report({inap, make_record("c", "x", 0.5, 1.0)}).overall);

  CHECK_THROWS_AS(assemble_report({make_record("d", "x", 0, 1), make_record("d", "x", 0, 1)}), Error);
  CHECK_THROWS_AS(assemble_report({make_record("e", "", 0, 1)}), Error);

  CheckRecord nan = make_record("f", "x", std::nan(""), 1.0);
  nan.status = Status::pass;
  VerificationReport rn = assemble_report({nan});
  CHECK_FALSE(rn.overall);
  CHECK(rn.records[0].details.value("residual_invalid", false));
}

TEST_CASE("report json is deterministic without a timestamp") {
  std::vector<CheckRecord> recs{make_record("b", "y", 1e-5, 1e-3, "00ff"), make_record("a", "x", 0.0, 1.0)};
  recs[0].note = "n";
  auto j1 = report_to_json(assemble_report(recs, {{"k", 1}}));
  auto j2 = report_to_json(assemble_report(recs, {{"k", 1}}));
  CHECK(j1.dump() == j2.dump());
  CHECK_FALSE(j1.contains("timestamp"));
  CHECK(report_to_json(assemble_report(recs), true).contains("timestamp"));
  CHECK(j1["overall"] == "pass");
  CHECK(j1["records"][1]["note"] == "n");
  CHECK(j1["records"][1]["status"] == "pass");
  CHECK(j1["records"][0]["id"] == "a");
  std::string txt = report_text(assemble_report(recs));
  CHECK(txt.find("pass") != std::string::npos);
}

TEST_CASE("rel_diff") {
  CHECK(rel_diff(0.0, 0.0) == 0.0);
  CHECK(rel_diff(1.0, 0.0) == 1.0);
  CHECK(rel_diff(2.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("soliton mismatch closed form") {
  // c = 0, lambda = e^{i pi/6}/2: lambda^3 = i/8, lambda^-3 = -8i
  cplx l = std::polar(0.5, pi / 6);
  cplx m = soliton_mismatch(l, 0.0);
  CHECK(std::abs(m - cplx(0, 15.75)) <= 1e-12);
  // real lambda and real c: every term cancels
  CHECK(std::abs(soliton_mismatch(0.3, 4.0)) <= 1e-12);
  // the translation term alone for lambda on T vanishes
  cplx t = std::polar(1.0, 0.4);
  CHECK(std::abs(soliton_mismatch(t, {4, 3}) - soliton_mismatch(t, 0.0)) <= 1e-12);
}

TEST_CASE("annulus samples") {
  auto a = annulus_samples(0.01, 0.1, 200, 7), b = annulus_samples(0.01, 0.1, 200, 7);
  CHECK(a == b);
  CHECK(a != annulus_samples(0.01, 0.1, 200, 8));
  for (cplx l : a) {
    CHECK(std::abs(l) >= 0.01);
    CHECK(std::abs(l) <= 0.1);
  }
  CHECK_THROWS_AS(annulus_samples(0.1, 0.01, 4, 1), Error);
}

TEST_CASE("soliton obstruction statuses") {
  auto s = annulus_samples(10, 100, 64, 20240601);
  CheckRecord r = soliton_obstruction({4, 3}, s);
  CHECK(r.status == Status::pass);
  CHECK(r.residual == 0.0);
  CHECK(r.id == "soliton.c=4+3i");
  CheckRecord real = soliton_obstruction(0.0, {0.02, -0.05, 0.07});
  CHECK(real.status == Status::inapplicable);
  CHECK(real.note == "insufficient generic samples");
  CHECK_THROWS_AS(soliton_obstruction(0.0, {0.0}), Error);
}

TEST_CASE("d-bar checks on the zero potential") {
  Grid g = make_grid(8.0, 16);
  Potential v = gaussian(g, 0.0);
  CheckRecord a = check_dbar_a(v, std::polar(0.5, 0.7), no_det());
  CHECK(a.status != Status::fail);
  CHECK(a.residual <= 1e-12);
  CheckRecord on = check_dbar_a(gaussian(g, 0.5), std::polar(0.98, 0.7), no_det());
  CHECK(on.status == Status::inapplicable);
  CHECK(on.note == "stencil crosses T or E");
}

TEST_CASE("shift lemma with zero translation is exact") {
  Grid g = make_grid(8.0, 16);
  Potential v = gaussian(g, 0.5, {0.3, 0.0});
  CheckRecord c = check_shift_lemma(v, 0.0, {0.6, std::polar(1.0, 0.5)}, no_det());
  CHECK(c.status == Status::pass);
  CHECK(c.residual == 0.0);
}

TEST_CASE("transparency demo on a zero potential is skipped") {
  Grid g = make_grid(8.0, 16);
  LambdaGridSpec s;
  s.r_min = 0.5;
  s.annuli = 1;
  s.phases = 2;
  s.t_points = 2;
  CheckRecord c = transparency_chain_demo(gaussian(g, 0.0), make_lambda_grid(s), no_det());
  CHECK(c.status == Status::skipped);
}

TEST_CASE("d-bar residual for a shrinks with the grid step") {
  Potential c = gaussian(make_grid(8.0, 32), 0.5);
  Potential f = gaussian(make_grid(8.0, 64), 0.5);
  cplx l = std::polar(0.5, 0.3);
  CheckRecord rc = check_dbar_a(c, l, no_det()), rf = check_dbar_a(f, l, no_det());
  CAPTURE(rc.residual);
  CAPTURE(rf.residual);
  CHECK(rf.residual < rc.residual);
  CHECK(rf.status == Status::pass);
}

TEST_CASE("suite selection and cached scan reuse") {
  Grid g = make_grid(8.0, 16);
  Potential v = gaussian(g, 0.5);
  SuiteOptions o;
  o.lambda_grid.r_min = 0.5;
  o.lambda_grid.annuli = 1;
  o.lambda_grid.phases = 2;
  o.lambda_grid.t_points = 4;
  o.select = {"ab", "soliton"};
  ScatteringData first;
  VerificationReport r1 = run_suite(v, o, nullptr, &first);
  VerificationReport r2 = run_suite(v, o, &first);
  CHECK(report_to_json(r1).dump() == report_to_json(r2).dump());
  bool has_ab = false;
  for (const auto& c : r1.records) {
    CHECK((c.id.rfind("ab", 0) == 0 || c.id.rfind("soliton", 0) == 0));
    has_ab |= c.id == "ab.on_T";
  }
  CHECK(has_ab);
  CHECK(r1.overall);
}
