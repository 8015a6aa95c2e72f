#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "nvscat/error.hpp"
#include "nvscat/scattering.hpp"

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

TEST_CASE("vacuum scattering data") {
  Grid g = make_grid(8.0, 32);
  Potential v = gaussian(g, 0.0);
  for (cplx l : {cplx(0.5, 0), std::polar(1.0, 0.3), std::polar(3.0, 2.0)}) {
    LambdaRecord r = evaluate_lambda(v, l, {});
    CHECK(r.has_a);
    CHECK(r.a == cplx(0));
    CHECK(r.b == cplx(0));
    CHECK(r.det.delta == cplx(1));
  }
}

TEST_CASE("born limit matches the closed-form transform") {
  Grid g = make_grid(8.0, 32);
  const double A = 1e-4;
  Potential v = gaussian(g, A);
  for (cplx l : {cplx(0.5, 0), std::polar(0.7, 1.0), std::polar(1.6, -0.4)}) {
    cplx w = l - 1.0 / std::conj(l);
    // vhat at the real frequency vector i w, for exp(-|z|^2)
    double exact = A * std::exp(-std::norm(w) / 4) / (4 * pi);
    LambdaRecord r = evaluate_lambda(v, l, no_det());
    CAPTURE(l);
    CHECK(std::abs(born_b(v, l) - exact) <= 1e-12 * exact);
    CHECK(std::abs(r.b - exact) <= 1e-3 * exact);
  }
}

TEST_CASE("a tends to vhat(0) at large and small lambda") {
  Grid g = make_grid(8.0, 32);
  Potential v = gaussian(g, 0.5);
  cplx v0 = fourier_hat_v(v, 0.0);
  CHECK(std::abs(v0 - 0.5 / (4 * pi)) <= 1e-12);
  for (double r : {0.02, 50.0}) {
    LambdaRecord rec = evaluate_lambda(v, std::polar(r, 0.4), no_det());
    CHECK(std::abs(rec.a - v0) <= 1e-2 * std::abs(v0));
    CHECK(rec.flagged("b_aliased"));
    CHECK(rec.flagged("root_out_of_band"));
    CHECK_FALSE(rec.has_b);
  }
}

TEST_CASE("a equals b on the unit circle") {
  Grid g = make_grid(8.0, 32);
  Potential v = gaussian(g, 0.5, {0.6, -0.3});
  for (double ph : {0.0, 1.0, 2.5}) {
    LambdaRecord r = evaluate_lambda(v, std::polar(1.0, ph), no_det());
    CHECK(r.flagged("near_T"));
    CHECK(std::abs(r.a - r.b) <= 1e-12 * std::abs(r.a));
  }
}

TEST_CASE("b symmetries for an even potential") {
  Grid g = make_grid(8.0, 32);
  Potential v = gaussian(g, 0.5);
  cplx l = std::polar(0.6, 0.7);
  cplx b0 = evaluate_lambda(v, l, no_det()).b;
  cplx b1 = evaluate_lambda(v, 1.0 / std::conj(l), no_det()).b;
  cplx b2 = evaluate_lambda(v, -1.0 / std::conj(l), no_det()).b;
  CHECK(std::abs(b1 - std::conj(b0)) <= 1e-8 * std::abs(b0));
  CHECK(std::abs(b2 - b0) <= 1e-8 * std::abs(b0));
}

TEST_CASE("b under z -> -z for an off-center potential") {
  // b_v(-1/conj lambda) = conj b_w(lambda) with w(z) = v(-z)
  Grid g = make_grid(8.0, 32);
  Potential v = gaussian(g, 0.5, {0.75, 0.5});
  Potential w = gaussian(g, 0.5, {-0.75, -0.5});
  cplx l = std::polar(0.6, 0.7);
  cplx bv = evaluate_lambda(v, -1.0 / std::conj(l), no_det()).b;
  cplx bw = evaluate_lambda(w, l, no_det()).b;
  CHECK(std::abs(bv - std::conj(bw)) <= 1e-8 * std::abs(bw));
}

TEST_CASE("b aliasing guard") {
  Grid g = make_grid(8.0, 32);
  CHECK(b_frequency_limit(g) == doctest::Approx(pi / (2 * 0.5)));
  CHECK(b_resolved(g, 0.5));
  CHECK_FALSE(b_resolved(g, 0.2));
  Potential v = gaussian(g, 0.5);
  MuField m = solve_mu(v, build_greens_table(g, 0.2));
  CHECK_THROWS_AS(compute_b(v, m), Error);
}

TEST_CASE("r(lambda) sign and scale") {
  CHECK(r_of_b(0.5, 1.0) == cplx(2 * pi, 0));
  CHECK(r_of_b(2.0, 1.0) == cplx(-pi / 2, 0));
  CHECK(r_of_b(1.0, 1.0) == cplx(0, 0));
}

TEST_CASE("translation keeps a and rotates b by a unimodular phase") {
  Grid g = make_grid(8.0, 32);
  Potential v = gaussian(g, 0.5);
  Potential t = translate_potential(v, {1.0, 1.0});
  for (cplx l : {cplx(0.5, 0), std::polar(1.0, 0.8)}) {
    LambdaRecord a = evaluate_lambda(v, l, no_det()), b = evaluate_lambda(t, l, no_det());
    CHECK(std::abs(a.a - b.a) <= 1e-8 * std::abs(a.a));
    CHECK(std::abs(std::abs(a.b) - std::abs(b.b)) <= 1e-8 * std::abs(a.b));
  }
}

TEST_CASE("threaded scan is identical to the serial scan") {
  Grid g = make_grid(8.0, 16);
  Potential v = gaussian(g, 0.5);
  LambdaGridSpec s;
  s.r_min = 0.5;
  s.annuli = 2;
  s.phases = 3;
  s.t_points = 3;
  LambdaGrid lg = make_lambda_grid(s);
  ScanOptions o1, o2;
  o2.threads = 3;
  ScatteringData d1 = scan(v, lg, o1), d2 = scan(v, lg, o2);
  REQUIRE(d1.records.size() == d2.records.size());
  for (std::size_t i = 0; i < d1.records.size(); ++i) {
    CHECK(d1.records[i].a == d2.records[i].a);
    CHECK(d1.records[i].b == d2.records[i].b);
    CHECK(d1.records[i].det.delta == d2.records[i].det.delta);
  }
  CHECK_THROWS_AS(scan(v, std::vector<cplx>{0.0}, o1), Error);
}

TEST_CASE("json round trip is bit-exact") {
  Grid g = make_grid(8.0, 16);
  Potential v = gaussian(g, 0.5, {0.2, 0.1});
  ScatteringData d = scan(v, std::vector<cplx>{0.5, std::polar(1.0, 0.3), std::polar(0.05, 1.0)});
  d.config_hash = "abc";
  auto path = std::filesystem::temp_directory_path() / "nvscat_test_scan.json";
  write_scattering_json(d, path.string());
  ScatteringData r = read_scattering_json(path.string());
  std::filesystem::remove(path);
  CHECK(r.fingerprint == d.fingerprint);
  CHECK(r.config_hash == "abc");
  CHECK(r.vhat0 == d.vhat0);
  REQUIRE(r.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto &x = d.records[i], &y = r.records[i];
    CHECK(x.lambda == y.lambda);
    CHECK(x.has_a == y.has_a);
    CHECK(x.has_b == y.has_b);
    if (x.has_a) CHECK(x.a == y.a);
    if (x.has_b) CHECK(x.b == y.b);
    CHECK(x.det.delta == y.det.delta);
    CHECK(x.flags == y.flags);
    CHECK(x.mu_residual == y.mu_residual);
  }
  CHECK_THROWS_AS(scattering_from_json_string("{not json"), Error);
}

TEST_CASE("csv headers") {
  Grid g = make_grid(8.0, 16);
  ScatteringData d = scan(gaussian(g, 0.5), std::vector<cplx>{0.5});
  auto path = std::filesystem::temp_directory_path() / "nvscat_test_det.csv";
  write_determinant_csv(d, path.string());
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::filesystem::remove(path);
  CHECK(header == "re_lambda,im_lambda,abs_lambda,arg_lambda,re_delta,im_delta,method,hs_norm,flag");
  CHECK(row.find("lu-logdet") != std::string::npos);
  CHECK(row.substr(row.rfind(',') + 1) == "ok");
}
