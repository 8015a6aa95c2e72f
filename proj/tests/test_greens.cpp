#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>

#include "nvscat/error.hpp"
#include "nvscat/greens.hpp"

using namespace nvscat;
using std::numbers::pi;

namespace {

double table_max(const GreensTable& t) {
  double m = 0;
  for (cplx x : t.samples) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("symbol roots") {
  auto r = singular_points(0.5);
  REQUIRE(r.size() == 2);
  CHECK(std::abs(r[0]) == 0.0);
  CHECK(std::abs(r[1] - cplx(0, 1.5)) < 1e-15);
  for (cplx l : {cplx(0.5, 0), std::polar(0.3, 1.1), std::polar(3.0, -2.0)})
    for (cplx z : singular_points(l)) CHECK(std::abs(symbol_denominator(z, l)) <= 1e-12);
  CHECK(singular_points(std::polar(1.0, 0.7)).size() == 1);
  // away from the roots the symbol is bounded below
  CHECK(std::abs(symbol_denominator({1.0, 0.0}, 0.5)) > 0.1);
}

TEST_CASE("rule identifiers") {
  CHECK(std::string(rule_id(QuadratureRule::subtraction)) == "polar-subtraction-1");
  CHECK(std::string(rule_id(QuadratureRule::contour_shift)) == "contour-shift-1");
}

TEST_CASE("table layout and regularization record") {
  Grid g = make_grid(8.0, 32);
  GreensTable t = build_greens_table(g, 0.5);
  CHECK(t.samples.size() == 64u * 64u);
  CHECK(t.reg.points.size() == 2);
  CHECK(t.reg.error_estimate >= 0.0);
  CHECK(t.reg.error_estimate < 1e-6);
  CHECK_FALSE(t.reg.near_T);
  CHECK(build_greens_table(g, std::polar(1.0, 0.2)).reg.near_T);
  CHECK_THROWS_AS(build_greens_table(g, 0.0), Error);
}

TEST_CASE("half-turn covariance g(-z, -lambda) = g(z, lambda)") {
  Grid g = make_grid(8.0, 32);
  GreensTable a = build_greens_table(g, std::polar(0.6, 0.4));
  GreensTable b = build_greens_table(g, -std::polar(0.6, 0.4));
  double num = 0;
  for (int n1 = -31; n1 < 32; ++n1)
    for (int n2 = -31; n2 < 32; ++n2) num = std::max(num, std::abs(b.at(-n1, -n2) - a.at(n1, n2)));
  CHECK(num <= 1e-6 * table_max(a));
}

TEST_CASE("conjugation under lambda -> 1/conj(lambda)") {
  Grid g = make_grid(8.0, 32);
  for (cplx l : {cplx(0.5, 0), std::polar(0.2, 0.9), std::polar(0.9, -2.0), std::polar(1.1, 0.3)}) {
    GreensTable a = build_greens_table(g, l);
    GreensTable b = build_greens_table(g, 1.0 / std::conj(l));
    double num = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
      num = std::max(num, std::abs(b.samples[i] - std::conj(a.samples[i])));
    CAPTURE(l);
    CHECK(num <= 1e-4 * table_max(a));
  }
}

TEST_CASE("the two quadrature rules agree where both apply") {
  Grid g = make_grid(8.0, 64);
  for (cplx l : {cplx(0.5, 0), std::polar(0.6, 0.8)}) {
    GreensOptions s, c;
    s.force_rule = c.force_rule = true;
    s.rule = QuadratureRule::subtraction;
    c.rule = QuadratureRule::contour_shift;
    GreensTable a = build_greens_table(g, l, s), b = build_greens_table(g, l, c);
    CHECK(a.reg.rule == QuadratureRule::subtraction);
    CHECK(b.reg.rule == QuadratureRule::contour_shift);
    double num = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
      num = std::max(num, std::abs(a.samples[i] - b.samples[i]));
    CAPTURE(l);
    CHECK(num <= 1e-5 * table_max(a));
  }
}

TEST_CASE("G on the unit circle follows the modified Bessel kernel") {
  Grid g = make_grid(8.0, 64);
  // K0(1) to 17 digits, independent of the library reference
  CHECK(reference_G_on_T(1.0).real() == doctest::Approx(-0.42102443824070834 / (2 * pi)).epsilon(1e-14));
  for (double phase : {0.0, 1.3, 3.0}) {
    GreensTable t = build_pointwise_table(g, std::polar(1.0, phase), 4.5, 4);
    double worst = 0;
    for (int a = -20; a <= 20; ++a)
      for (int b = -20; b <= 20; ++b) {
        double r = std::hypot(a, b) * t.grid.h;
        if (r < 0.5 || r > 4.0) continue;
        cplx G = greens_G(t, a, b);
        worst = std::max(worst, std::abs(G / (-std::cyl_bessel_k(0.0, r) / (2 * pi)) - 1.0));
      }
    CAPTURE(phase);
    CHECK(worst < 1e-2);
  }
}

TEST_CASE("G conjugation symmetry at sampled points") {
  Grid g = make_grid(8.0, 32);
  cplx l = std::polar(0.7, 0.5);
  GreensTable a = build_greens_table(g, l), b = build_greens_table(g, 1.0 / std::conj(l));
  for (auto [n1, n2] : {std::pair{1, 0}, {3, -2}, {-5, 7}, {0, 4}})
    CHECK(std::abs(greens_G(b, n1, n2) - std::conj(greens_G(a, n1, n2))) <=
          1e-4 * std::abs(greens_G(a, n1, n2)) + 1e-12);
}

TEST_CASE("band test for the second root") {
  Grid g = make_grid(8.0, 128);
  CHECK(root_in_band(g, 0.5));
  CHECK(root_in_band(g, 0.06));
  CHECK_FALSE(root_in_band(g, 0.02));
  CHECK_FALSE(root_in_band(g, 50.0));
}

TEST_CASE("table cache round trip") {
  namespace fs = std::filesystem;
  Grid g = make_grid(8.0, 16);
  GreensTable t = build_greens_table(g, std::polar(0.4, 0.3));
  fs::path dir = fs::temp_directory_path() / "nvscat_test_cache";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_greens_table(t, (dir / "t.bin").string());
  GreensTable r = read_greens_table((dir / "t.bin").string());
  CHECK(r.samples == t.samples);
  CHECK(r.lambda == t.lambda);
  CHECK(r.reg.rule == t.reg.rule);
  CHECK(r.reg.error_estimate == t.reg.error_estimate);

  GreensOptions o;
  CHECK(greens_cache_key(g, 0.4, o) != greens_cache_key(g, 0.41, o));
  o.oversample = 8;
  CHECK(greens_cache_key(g, 0.4, o) != greens_cache_key(g, 0.4, GreensOptions{}));

  setenv("NVSCAT_CACHE_DIR", dir.string().c_str(), 1);
  GreensTable c1 = cached_greens_table(g, 0.4);
  std::size_t files = std::distance(fs::directory_iterator(dir), fs::directory_iterator{});
  GreensTable c2 = cached_greens_table(g, 0.4);
  unsetenv("NVSCAT_CACHE_DIR");
  CHECK(files == 2u);
  CHECK(c1.samples == c2.samples);
  CHECK(c1.samples == build_greens_table(g, 0.4).samples);
  fs::remove_all(dir);
  CHECK_THROWS_AS(read_greens_table((dir / "missing.bin").string()), Error);
}
