#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "nvscat/error.hpp"
#include "nvscat/grid.hpp"

using namespace nvscat;
using std::numbers::pi;

TEST_CASE("grid geometry") {
  Grid g = make_grid(8.0, 64);
  CHECK(g.h == doctest::Approx(0.25));
  CHECK(g.coord(0) == -8.0);
  CHECK(g.coord(32) == doctest::Approx(0.0));
  CHECK(g.node(32, 36) == cplx(0.0, 1.0));
  CHECK(g.index(2, 3) == 2u * 64 + 3);
  CHECK(g.size() == 4096u);
}

TEST_CASE("grid rejects bad descriptors") {
  CHECK_THROWS_AS(make_grid(8.0, 63), Error);
  CHECK_THROWS_AS(make_grid(8.0, 8), Error);
  CHECK_THROWS_AS(make_grid(0.0, 64), Error);
  CHECK_THROWS_AS(make_grid(-1.0, 64), Error);
}

TEST_CASE("family names round-trip") {
  for (Family f : {Family::gaussian, Family::exp_bump, Family::ring, Family::custom})
    CHECK(family_from_name(family_name(f)) == f);
  CHECK(std::string(family_name(Family::exp_bump)) == "exp-bump");
  CHECK_THROWS_AS(family_from_name("sech"), Error);
}

TEST_CASE("sampled families match their closed forms") {
  Grid g = make_grid(8.0, 32);
  PotentialParams p{0.7, 1.3, 2.0, {0.5, -0.25}};
  Potential v = sample_potential(g, Family::gaussian, p);
  for (int j : {0, 9, 16, 31}) {
    cplx z = g.node(j, 31 - j);
    CHECK(v.at(j, 31 - j) == doctest::Approx(0.7 * std::exp(-std::norm(z - p.center) / (1.3 * 1.3))));
  }
  Potential e = sample_potential(g, Family::exp_bump, p);
  cplx z = g.node(20, 11);
  CHECK(e.at(20, 11) == doctest::Approx(0.7 * std::exp(-2.0 * std::sqrt(std::norm(z - p.center) + 1))));
  CHECK_THROWS_AS(evaluate_family(Family::custom, p, 0.0), Error);
  CHECK_THROWS_AS(sample_potential(g, Family::custom, p), Error);
  CHECK_THROWS_AS(sample_potential(g, Family::gaussian, {1.0, -1.0, 1.0, {}}), Error);
}

TEST_CASE("fourier transform of a gaussian") {
  Grid g = make_grid(8.0, 64);
  const double A = 0.5, s = 1.0;
  Potential v = sample_potential(g, Family::gaussian, {A, s, 1.0, {0, 0}});
  for (cplx p : {cplx(0, 0), cplx(1.0, 0.5), cplx(-2.0, 1.5)}) {
    double exact = A * s * s * std::exp(-s * s * std::norm(p) / 4) / (4 * pi);
    cplx got = fourier_hat_v(v, p);
    CHECK(std::abs(got - exact) <= 1e-12 * exact);
  }
}

TEST_CASE("fourier transform at zero for exp-bump and ring") {
  Grid g = make_grid(8.0, 64);
  const double A = 0.3, alpha = 3.0, s = 0.9;
  Potential e = sample_potential(g, Family::exp_bump, {A, 1.0, alpha, {0, 0}});
  // 2 pi A int_1^inf s e^{-alpha s} ds / (4 pi^2)
  double e0 = A * std::exp(-alpha) * (1.0 / alpha + 1.0 / (alpha * alpha)) / (2 * pi);
  CHECK(std::abs(fourier_hat_v(e, 0.0) - e0) <= 1e-8 * e0);
  Potential r = sample_potential(g, Family::ring, {A, s, 1.0, {0, 0}});
  double r0 = A * std::pow(s, 4) / (4 * pi);
  CHECK(std::abs(fourier_hat_v(r, 0.0) - r0) <= 1e-10 * r0);
}

TEST_CASE("fourier transform of a real potential is hermitian") {
  Grid g = make_grid(6.0, 32);
  Potential v = sample_potential(g, Family::ring, {1.0, 1.0, 1.0, {0.3, 0.7}});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 20; ++i) {
    cplx p(u(rng), u(rng));
    CHECK(std::abs(fourier_hat_v(v, -p) - std::conj(fourier_hat_v(v, p))) <= 1e-15);
  }
}

TEST_CASE("translation moves the center and keeps the transform modulus") {
  Grid g = make_grid(8.0, 64);
  Potential v = sample_potential(g, Family::gaussian, {0.5, 1.0, 1.0, {0, 0}});
  Potential t = translate_potential(v, {1.0, 1.0});
  CHECK(t.params.center == cplx(1.0, 1.0));
  cplx p(0.8, -0.4);
  CHECK(std::abs(std::abs(fourier_hat_v(t, p)) - std::abs(fourier_hat_v(v, p))) <= 1e-12);
  CHECK_THROWS_AS(translate_potential(v, {5.0, 0.0}), Error);
  Potential c = custom_potential(g, v.samples);
  CHECK_THROWS_AS(translate_potential(c, {1.0, 0.0}), Error);
}

TEST_CASE("custom potential validation") {
  Grid g = make_grid(4.0, 16);
  CHECK_THROWS_AS(custom_potential(g, std::vector<double>(10, 0.0)), Error);
  std::vector<double> s(g.size(), 0.0);
  s[5] = std::nan("");
  CHECK_THROWS_AS(custom_potential(g, s), Error);
  s[5] = 0.0;
  CHECK(custom_potential(g, s).is_zero());
}

TEST_CASE("potential file round-trip is bit-exact") {
  Grid g = make_grid(8.0, 32);
  Potential v = sample_potential(g, Family::exp_bump, {0.4, 1.0, 1.5, {0.25, 0}});
  auto path = std::filesystem::temp_directory_path() / "nvscat_test_potential.bin";
  write_potential(v, path.string());
  Potential w = read_potential(path.string());
  std::filesystem::remove(path);
  CHECK(w.grid == v.grid);
  CHECK(w.family == v.family);
  CHECK(w.samples == v.samples);
  CHECK(fingerprint(w) == fingerprint(v));
  CHECK_THROWS_AS(read_potential("/nonexistent/nvscat.bin"), Error);
}

TEST_CASE("fingerprint tracks the samples") {
  Grid g = make_grid(8.0, 32);
  Potential a = sample_potential(g, Family::gaussian, {0.5, 1.0, 1.0, {0, 0}});
  Potential b = sample_potential(g, Family::gaussian, {0.5000001, 1.0, 1.0, {0, 0}});
  CHECK(fingerprint(a) != fingerprint(b));
  CHECK(fingerprint(a) == fingerprint(sample_potential(g, Family::gaussian, {0.5, 1.0, 1.0, {0, 0}})));
}

TEST_CASE("decay certificate bounds the weighted samples") {
  Grid g = make_grid(8.0, 32);
  Potential v = sample_potential(g, Family::exp_bump, {1.0, 1.0, 1.0, {0, 0}});
  CHECK(v.decay.q > 0.0);
  CHECK(v.decay.alpha > 0.0);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    double r = std::abs(g.node(int(i) / g.N, int(i) % g.N));
    CHECK(std::abs(v.samples[i]) * std::pow(1 + r, 2 + v.decay.eps) <= v.decay.q * (1 + 1e-12));
  }
}

TEST_CASE("spectral points") {
  CHECK(make_spectral_point(0.5).region == Region::inner);
  CHECK(make_spectral_point(2.0).region == Region::outer);
  auto t = make_spectral_point(std::polar(1.0, 0.3));
  CHECK(t.onT);
  CHECK(t.region == Region::circle);
  CHECK_THROWS_AS(make_spectral_point(0.0), Error);
}

TEST_CASE("default lambda grid") {
  LambdaGrid lg = make_lambda_grid({});
  int in = 0, out = 0, onT = 0;
  for (const auto& p : lg.points) {
    CHECK(p.lambda != cplx(0));
    if (p.onT) ++onT;
    else if (p.region == Region::inner) ++in;
    else ++out;
  }
  CHECK(onT == 32);
  CHECK(in == 96);
  CHECK(out == 96);
  CHECK(lg.points.size() == 224u);
  // every inner point has its mirror 1/conj(lambda)
  for (const auto& p : lg.points) {
    if (p.region != Region::inner) continue;
    cplx m = 1.0 / std::conj(p.lambda);
    bool found = false;
    for (const auto& q : lg.points) found = found || std::abs(q.lambda - m) < 1e-12 * std::abs(m);
    CHECK(found);
  }
  CHECK_THROWS_AS(make_lambda_grid({0.0, 0.9, 6, 16, 32, true, {}}), Error);
}
