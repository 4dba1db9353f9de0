#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sharpk/torus.hpp"

using namespace sharpk;

namespace {

TorusField mode(const TorusGrid& g, std::vector<int> k, Complex c = 1.0) { return TorusField::from_modes(g, {{k, c}}); }

}  // namespace

TEST_SUITE("torus") {
  TEST_CASE("grid coordinates and frequency slots") {
    TorusGrid g(1, 8);
    CHECK(g.coordinate(0) == doctest::Approx(-0.5 + 1.0 / 16));
    CHECK(g.coordinate(7) == doctest::Approx(0.5 - 1.0 / 16));
    TorusGrid h(1, 8, false);
    CHECK(h.coordinate(0) == -0.5);
    CHECK(g.frequency(3) == 3);
    CHECK(g.frequency(4) == -4);
    for (int k = -4; k < 4; ++k) CHECK(g.frequency(g.slot(k)) == k);
    TorusGrid g2(2, 4);
    for (std::size_t f = 0; f < g2.size(); ++f) CHECK(g2.flat_index(g2.frequency_of(f)) == f);
    CHECK_THROWS_AS(TorusGrid(1, 7), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(-1, 8), std::invalid_argument);
  }

  TEST_CASE("constant and single mode transforms") {
    TorusGrid g(2, 8);
    TorusField one = to_spectral(TorusField::from_function(g, [](auto) { return Complex(1.0); }));
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(std::abs(one.values()[i] - (i == 0 ? Complex(1.0) : Complex(0.0))) < 1e-14);

    const std::vector<int> k0{3, -2};
    TorusField e = TorusField::from_function(g, [&](std::span<const double> t) {
      return std::polar(1.0, 2.0 * std::numbers::pi * (k0[0] * t[0] + k0[1] * t[1]));
    });
    TorusField s = to_spectral(e);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Complex want = g.frequency_of(i) == k0 ? Complex(1.0) : Complex(0.0);
      CHECK(std::abs(s.values()[i] - want) < 1e-13);
    }
  }

  TEST_CASE("forward transform agrees with a direct DFT") {
    std::mt19937_64 rng(1);
    for (int n = 1; n <= 3; ++n) {
      for (int m : {2, 4, 6}) {
        for (bool offset : {true, false}) {
          TorusGrid g(n, m, offset);
          TorusField f = oracle::random_physical(g, rng);
          const auto want = oracle::naive_forward(f);
          CHECK(oracle::max_diff(forward_transform(f).values(), want) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("square wave coefficients on M=64") {
    TorusGrid g(1, 64);
    TorusField f = TorusField::from_function(g, [](std::span<const double> t) { return Complex(oracle::square_wave(5, t[0])); });
    TorusField s = to_spectral(f);
    for (int k = -32; k < 32; ++k) {
      Complex want = 0.0;
      if (k % 2 != 0 && std::abs(k) <= 5) want = Complex(0.0, -2.0 / (std::numbers::pi * k));
      const int kk[] = {k};
      CHECK(std::abs(s.coefficient(kk) - want) < 1e-12);
    }
  }

  TEST_CASE("inverse transform") {
    TorusGrid g(2, 8);
    TorusField e = to_physical(mode(g, {1, 0}));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto t = g.point(i);
      CHECK(std::abs(e.values()[i] - std::polar(1.0, 2.0 * std::numbers::pi * t[0])) < 1e-14);
    }
    TorusField z = to_physical(TorusField::zeros(g, Representation::spectral));
    for (const auto& v : z.values()) CHECK(v == Complex(0.0));

    std::mt19937_64 rng(2);
    TorusGrid g16(2, 16);
    std::normal_distribution<double> normal;
    std::vector<Complex> spec(g16.size());
    for (auto& c : spec) c = Complex(normal(rng), normal(rng));
    TorusField s(g16, Representation::spectral, spec);
    CHECK(oracle::max_diff(to_spectral(to_physical(s)).values(), s.values()) < 1e-12);
  }

  TEST_CASE("round trip and Parseval on random fields") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 3);
      const int m = 2 * (1 + static_cast<int>(rng() % 6));
      TorusGrid g(n, m, rng() % 2 == 0);
      TorusField f = oracle::random_physical(g, rng);
      TorusField s = to_spectral(f);
      CHECK(oracle::max_diff(to_physical(s).values(), f.values()) < 1e-12);
      double mean = 0.0;
      for (const auto& v : f.values()) mean += std::norm(v);
      mean /= static_cast<double>(g.size());
      CHECK(spectral_energy(s) == doctest::Approx(mean).epsilon(1e-12));
    }
  }

  TEST_CASE("multipliers") {
    TorusGrid g(2, 8);
    std::mt19937_64 rng(4);
    TorusField f = project_mean_zero(oracle::random_physical(g, rng));
    TorusField id = apply_multiplier(f, [](std::span<const int>) { return Complex(1.0); });
    CHECK(oracle::max_diff(id.values(), f.values()) < 1e-13);
    CHECK(id.representation() == Representation::physical);

    auto m = [](std::span<const int> k) {
      const double r2 = k[0] * k[0] + k[1] * k[1];
      return r2 == 0.0 ? Complex(0.0) : Complex(k[0] * k[1] / r2);
    };
    TorusField a = apply_multiplier(mode(g, {1, 1}), m);
    const int k11[] = {1, 1}, k1m[] = {1, -1};
    CHECK(a.coefficient(k11) == Complex(0.5));
    TorusField b = apply_multiplier(mode(g, {1, -1}), m);
    CHECK(b.coefficient(k1m) == Complex(-0.5));
  }

  TEST_CASE("spectral derivatives") {
    TorusGrid g(2, 8);
    std::mt19937_64 rng(5);
    TorusField f = oracle::random_physical(g, rng);
    const int zero[] = {0, 0};
    CHECK(oracle::max_diff(spectral_derivative(f, zero).values(), f.values()) < 1e-12);
    const int g10[] = {1, 0}, g11[] = {1, 1};
    const int k10[] = {1, 0}, k11[] = {1, 1};
    CHECK(std::abs(spectral_derivative(mode(g, {1, 0}), g10).coefficient(k10) - Complex(0.0, 2.0 * std::numbers::pi)) <
          1e-13);
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(spectral_derivative(mode(g, {1, 1}), g11).coefficient(k11) + four_pi2) < 1e-12);
    // Nyquist slots carry no derivative.
    const int kn[] = {-4, 0};
    std::vector<Complex> v(g.size());
    v[g.flat_index(kn)] = 1.0;
    TorusField nyquist(g, Representation::spectral, v);
    CHECK(spectral_derivative(nyquist, g10).coefficient(kn) == Complex(0.0));
  }

  TEST_CASE("L^p norms") {
    TorusGrid g(2, 8);
    TorusField c = TorusField::from_function(g, [](auto) { return Complex(-3.0, 4.0); });
    for (double p : {1.5, 2.0, 4.0}) CHECK(lp_norm(c, p, 1) == doctest::Approx(5.0));
    for (double p : {1.25, 2.0, 3.0, 7.0}) CHECK(lp_norm(mode(g, {2, -1}), p) == doctest::Approx(1.0).epsilon(1e-13));

    TorusGrid g1(1, 8);
    TorusField cosine = TorusField::from_modes(g1, {{{1}, 1.0}, {{-1}, 1.0}});
    CHECK(std::abs(lp_norm(cosine, 2.0, 1) - std::sqrt(2.0)) < 1e-10);
    // mean of (2 cos)^4 = 16 * 3/8 = 6, exact once the grid resolves degree 4.
    CHECK(lp_norm(cosine, 4.0, 2) == doctest::Approx(std::pow(6.0, 0.25)).epsilon(1e-13));
    CHECK_THROWS_AS(lp_norm(cosine, 1.0), std::invalid_argument);
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(lp_norm(oracle::random_physical(g1, rng), 2.0, 2), std::invalid_argument);
  }

  TEST_CASE("mean projection, bandlimit, resampling") {
    TorusGrid g(2, 8);
    TorusField one = TorusField::from_function(g, [](auto) { return Complex(1.0); });
    TorusField zero = project_mean_zero(one);
    for (const auto& v : zero.values()) CHECK(std::abs(v) < 1e-15);
    TorusField f = TorusField::from_modes(g, {{{0, 0}, 3.0}, {{1, 0}, 1.0}});
    TorusField pm = project_mean_zero(f);
    const int k00[] = {0, 0}, k10[] = {1, 0};
    CHECK(std::abs(pm.coefficient(k00)) < 1e-15);
    CHECK(pm.coefficient(k10) == Complex(1.0));

    TorusField modes = TorusField::from_modes(g, {{{1, 2}, 1.0}, {{-3, 0}, 2.0}});
    CHECK(modes.bandlimit() == 3);
    TorusField cut = with_bandlimit(modes, 2);
    const int k30[] = {-3, 0}, k12[] = {1, 2};
    CHECK(cut.coefficient(k30) == Complex(0.0));
    CHECK(cut.coefficient(k12) == Complex(1.0));
    TorusField big = resample(modes, 32);
    CHECK(big.grid().points() == 32);
    CHECK(big.coefficient(k30) == Complex(2.0));
    std::vector<double> t{0.1, -0.3};
    CHECK(std::abs(evaluate(big, t) - evaluate(modes, t)) < 1e-13);
    CHECK_THROWS_AS(TorusField::from_modes(g, {{{4, 0}, 1.0}}), std::invalid_argument);
  }

  TEST_CASE("translation and evaluation") {
    TorusGrid g(2, 8);
    std::mt19937_64 rng(6);
    TorusField f = oracle::random_physical(g, rng);
    const int s[] = {3, -2}, back[] = {-3, 2};
    CHECK(oracle::max_diff(translate(translate(f, s), back).values(), f.values()) < 1e-15);
    TorusField spec = to_spectral(f);
    for (std::size_t i = 0; i < g.size(); i += 7) CHECK(std::abs(evaluate(spec, g.point(i)) - f.values()[i]) < 1e-12);
  }

  TEST_CASE("serialization round trip is exact") {
    std::mt19937_64 rng(7);
    for (bool spectral : {false, true}) {
      TorusGrid g(2, 6);
      TorusField f = oracle::random_physical(g, rng);
      if (spectral) f = with_bandlimit(to_spectral(f), 2);
      std::stringstream ss;
      write_field(ss, f);
      TorusField back = read_field(ss);
      CHECK(back.grid() == f.grid());
      CHECK(back.representation() == f.representation());
      CHECK(back.bandlimit() == f.bandlimit());
      CHECK(oracle::max_diff(back.values(), f.values()) == 0.0);
    }
    std::stringstream bad("{\"n\":1}\n");
    CHECK_THROWS_AS(read_field(bad), std::invalid_argument);
  }
}
