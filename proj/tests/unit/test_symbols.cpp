#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "sharpk/symbols.hpp"

using namespace sharpk;

namespace {

MultiIndex mi(std::initializer_list<int> v) { return MultiIndex(std::vector<int>(v)); }

// All proper nonempty subsets in the order of sorted index lists, checked directly.
std::optional<std::vector<int>> brute_parity_set(const MultiIndex& beta, const std::vector<MultiIndex>& alphas) {
  const int n = beta.dim();
  std::vector<std::vector<int>> subsets;
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(i);
    subsets.push_back(s);
  }
  std::sort(subsets.begin(), subsets.end());
  for (const auto& s : subsets) {
    auto sum = [&](const MultiIndex& m) {
      int t = 0;
      for (int i : s) t += m[i];
      return t;
    };
    const int pb = sum(beta) % 2;
    const int pa = sum(alphas[0]) % 2;
    bool ok = pa != pb;
    for (const auto& a : alphas) ok = ok && sum(a) % 2 == pa;
    if (ok) return s;
  }
  return std::nullopt;
}

}  // namespace

TEST_SUITE("symbols") {
  TEST_CASE("multi-index parsing") {
    MultiIndex m = MultiIndex::parse("1,2,0");
    CHECK(m.dim() == 3);
    CHECK(m.order() == 3);
    CHECK(m[1] == 2);
    CHECK(m.to_string() == "1,2,0");
    CHECK(MultiIndex::parse(" 3 , 1 ").order() == 4);
    for (const char* bad : {"", "1,,2", "1,-2", "a", "1,2,"}) CHECK_THROWS_AS(MultiIndex::parse(bad), std::invalid_argument);
    try {
      MultiIndex::parse("1,x");
      FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("position 3") != std::string::npos);
    }
  }

  TEST_CASE("symbol values") {
    HomogeneousSymbol s(mi({1, 1}));
    const int k11[] = {1, 1}, k33[] = {3, 3}, k05[] = {0, 5}, k00[] = {0, 0};
    CHECK(s(k11) == 0.5);
    CHECK(s(k33) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(HomogeneousSymbol(mi({2, 0}))(k05) == 0.0);
    CHECK(s(k00) == 0.0);
    CHECK(s.is_even());
    CHECK_FALSE(HomogeneousSymbol(mi({1, 0})).is_even());

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<int> beta(3), k(3), lk(3);
      for (auto& b : beta) b = static_cast<int>(rng() % 4);
      for (auto& v : k) v = static_cast<int>(rng() % 9) - 4;
      if (k == std::vector<int>{0, 0, 0}) k[0] = 1;
      const int lambda = 1 + static_cast<int>(rng() % 5);
      for (int i = 0; i < 3; ++i) lk[static_cast<std::size_t>(i)] = lambda * k[static_cast<std::size_t>(i)];
      HomogeneousSymbol h{MultiIndex(beta)};
      CHECK(h(lk) == doctest::Approx(h(k)).epsilon(1e-13));
      // direct evaluation of xi^beta / |xi|^|beta|
      double num = 1.0, r2 = 0.0;
      int order = 0;
      for (int i = 0; i < 3; ++i) {
        num *= std::pow(k[static_cast<std::size_t>(i)], beta[static_cast<std::size_t>(i)]);
        r2 += k[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)];
        order += beta[static_cast<std::size_t>(i)];
      }
      CHECK(h(k) == doctest::Approx(num / std::pow(r2, order / 2.0)).epsilon(1e-13));
    }
  }

  TEST_CASE("symbol gradient matches finite differences") {
    HomogeneousSymbol s(mi({2, 1, 1}));
    const std::vector<double> xi{0.7, -1.3, 0.4};
    auto g = s.gradient(xi);
    for (int i = 0; i < 3; ++i) {
      auto a = xi, b = xi;
      a[static_cast<std::size_t>(i)] += 1e-6;
      b[static_cast<std::size_t>(i)] -= 1e-6;
      CHECK(g[static_cast<std::size_t>(i)] == doctest::Approx((s.at(a) - s.at(b)) / 2e-6).epsilon(1e-6));
    }
  }

  TEST_CASE("eigenvalue on sign vectors") {
    const int b11[] = {1, 1}, b1m[] = {1, -1};
    CHECK(eigenvalue_on_sign_vector(HomogeneousSymbol(mi({1, 1})), b11) == 0.5);
    CHECK(eigenvalue_on_sign_vector(HomogeneousSymbol(mi({1, 1})), b1m) == -0.5);
    CHECK(eigenvalue_on_sign_vector(HomogeneousSymbol(mi({2, 0})), b1m) == 0.5);
    CHECK_THROWS_AS(eigenvalue_on_sign_vector(HomogeneousSymbol(mi({1, 0})), b11), std::invalid_argument);
    // agrees with the symbol evaluated at b itself (homogeneity)
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<int> beta(3), b(3);
      int order = 0;
      for (auto& x : beta) order += x = static_cast<int>(rng() % 4);
      if (order % 2) ++beta[0];
      for (auto& x : b) x = rng() % 2 ? 1 : -1;
      HomogeneousSymbol h{MultiIndex(beta)};
      CHECK(eigenvalue_on_sign_vector(h, b) == doctest::Approx(h(b)).epsilon(1e-14));
    }
  }

  TEST_CASE("parity sets") {
    std::vector<MultiIndex> cor12{mi({2, 0}), mi({0, 2})};
    CHECK(find_parity_set(mi({1, 1}), cor12) == std::vector<int>{0});
    std::vector<MultiIndex> same{mi({2, 0})};
    CHECK_FALSE(find_parity_set(mi({2, 0}), same));
    std::vector<MultiIndex> fourth{mi({4, 0}), mi({0, 4})};
    CHECK(find_parity_set(mi({3, 1}), fourth) == std::vector<int>{0});
    std::vector<MultiIndex> one{mi({1})};
    CHECK_FALSE(find_parity_set(mi({1}), one));
    std::vector<MultiIndex> mismatch{mi({1, 1, 0})};
    CHECK_THROWS_AS(find_parity_set(mi({1, 1}), mismatch), std::invalid_argument);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 4);
      auto random_index = [&] {
        std::vector<int> e(static_cast<std::size_t>(n));
        for (auto& x : e) x = static_cast<int>(rng() % 4);
        return MultiIndex(e);
      };
      MultiIndex beta = random_index();
      std::vector<MultiIndex> alphas;
      for (int j = 0; j < 1 + static_cast<int>(rng() % 3); ++j) alphas.push_back(random_index());
      auto got = find_parity_set(beta, alphas);
      CHECK(got == brute_parity_set(beta, alphas));
      if (got) CHECK(parity_certificate_holds(beta, alphas, *got));
    }
  }

  TEST_CASE("family validation") {
    DerivativeFamily fam;
    fam.beta = mi({1, 1});
    fam.alphas = {mi({2, 0}), mi({0, 2})};
    fam.p = 2.0;
    CHECK_NOTHROW(fam.validate());
    CHECK(fam.orders_match());
    fam.parity_set = std::vector<int>{0};
    CHECK(fam.is_normalized());
    fam.parity_set = std::vector<int>{0, 1};
    CHECK_THROWS_AS(fam.validate(), std::invalid_argument);
    fam.parity_set.reset();
    fam.p = 1.0;
    CHECK_THROWS_AS(fam.validate(), std::invalid_argument);
    fam.p = 2.0;
    fam.alphas.clear();
    CHECK_THROWS_AS(fam.validate(), std::invalid_argument);
  }

  TEST_CASE("normalization") {
    DerivativeFamily a;
    a.beta = mi({1, 1});
    a.alphas = {mi({2, 0}), mi({0, 2})};
    a.parity_set = std::vector<int>{0};
    DerivativeFamily na = normalize_family(a);
    CHECK(na.beta == a.beta);
    CHECK(na.alphas == a.alphas);

    DerivativeFamily b;
    b.beta = mi({2, 1});
    b.alphas = {mi({3, 0}), mi({0, 3})};
    b.parity_set = std::vector<int>{0};
    // alpha sums over F are 3 and 0, so F = {1} is not a certificate for this family.
    CHECK_THROWS_AS(normalize_family(b), std::invalid_argument);
    b.alphas = {mi({3, 0}), mi({1, 2})};
    DerivativeFamily nb = normalize_family(b);
    CHECK(nb.beta == mi({3, 1}));
    CHECK(nb.alphas == std::vector<MultiIndex>{mi({4, 0}), mi({2, 2})});
    CHECK(nb.is_normalized());

    DerivativeFamily c;
    c.beta = mi({1, 0, 1});
    c.alphas = {mi({2, 0, 0}), mi({0, 0, 2})};
    c.parity_set = std::vector<int>{0};
    CHECK(normalize_family(c).beta == c.beta);

    DerivativeFamily none;
    none.beta = mi({1, 1});
    none.alphas = {mi({2, 0})};
    CHECK_THROWS_AS(normalize_family(none), std::invalid_argument);

    std::mt19937_64 rng(4);
    int done = 0;
    while (done < 100) {
      const int n = 2 + static_cast<int>(rng() % 3);
      const int order = 1 + static_cast<int>(rng() % 5);
      auto random_index = [&] {
        std::vector<int> e(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < order; ++i) ++e[rng() % static_cast<unsigned>(n)];
        return MultiIndex(e);
      };
      DerivativeFamily f;
      f.beta = random_index();
      for (int j = 0; j < 1 + static_cast<int>(rng() % 3); ++j) f.alphas.push_back(random_index());
      f.parity_set = find_parity_set(f.beta, f.alphas);
      if (!f.parity_set) continue;
      ++done;
      DerivativeFamily g = normalize_family(f);
      CHECK(g.orders_match());
      CHECK(g.is_normalized());
      CHECK(g.beta.order() - f.beta.order() <= 2);
      DerivativeFamily h = normalize_family(g);
      CHECK(h.beta == g.beta);
      CHECK(h.alphas == g.alphas);
    }
  }

  TEST_CASE("convex combinations") {
    std::vector<MultiIndex> cor12{mi({2, 0}), mi({0, 2})};
    ConvexCheck c = convex_combination_check(mi({1, 1}), cor12);
    REQUIRE(c.feasible);
    CHECK(c.weights == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});

    std::vector<MultiIndex> single{mi({0, 2})};
    CHECK_FALSE(convex_combination_check(mi({2, 0}), single).feasible);

    std::vector<MultiIndex> three{mi({4, 0, 0}), mi({0, 4, 0}), mi({0, 0, 4})};
    ConvexCheck d = convex_combination_check(mi({1, 1, 2}), three);
    REQUIRE(d.feasible);
    CHECK(d.weights == std::vector<Rational>{Rational(1, 4), Rational(1, 4), Rational(1, 2)});

    // outside the segment
    std::vector<MultiIndex> seg{mi({2, 0}), mi({1, 1})};
    CHECK_FALSE(convex_combination_check(mi({0, 2}), seg).feasible);
    CHECK(format_rational(Rational(-3, 6)) == "-1/2");
    CHECK(format_rational(Rational(4)) == "4");
  }
}
