#include "sharpk/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>
#include <string>

#include "numeric.hpp"

namespace sharpk {

WalshMartingale::WalshMartingale(std::vector<std::vector<double>> tables) : tables_(std::move(tables)) {
  if (tables_.empty()) throw std::invalid_argument("martingale needs at least one step");
  if (tables_.size() > 20) throw std::invalid_argument("martingale limited to 20 steps");
  for (std::size_t l = 0; l < tables_.size(); ++l) {
    if (tables_[l].size() != (std::size_t{1} << l))
      throw std::invalid_argument("table " + std::to_string(l + 1) + " must have " + std::to_string(1u << l) + " entries");
    for (double v : tables_[l])
      if (!std::isfinite(v)) throw std::invalid_argument("martingale tables must be finite");
  }
}

double WalshMartingale::increment(int l, std::uint32_t w) const {
  const double eps = ((w >> (l - 1)) & 1u) ? -1.0 : 1.0;
  return eps * tables_[static_cast<std::size_t>(l - 1)][w & ((1u << (l - 1)) - 1u)];
}

std::vector<double> WalshMartingale::transformed_sum(std::span<const int> signs) const {
  if (static_cast<int>(signs.size()) != steps()) throw std::invalid_argument("sign vector length must equal r");
  const std::uint32_t atoms = 1u << steps();
  std::vector<double> s(atoms, 0.0);
  for (std::uint32_t w = 0; w < atoms; ++w) {
    double v = 0.0;
    for (int l = 1; l <= steps(); ++l) v += signs[static_cast<std::size_t>(l - 1)] * increment(l, w);
    s[w] = v;
  }
  return s;
}

WalshMartingale WalshMartingale::apply_signs(std::span<const int> signs) const {
  if (static_cast<int>(signs.size()) != steps()) throw std::invalid_argument("sign vector length must equal r");
  auto t = tables_;
  for (std::size_t l = 0; l < t.size(); ++l)
    for (auto& v : t[l]) v *= signs[l];
  return WalshMartingale(std::move(t));
}

namespace {

double power_sum(std::span<const double> values, double p) {
  detail::CompensatedSum acc;
  for (double v : values) acc.add(p == 2.0 ? v * v : std::pow(std::abs(v), p));
  return acc.value();
}

void check_signs(std::span<const int> signs) {
  for (int s : signs)
    if (s != 1 && s != -1) throw std::invalid_argument("signs must be +1 or -1");
}

}  // namespace

double transform_ratio(const WalshMartingale& m, std::span<const int> signs, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  check_signs(signs);
  const std::vector<int> ones(signs.size(), 1);
  const double den = power_sum(m.transformed_sum(ones), p);
  if (den == 0.0) throw std::invalid_argument("zero martingale");
  return std::pow(power_sum(m.transformed_sum(signs), p) / den, 1.0 / p);
}

double burkholder_ceiling(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  return std::max(p, p / (p - 1.0)) - 1.0;
}

namespace {

// Increment matrix x[l][w]; the search keeps it and evaluates sums incrementally.
struct SearchState {
  int r;
  double p;
  std::vector<std::vector<double>> tables;
  std::vector<int> signs;
  std::vector<double> plain, signed_sum;
  long long evaluations = 0;

  double increment(int l, std::uint32_t w) const {
    const double eps = ((w >> l) & 1u) ? -1.0 : 1.0;
    return eps * tables[static_cast<std::size_t>(l)][w & ((1u << l) - 1u)];
  }

  void rebuild() {
    const std::uint32_t atoms = 1u << r;
    plain.assign(atoms, 0.0);
    signed_sum.assign(atoms, 0.0);
    for (std::uint32_t w = 0; w < atoms; ++w)
      for (int l = 0; l < r; ++l) {
        double x = increment(l, w);
        plain[w] += x;
        signed_sum[w] += signs[static_cast<std::size_t>(l)] * x;
      }
  }

  double ratio() {
    ++evaluations;
    double den = power_sum(plain, p);
    return den == 0.0 ? 0.0 : std::pow(power_sum(signed_sum, p) / den, 1.0 / p);
  }

  void flip(int l) {
    const std::uint32_t atoms = 1u << r;
    signs[static_cast<std::size_t>(l)] = -signs[static_cast<std::size_t>(l)];
    for (std::uint32_t w = 0; w < atoms; ++w) signed_sum[w] += 2.0 * signs[static_cast<std::size_t>(l)] * increment(l, w);
  }
};

UmdSearchResult run_start(int r, double p, long long budget, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SearchState st{r, p, {}, std::vector<int>(static_cast<std::size_t>(r), 1), {}, {}, 0};
  for (int l = 0; l < r; ++l) {
    std::vector<double> t(std::size_t{1} << l);
    for (auto& v : t) v = normal(rng);
    st.tables.push_back(std::move(t));
  }
  for (auto& s : st.signs) s = unit(rng) < 0.5 ? -1 : 1;
  st.rebuild();
  double best = st.ratio();

  auto sign_sweep = [&] {
    bool improved = true;
    while (improved && st.evaluations < budget) {
      improved = false;
      for (int l = 0; l < r && st.evaluations < budget; ++l) {
        st.flip(l);
        double v = st.ratio();
        if (v > best) {
          best = v;
          improved = true;
        } else {
          st.flip(l);
        }
      }
    }
  };

  sign_sweep();
  std::uniform_int_distribution<int> pick_layer(0, r - 1);
  while (st.evaluations < budget) {
    const int l = pick_layer(rng);
    auto& table = st.tables[static_cast<std::size_t>(l)];
    std::uniform_int_distribution<std::size_t> pick_entry(0, table.size() - 1);
    const bool whole = unit(rng) < 0.3;
    const auto saved = table;
    if (whole) {
      const double f = std::exp(0.7 * normal(rng));
      for (auto& v : table) v *= f;
    } else {
      auto& v = table[pick_entry(rng)];
      v *= std::exp(0.7 * normal(rng));
      if (unit(rng) < 0.2) v = -v;
    }
    st.rebuild();
    double v = st.ratio();
    if (v > best) {
      best = v;
      sign_sweep();
    } else {
      table = saved;
      st.rebuild();
    }
  }
  st.rebuild();
  UmdSearchResult out;
  out.martingale = WalshMartingale(st.tables);
  out.signs = st.signs;
  out.best_ratio = transform_ratio(out.martingale, out.signs, p);
  out.evaluations = st.evaluations;
  return out;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

UmdSearchResult umd_lower_search(int steps, double p, long long budget, std::uint64_t seed) {
  if (steps < 1 || steps > 14) throw std::invalid_argument("martingale search needs 1 <= r <= 14");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  const int starts = static_cast<int>(std::clamp<long long>(budget / 500, 1, 8));
  std::vector<std::future<UmdSearchResult>> jobs;
  std::uint64_t state = seed;
  for (int i = 0; i < starts; ++i) {
    state = splitmix(state);
    const long long share = budget / starts + (i < budget % starts ? 1 : 0);
    jobs.push_back(std::async(std::launch::async, run_start, steps, p, share, state));
  }
  UmdSearchResult best;
  bool first = true;
  long long total = 0;
  for (auto& j : jobs) {
    auto res = j.get();
    total += res.evaluations;
    if (first || res.best_ratio > best.best_ratio) {
      best = std::move(res);
      first = false;
    }
  }
  best.evaluations = total;
  return best;
}

int grid_sign(std::span<const int> b, std::span<const int> index, const TorusGrid& grid) {
  const long long m = grid.points();
  const long long o = grid.offset() ? 1 : 0;
  // 2M (b . t) = sum b_i (2 k_i + o - M); reduce modulo 2M into [-M, M).
  long long s = 0;
  for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * (2LL * index[i] + o - m);
  long long red = ((s + m) % (2 * m) + 2 * m) % (2 * m) - m;
  return red >= 0 ? 1 : -1;
}

SignFieldReport sign_field_check(const std::vector<std::vector<int>>& bs, const TorusGrid& grid) {
  if (!grid.offset()) throw std::invalid_argument("sign field check needs the half-cell offset grid");
  if (bs.empty()) throw std::invalid_argument("need at least one sign vector");
  if (bs.size() > 6) throw std::invalid_argument("sign field check limited to 6 layers");
  const std::size_t r = bs.size();
  const std::size_t block = grid.size();
  std::vector<std::vector<signed char>> table(r, std::vector<signed char>(block));
  SignFieldReport rep;
  rep.points_per_layer = static_cast<long long>(block);
  for (std::size_t l = 0; l < r; ++l) {
    if (static_cast<int>(bs[l].size()) != grid.dim()) throw std::invalid_argument("sign vector has the wrong length");
    for (int v : bs[l])
      if (v != 1 && v != -1) throw std::invalid_argument("sign vector entries must be +1 or -1");
    long long pos = 0;
    for_each_index(grid.dim(), grid.points(), [&](std::span<const int> idx, std::size_t flat) {
      int s = grid_sign(bs[l], idx, grid);
      table[l][flat] = static_cast<signed char>(s);
      if (s > 0) ++pos;
    });
    rep.positive.push_back(pos);
    rep.negative.push_back(static_cast<long long>(block) - pos);
  }
  rep.joint.assign(std::size_t{1} << r, 0);
  long double total = 1;
  for (std::size_t l = 0; l < r; ++l) total *= static_cast<long double>(block);
  if (total <= static_cast<long double>(std::size_t{1} << 26)) {
    std::vector<std::size_t> digit(r, 0);
    while (true) {
      std::size_t pattern = 0;
      for (std::size_t l = 0; l < r; ++l)
        if (table[l][digit[l]] < 0) pattern |= std::size_t{1} << l;
      ++rep.joint[pattern];
      std::size_t l = 0;
      while (l < r && ++digit[l] == block) digit[l++] = 0;
      if (l == r) break;
    }
  } else {
    // Product grid too large to walk; the product structure gives the counts directly.
    for (std::size_t pattern = 0; pattern < rep.joint.size(); ++pattern) {
      long long c = 1;
      for (std::size_t l = 0; l < r; ++l) c *= (pattern >> l & 1) ? rep.negative[l] : rep.positive[l];
      rep.joint[pattern] = c;
    }
  }
  rep.balanced = true;
  for (std::size_t l = 0; l < r; ++l) rep.balanced = rep.balanced && 2 * rep.positive[l] == rep.points_per_layer;
  rep.factorizes = true;
  for (std::size_t pattern = 0; pattern < rep.joint.size(); ++pattern) {
    long double expected = 1;
    for (std::size_t l = 0; l < r; ++l)
      expected *= static_cast<long double>((pattern >> l & 1) ? rep.negative[l] : rep.positive[l]);
    rep.factorizes = rep.factorizes && static_cast<long double>(rep.joint[pattern]) == expected;
  }
  return rep;
}

}  // namespace sharpk
