#include "sharpk/symbols.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sharpk {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_)
    if (e < 0) throw std::invalid_argument("multi-index entries must be nonnegative");
}

MultiIndex MultiIndex::parse(std::string_view text) {
  std::vector<int> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("cannot parse multi-index \"" + std::string(text) + "\": " + what + " at position " +
                                std::to_string(i + 1));
  };
  auto skip_space = [&] {
    while (i < text.size() && text[i] == ' ') ++i;
  };
  skip_space();
  if (i == text.size()) fail("empty input");
  while (true) {
    skip_space();
    if (i == text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) {
      if (i < text.size() && text[i] == '-') fail("negative entry");
      fail(i == text.size() ? "missing entry" : std::string("unexpected '") + text[i] + "'");
    }
    long value = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      value = value * 10 + (text[i] - '0');
      if (value > 1000) fail("entry too large");
      ++i;
    }
    out.push_back(static_cast<int>(value));
    skip_space();
    if (i == text.size()) break;
    if (text[i] != ',') fail(std::string("unexpected '") + text[i] + "'");
    ++i;
  }
  return MultiIndex(std::move(out));
}

int MultiIndex::order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

MultiIndex MultiIndex::plus_unit(int axis) const {
  if (axis < 0 || axis >= dim()) throw std::invalid_argument("axis out of range");
  auto e = entries_;
  ++e[static_cast<std::size_t>(axis)];
  return MultiIndex(std::move(e));
}

int MultiIndex::sum_over(std::span<const int> axes) const {
  int s = 0;
  for (int a : axes) s += entries_.at(static_cast<std::size_t>(a));
  return s;
}

std::string MultiIndex::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(entries_[i]);
  }
  return s;
}

bool DerivativeFamily::orders_match() const {
  return std::all_of(alphas.begin(), alphas.end(), [&](const MultiIndex& a) { return a.order() == beta.order(); });
}

bool parity_certificate_holds(const MultiIndex& beta, std::span<const MultiIndex> alphas, std::span<const int> axes) {
  const int n = beta.dim();
  if (axes.empty() || static_cast<int>(axes.size()) >= n || alphas.empty()) return false;
  for (int a : axes)
    if (a < 0 || a >= n) return false;
  const int q = alphas.front().sum_over(axes) % 2;
  for (const auto& a : alphas)
    if (a.sum_over(axes) % 2 != q) return false;
  return beta.sum_over(axes) % 2 != q;
}

void DerivativeFamily::validate() const {
  if (beta.dim() < 1) throw std::invalid_argument("beta must have at least one entry");
  if (alphas.empty()) throw std::invalid_argument("family needs at least one alpha");
  for (std::size_t j = 0; j < alphas.size(); ++j)
    if (alphas[j].dim() != beta.dim())
      throw std::invalid_argument("alpha " + std::to_string(j + 1) + " has length " + std::to_string(alphas[j].dim()) +
                                  ", beta has " + std::to_string(beta.dim()));
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  if (parity_set && !parity_certificate_holds(beta, alphas, *parity_set))
    throw std::invalid_argument("declared parity set is not a valid certificate");
}

bool DerivativeFamily::is_normalized() const {
  return parity_set && parity_certificate_holds(beta, alphas, *parity_set) && beta.order() % 2 == 0 &&
         beta.sum_over(*parity_set) % 2 == 1;
}

HomogeneousSymbol::HomogeneousSymbol(MultiIndex beta) : beta_(std::move(beta)) {
  if (beta_.dim() < 1) throw std::invalid_argument("symbol needs a multi-index of length at least 1");
}

HomogeneousSymbol make_symbol(const MultiIndex& beta) { return HomogeneousSymbol(beta); }

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// |xi|^order from the squared radius; integer powers keep even orders exact.
double radius_power(double r2, int order) {
  double r = ipow(r2, order / 2);
  return order % 2 ? r * std::sqrt(r2) : r;
}

}  // namespace

double HomogeneousSymbol::operator()(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != beta_.dim()) throw std::invalid_argument("frequency has wrong length");
  double r2 = 0.0, num = 1.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    r2 += static_cast<double>(k[i]) * k[i];
    num *= ipow(k[i], beta_[static_cast<int>(i)]);
  }
  if (r2 == 0.0) return 0.0;
  return num / radius_power(r2, beta_.order());
}

double HomogeneousSymbol::at(std::span<const double> xi) const {
  if (static_cast<int>(xi.size()) != beta_.dim()) throw std::invalid_argument("point has wrong length");
  double r2 = 0.0, num = 1.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    r2 += xi[i] * xi[i];
    num *= ipow(xi[i], beta_[static_cast<int>(i)]);
  }
  if (r2 == 0.0) return 0.0;
  return num / radius_power(r2, beta_.order());
}

std::vector<double> HomogeneousSymbol::gradient(std::span<const double> xi) const {
  const int n = beta_.dim();
  if (static_cast<int>(xi.size()) != n) throw std::invalid_argument("point has wrong length");
  double r2 = 0.0;
  for (double x : xi) r2 += x * x;
  if (r2 == 0.0) throw std::invalid_argument("symbol gradient undefined at the origin");
  const int order = beta_.order();
  const double inv = 1.0 / radius_power(r2, order);
  double mono = 1.0;
  for (int i = 0; i < n; ++i) mono *= ipow(xi[static_cast<std::size_t>(i)], beta_[i]);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    if (beta_[i] > 0) {
      double reduced = beta_[i];
      for (int j = 0; j < n; ++j) reduced *= ipow(xi[static_cast<std::size_t>(j)], beta_[j] - (j == i ? 1 : 0));
      d = reduced * inv;
    }
    d -= order * mono * xi[static_cast<std::size_t>(i)] * inv / r2;
    g[static_cast<std::size_t>(i)] = d;
  }
  return g;
}

double eigenvalue_on_sign_vector(const HomogeneousSymbol& s, std::span<const int> b) {
  if (!s.is_even()) throw std::invalid_argument("eigenvalue on sign vectors needs an even-order symbol");
  const int n = s.beta().dim();
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("sign vector has wrong length");
  double sign = 1.0;
  for (int i = 0; i < n; ++i) {
    int bi = b[static_cast<std::size_t>(i)];
    if (bi != 1 && bi != -1) throw std::invalid_argument("sign vector entries must be +1 or -1");
    if (bi < 0 && s.beta()[i] % 2) sign = -sign;
  }
  return sign * std::pow(static_cast<double>(n), -0.5 * s.beta().order());
}

std::optional<std::vector<int>> find_parity_set(const MultiIndex& beta, std::span<const MultiIndex> alphas) {
  const int n = beta.dim();
  for (const auto& a : alphas)
    if (a.dim() != n) throw std::invalid_argument("multi-indices have mismatched lengths");
  if (n > 20) throw std::invalid_argument("parity search limited to n <= 20");
  if (alphas.empty() || n < 2) return std::nullopt;
  std::optional<std::vector<int>> best;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<int> axes;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) axes.push_back(i);
    if (parity_certificate_holds(beta, alphas, axes) && (!best || axes < *best)) best = std::move(axes);
  }
  return best;
}

DerivativeFamily normalize_family(const DerivativeFamily& fam) {
  if (!fam.parity_set) throw std::invalid_argument("normalize_family needs a parity set");
  const auto& axes = *fam.parity_set;
  if (!parity_certificate_holds(fam.beta, fam.alphas, axes))
    throw std::invalid_argument("normalize_family: parity set is empty, full, or not a certificate");
  DerivativeFamily out = fam;
  auto bump = [&](int axis) {
    out.beta = out.beta.plus_unit(axis);
    for (auto& a : out.alphas) a = a.plus_unit(axis);
  };
  if (out.beta.sum_over(axes) % 2 == 0) bump(*std::min_element(axes.begin(), axes.end()));
  if (out.beta.order() % 2 == 1) {
    int t = 0;
    while (std::find(axes.begin(), axes.end(), t) != axes.end()) ++t;
    bump(t);
  }
  return out;
}

namespace {

// Solves A x = b exactly for a column-independent A; nullopt when columns are dependent or the system is inconsistent.
std::optional<std::vector<Rational>> solve_exact(std::vector<std::vector<Rational>> rows, std::size_t cols) {
  const std::size_t m = rows.size();
  std::size_t r = 0;
  std::vector<std::size_t> pivot_row(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t piv = r;
    while (piv < m && rows[piv][c] == 0) ++piv;
    if (piv == m) return std::nullopt;
    std::swap(rows[piv], rows[r]);
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || rows[i][c] == 0) continue;
      Rational factor = rows[i][c] / rows[r][c];
      for (std::size_t j = c; j <= cols; ++j) rows[i][j] -= factor * rows[r][j];
    }
    pivot_row[c] = r++;
  }
  for (std::size_t i = r; i < m; ++i)
    if (rows[i][cols] != 0) return std::nullopt;
  std::vector<Rational> x(cols);
  for (std::size_t c = 0; c < cols; ++c) x[c] = rows[pivot_row[c]][cols] / rows[pivot_row[c]][c];
  return x;
}

}  // namespace

ConvexCheck convex_combination_check(const MultiIndex& beta, std::span<const MultiIndex> alphas) {
  const std::size_t n = static_cast<std::size_t>(beta.dim());
  const std::size_t count = alphas.size();
  if (count == 0) throw std::invalid_argument("convex check needs at least one alpha");
  if (count > 20) throw std::invalid_argument("convex check limited to N <= 20");
  for (const auto& a : alphas)
    if (a.dim() != beta.dim()) throw std::invalid_argument("multi-indices have mismatched lengths");
  // Basic feasible solutions use at most n+1 independent columns of [alpha; 1].
  const std::size_t max_support = std::min(count, n + 1);
  for (std::size_t size = 1; size <= max_support; ++size) {
    std::vector<bool> pick(count, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
      std::vector<std::size_t> cols;
      for (std::size_t j = 0; j < count; ++j)
        if (pick[j]) cols.push_back(j);
      std::vector<std::vector<Rational>> rows(n + 1, std::vector<Rational>(size + 1));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < size; ++c) rows[i][c] = alphas[cols[c]][static_cast<int>(i)];
        rows[i][size] = beta[static_cast<int>(i)];
      }
      for (std::size_t c = 0; c <= size; ++c) rows[n][c] = 1;
      auto x = solve_exact(std::move(rows), size);
      if (x && std::all_of(x->begin(), x->end(), [](const Rational& v) { return v >= 0; })) {
        ConvexCheck out{true, std::vector<Rational>(count)};
        for (std::size_t c = 0; c < size; ++c) out.weights[cols[c]] = (*x)[c];
        return out;
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return {};
}

std::string format_rational(const Rational& q) {
  auto num = boost::multiprecision::numerator(q);
  auto den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace sharpk
