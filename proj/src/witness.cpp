#include "sharpk/witness.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "numeric.hpp"

namespace sharpk {

constexpr double kPi = std::numbers::pi;

TrigPoly1D::TrigPoly1D(std::map<int, Complex> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.count(0)) throw std::invalid_argument("trigonometric polynomial must have zero mean (no l = 0 term)");
}

int TrigPoly1D::degree() const {
  int d = 0;
  for (const auto& [l, c] : coeffs_) d = std::max(d, std::abs(l));
  return d;
}

Complex TrigPoly1D::coefficient(int l) const {
  auto it = coeffs_.find(l);
  return it == coeffs_.end() ? Complex(0.0) : it->second;
}

Complex TrigPoly1D::operator()(double theta) const {
  Complex total = 0.0;
  for (const auto& [l, c] : coeffs_) total += c * std::polar(1.0, 2.0 * kPi * l * theta);
  return total;
}

bool TrigPoly1D::is_real(double tol) const {
  for (const auto& [l, c] : coeffs_)
    if (std::abs(coefficient(-l) - std::conj(c)) > tol) return false;
  return true;
}

TrigPoly1D square_wave_poly(int degree) {
  if (degree < 1) throw std::invalid_argument("square wave degree must be at least 1");
  std::map<int, Complex> c;
  for (int l = 1; l <= degree; l += 2) {
    c[l] = Complex(0.0, -2.0 / (kPi * l));
    c[-l] = Complex(0.0, 2.0 / (kPi * l));
  }
  return TrigPoly1D(std::move(c));
}

double sign_approximation_error(const TrigPoly1D& a, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("sign approximation error needs p >= 1");
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const int panels = std::max(64, 16 * a.degree());
  // Real-valued a (the usual case) is summed with sines and cosines directly.
  std::vector<std::pair<int, Complex>> terms(a.coefficients().begin(), a.coefficients().end());
  auto value = [&](double theta) {
    Complex s = 0.0;
    for (const auto& [l, c] : terms) s += c * std::polar(1.0, 2.0 * kPi * l * theta);
    return s;
  };
  detail::CompensatedSum acc;
  for (int half = 0; half < 2; ++half) {
    const double sign = half == 0 ? 1.0 : -1.0;
    const double lo = half == 0 ? 0.0 : -0.5;
    const double width = 0.5 / panels;
    for (int i = 0; i < panels; ++i) {
      double x0 = lo + i * width;
      acc.add(Rule::integrate([&](double th) { return std::pow(std::abs(sign - value(th)), p); }, x0, x0 + width));
    }
  }
  return std::pow(acc.value(), 1.0 / p);
}

double square_wave_l2_error(int degree) {
  if (degree < 1) throw std::invalid_argument("square wave degree must be at least 1");
  detail::CompensatedSum s;
  for (int l = 1; l <= degree; l += 2) s.add(1.0 / (static_cast<double>(l) * l));
  return std::sqrt(std::max(0.0, 1.0 - 8.0 / (kPi * kPi) * s.value()));
}

TorusField lift_to_torus(const TrigPoly1D& a, std::span<const int> b, const TorusGrid& grid) {
  if (static_cast<int>(b.size()) != grid.dim()) throw std::invalid_argument("sign vector length differs from grid dimension");
  for (int bi : b)
    if (bi != 1 && bi != -1) throw std::invalid_argument("sign vector entries must be +1 or -1");
  if (a.degree() >= grid.points() / 2)
    throw std::invalid_argument("degree " + std::to_string(a.degree()) + " reaches the Nyquist limit of M = " +
                                std::to_string(grid.points()));
  std::vector<std::pair<std::vector<int>, Complex>> modes;
  for (const auto& [l, c] : a.coefficients()) {
    std::vector<int> k(b.begin(), b.end());
    for (auto& ki : k) ki *= l;
    modes.emplace_back(std::move(k), c);
  }
  TorusField spec = TorusField::from_modes(grid, modes);
  return inverse_transform(TorusField(grid, Representation::spectral, spec.data(), a.degree()));
}

std::vector<int> parity_sign_vector(int dim, std::span<const int> axes) {
  std::vector<int> b(static_cast<std::size_t>(dim), 1);
  for (int a : axes) b.at(static_cast<std::size_t>(a)) = -1;
  return b;
}

EigenPair eigen_witness_pair(const DerivativeFamily& fam, const TrigPoly1D& a, const TorusGrid& grid) {
  fam.validate();
  if (!fam.is_normalized())
    throw std::invalid_argument("eigen witnesses need a normalized family (|beta| even, odd beta-sum on F)");
  if (grid.dim() != fam.dim()) throw std::invalid_argument("grid dimension differs from the family dimension");
  EigenPair out{lift_to_torus(a, std::vector<int>(static_cast<std::size_t>(grid.dim()), 1), grid),
                lift_to_torus(a, parity_sign_vector(grid.dim(), *fam.parity_set), grid), {}, {}};
  out.b_plus.assign(static_cast<std::size_t>(grid.dim()), 1);
  out.b_minus = parity_sign_vector(grid.dim(), *fam.parity_set);
  return out;
}

namespace {

constexpr std::size_t kMaxStackPoints = std::size_t{1} << 24;

void check_signs(std::span<const int> signs, std::size_t r) {
  if (signs.size() != r) throw std::invalid_argument("sign vector length must equal the number of layers");
  for (int s : signs)
    if (s != 1 && s != -1) throw std::invalid_argument("layer signs must be +1 or -1");
}

TorusField assemble(const std::vector<StackLayer>& layers, std::span<const int> signs, int n) {
  const auto r = layers.size();
  const TorusGrid& g0 = layers.front().zeta.grid();
  TorusGrid grid(static_cast<int>(r) * n, g0.points(), g0.offset());
  if (grid.size() > kMaxStackPoints) throw std::invalid_argument("stack exceeds the desk-scale point budget");
  const std::size_t block = layers.front().zeta.grid().size();
  std::vector<std::vector<Complex>> zeta(r), phi(r);
  std::optional<int> band = 0;
  for (std::size_t l = 0; l < r; ++l) {
    zeta[l] = to_physical(layers[l].zeta).data();
    phi[l] = to_physical(layers[l].phi).data();
    for (const TorusField* f : {&layers[l].zeta, &layers[l].phi}) {
      if (f->grid().dim() == 0) continue;
      if (band && f->bandlimit())
        band = std::max(*band, *f->bandlimit());
      else
        band.reset();
    }
  }
  std::vector<Complex> v(grid.size());
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    Complex total = 0.0;
    std::size_t tail = grid.size();
    for (std::size_t l = 0; l < r; ++l) {
      // Row-major: block l occupies digit l (base M^n) counting from the most significant.
      tail /= block;
      std::size_t prefix = flat / (tail * block);
      std::size_t own = (flat / tail) % block;
      total += static_cast<double>(signs[l]) * zeta[l][own] * phi[l][prefix];
    }
    v[flat] = total;
  }
  return TorusField(grid, Representation::physical, std::move(v), band);
}

}  // namespace

StackedField bourgain_stack(const std::vector<TorusField>& zetas, const std::vector<TorusField>& phis,
                            std::optional<std::vector<int>> signs) {
  if (zetas.empty()) throw std::invalid_argument("stack needs at least one layer");
  if (phis.size() != zetas.size()) throw std::invalid_argument("stack needs one Phi per zeta");
  const int n = zetas.front().grid().dim();
  const int m = zetas.front().grid().points();
  const bool offset = zetas.front().grid().offset();
  if (n < 1) throw std::invalid_argument("zeta layers must live on T^n with n >= 1");
  const std::size_t r = zetas.size();
  if (static_cast<int>(r) * n > 6) throw std::invalid_argument("stack limited to r*n <= 6 dimensions");
  StackedField out;
  out.base_dim = n;
  for (std::size_t l = 0; l < r; ++l) {
    const auto& z = zetas[l].grid();
    const auto& f = phis[l].grid();
    if (z.dim() != n) throw std::invalid_argument("zeta layer " + std::to_string(l + 1) + " has the wrong dimension");
    if (f.dim() != static_cast<int>(l) * n)
      throw std::invalid_argument("Phi layer " + std::to_string(l + 1) + " must live on T^" + std::to_string(l * n));
    if (z.points() != m || f.points() != m || z.offset() != offset || f.offset() != offset)
      throw std::invalid_argument("all stack layers must share M and offset");
    out.layers.push_back({to_physical(zetas[l]), to_physical(phis[l])});
  }
  out.signs = signs ? *signs : std::vector<int>(r, 1);
  check_signs(out.signs, r);
  out.assembled = assemble(out.layers, out.signs, n);
  return out;
}

StackedField resign(const StackedField& stack, std::vector<int> signs) {
  check_signs(signs, stack.layers.size());
  StackedField out = stack;
  out.signs = std::move(signs);
  out.assembled = assemble(out.layers, out.signs, out.base_dim);
  return out;
}

double theorem_lower_bound(const DerivativeFamily& fam, const StackedField& plus, const StackedField& signed_stack,
                           int oversample) {
  fam.validate();
  if (!(plus.assembled.grid() == signed_stack.assembled.grid()))
    throw std::invalid_argument("stacks live on different grids");
  if (plus.depth() != signed_stack.depth()) throw std::invalid_argument("stacks have different depths");
  const double den = lp_norm(plus.assembled, fam.p, oversample);
  if (den == 0.0) throw std::invalid_argument("unsigned stack has zero norm");
  return lp_norm(signed_stack.assembled, fam.p, oversample) / den / fam.count();
}

double a_norm(const TorusField& f) {
  TorusField spec = to_spectral(f);
  detail::CompensatedSum acc;
  for (const auto& z : spec.values()) acc.add(std::abs(z));
  return acc.value();
}

std::vector<long long> default_shift_sequence(int bandlimit, int layers) {
  if (bandlimit < 1 || layers < 1) throw std::invalid_argument("shift sequence needs B >= 1 and at least one layer");
  std::vector<long long> m{4LL * bandlimit + 1};
  for (int l = 1; l < layers; ++l) m.push_back(m.back() * (4LL * bandlimit * layers + 1));
  return m;
}

namespace {

struct ShiftedMode {
  std::vector<long long> freq;     // output frequency on T^n
  std::vector<long long> inner;    // M_bar_{l-1} . s, the part the multiplier should not see
  std::vector<int> last;           // k, the last block
  Complex value;                   // coefficient times e_{(s,k)}(tbar)
};

std::vector<ShiftedMode> shifted_modes(const TorusField& f, std::span<const long long> mbar, std::span<const double> tbar,
                                       int& n_out, int& band_out) {
  const std::size_t layers = mbar.size();
  if (layers == 0) throw std::invalid_argument("shift needs at least one scale");
  const auto& g = f.grid();
  if (g.dim() == 0 || g.dim() % static_cast<int>(layers) != 0)
    throw std::invalid_argument("field dimension is not a multiple of the number of scales");
  if (static_cast<int>(tbar.size()) != g.dim()) throw std::invalid_argument("base point has the wrong dimension");
  const int n = g.dim() / static_cast<int>(layers);
  const int b = f.bandlimit() ? *f.bandlimit() : g.points() / 2 - 1;
  for (std::size_t i = 0; i < layers; ++i)
    if (mbar[i] < 1 || (i && mbar[i] <= mbar[i - 1])) throw std::invalid_argument("scales must be positive and increasing");
  if (mbar[0] <= 2LL * b) throw std::invalid_argument("first scale must exceed twice the bandlimit");
  // Axes decouple, so injectivity reduces to one axis over [-B, B]^layers.
  {
    std::set<long long> seen;
    std::vector<int> digit(layers, -b);
    while (true) {
      long long q = 0;
      for (std::size_t i = 0; i < layers; ++i) q += mbar[i] * digit[i];
      if (!seen.insert(q).second)
        throw std::invalid_argument("frequency collision: scales do not grow fast enough for bandlimit " +
                                    std::to_string(b));
      std::size_t i = 0;
      while (i < layers && ++digit[i] > b) digit[i++] = -b;
      if (i == layers) break;
    }
  }
  TorusField spec = to_spectral(f);
  std::vector<ShiftedMode> out;
  long long reach = 0;
  for (auto m : mbar) reach += m * b;
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const Complex c = spec.data()[flat];
    if (c == Complex(0.0)) continue;
    auto k = g.frequency_of(flat);
    ShiftedMode mode{std::vector<long long>(static_cast<std::size_t>(n)), std::vector<long long>(static_cast<std::size_t>(n)),
                     std::vector<int>(static_cast<std::size_t>(n)), c};
    double phase = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (std::abs(k[i]) > b) throw std::invalid_argument("field has content above its bandlimit");
      phase += k[i] * tbar[i];
      const std::size_t blk = i / static_cast<std::size_t>(n), axis = i % static_cast<std::size_t>(n);
      mode.freq[axis] += mbar[blk] * k[i];
      if (blk + 1 < layers)
        mode.inner[axis] += mbar[blk] * k[i];
      else
        mode.last[axis] = k[i];
    }
    mode.value *= std::polar(1.0, 2.0 * kPi * phase);
    out.push_back(std::move(mode));
  }
  n_out = n;
  band_out = static_cast<int>(std::min<long long>(reach, 1 << 30));
  return out;
}

}  // namespace

TorusField bourgain_shift(const TorusField& f, std::span<const long long> mbar, std::span<const double> tbar) {
  int n = 0, reach = 0;
  auto modes = shifted_modes(f, mbar, tbar, n, reach);
  int points = 2;
  while (points / 2 <= reach) points *= 2;
  TorusGrid grid(n, points, f.grid().offset());
  if (grid.size() > kMaxStackPoints) throw std::invalid_argument("shifted field exceeds the desk-scale point budget");
  std::vector<Complex> v(grid.size());
  std::vector<int> k(static_cast<std::size_t>(n));
  for (const auto& m : modes) {
    for (int i = 0; i < n; ++i) k[static_cast<std::size_t>(i)] = static_cast<int>(m.freq[static_cast<std::size_t>(i)]);
    v[grid.flat_index(k)] = m.value;
  }
  return TorusField(grid, Representation::spectral, std::move(v), reach);
}

double sampled_gradient_sup(const HomogeneousSymbol& s, int samples) {
  const int n = s.beta().dim();
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(0.5, 4.0);
  double best = 0.0;
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int i = 0; i < samples; ++i) {
    double r2 = 0.0;
    for (auto& zi : z) {
      zi = normal(rng);
      r2 += zi * zi;
    }
    if (r2 == 0.0) continue;
    const double rad = (i % 2 == 0) ? 0.5 : radius(rng);
    for (auto& zi : z) zi *= rad / std::sqrt(r2);
    double g2 = 0.0;
    for (double gi : s.gradient(z)) g2 += gi * gi;
    best = std::max(best, std::sqrt(g2));
  }
  return best;
}

CommutationReport commutation_error(const TorusField& f, const HomogeneousSymbol& s, std::span<const long long> mbar,
                                    std::span<const double> tbar) {
  int n = 0, reach = 0;
  auto modes = shifted_modes(f, mbar, tbar, n, reach);
  if (s.beta().dim() != n) throw std::invalid_argument("symbol dimension differs from the base dimension");
  CommutationReport rep;
  detail::CompensatedSum err, anorm;
  const double top = static_cast<double>(mbar.back());
  std::vector<double> q(static_cast<std::size_t>(n));
  for (const auto& m : modes) {
    if (std::all_of(m.last.begin(), m.last.end(), [](int k) { return k == 0; }))
      throw std::invalid_argument("commutation bound needs a field that is mean-zero in its last block");
    double inner2 = 0.0;
    for (int i = 0; i < n; ++i) {
      q[static_cast<std::size_t>(i)] = static_cast<double>(m.freq[static_cast<std::size_t>(i)]);
      inner2 += static_cast<double>(m.inner[static_cast<std::size_t>(i)]) * static_cast<double>(m.inner[static_cast<std::size_t>(i)]);
    }
    err.add(std::abs(s.at(q) - s(m.last)) * std::abs(m.value));
    anorm.add(std::abs(m.value));
    rep.displacement = std::max(rep.displacement, std::sqrt(inner2) / top);
  }
  double lower2 = 0.0;
  for (std::size_t i = 0; i + 1 < mbar.size(); ++i) lower2 += static_cast<double>(mbar[i]) * static_cast<double>(mbar[i]);
  rep.error = err.value();
  rep.input_a_norm = anorm.value();
  rep.sup_gradient = sampled_gradient_sup(s);
  rep.bound = rep.displacement * 1.1 * rep.sup_gradient * rep.input_a_norm;
  rep.literal_bound = std::sqrt(lower2) / top * rep.sup_gradient * rep.input_a_norm;
  return rep;
}

}  // namespace sharpk
