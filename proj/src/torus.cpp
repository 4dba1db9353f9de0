#include "sharpk/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "numeric.hpp"
#include "torus_detail.hpp"

namespace sharpk {
namespace {

constexpr std::size_t kMaxPoints = std::size_t{1} << 26;

std::size_t checked_size(int dim, int points) {
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) {
    if (total > kMaxPoints / static_cast<std::size_t>(points))
      throw std::invalid_argument("grid too large: " + std::to_string(points) + "^" + std::to_string(dim));
    total *= static_cast<std::size_t>(points);
  }
  return total;
}

}  // namespace

namespace detail {

std::vector<Complex> axis_phase(const TorusGrid& g) {
  std::vector<Complex> phase(static_cast<std::size_t>(g.points()));
  const double o = g.offset() ? 1.0 : 0.0;
  for (int s = 0; s < g.points(); ++s) {
    int k = g.frequency(s);
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    phase[static_cast<std::size_t>(s)] = sign * std::polar(1.0, -std::numbers::pi * k * o / g.points());
  }
  return phase;
}

}  // namespace detail

namespace {

using detail::axis_phase;

// Multiplies every slot by prod_i table[slot_i].
void apply_separable(std::vector<Complex>& values, const TorusGrid& g, const std::vector<Complex>& table) {
  for_each_index(g.dim(), g.points(), [&](std::span<const int> idx, std::size_t flat) {
    Complex w = 1.0;
    for (int s : idx) w *= table[static_cast<std::size_t>(s)];
    values[flat] *= w;
  });
}

}  // namespace

TorusGrid::TorusGrid(int dim, int points, bool offset) : dim_(dim), points_(points), offset_(offset) {
  if (dim < 0) throw std::invalid_argument("grid dimension must be nonnegative");
  if (points < 2 || points % 2 != 0) throw std::invalid_argument("points per axis must be a positive even integer");
  size_ = checked_size(dim, points);
}

double TorusGrid::coordinate(int index) const {
  return (index + (offset_ ? 0.5 : 0.0)) / points_ - 0.5;
}

std::vector<double> TorusGrid::point(std::size_t flat) const {
  std::vector<double> t(static_cast<std::size_t>(dim_));
  for (int i = dim_ - 1; i >= 0; --i) {
    t[static_cast<std::size_t>(i)] = coordinate(static_cast<int>(flat % static_cast<std::size_t>(points_)));
    flat /= static_cast<std::size_t>(points_);
  }
  return t;
}

bool TorusGrid::representable(std::span<const int> freq) const {
  if (static_cast<int>(freq.size()) != dim_) return false;
  return std::all_of(freq.begin(), freq.end(), [&](int k) { return k >= -points_ / 2 && k < points_ / 2; });
}

std::size_t TorusGrid::flat_index(std::span<const int> freq) const {
  if (!representable(freq)) throw std::invalid_argument("frequency not representable on grid");
  std::size_t flat = 0;
  for (int k : freq) flat = flat * static_cast<std::size_t>(points_) + static_cast<std::size_t>(slot(k));
  return flat;
}

std::vector<int> TorusGrid::frequency_of(std::size_t flat) const {
  std::vector<int> k(static_cast<std::size_t>(dim_));
  for (int i = dim_ - 1; i >= 0; --i) {
    k[static_cast<std::size_t>(i)] = frequency(static_cast<int>(flat % static_cast<std::size_t>(points_)));
    flat /= static_cast<std::size_t>(points_);
  }
  return k;
}

void for_each_index(int dim, int points, const std::function<void(std::span<const int>, std::size_t)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  std::size_t total = checked_size(dim, points);
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(idx, flat);
    for (int i = dim - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < points) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
}

TorusField::TorusField(TorusGrid grid, Representation rep, std::vector<Complex> values, std::optional<int> bandlimit)
    : grid_(grid), rep_(rep), values_(std::move(values)), bandlimit_(bandlimit) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field has " + std::to_string(values_.size()) + " values, grid needs " +
                                std::to_string(grid_.size()));
  if (bandlimit_) {
    int b = *bandlimit_;
    if (b < 0 || b >= grid_.points() / 2)
      throw std::invalid_argument("bandlimit " + std::to_string(b) + " must lie in [0, M/2)");
    if (rep_ == Representation::spectral) {
      for_each_index(grid_.dim(), grid_.points(), [&](std::span<const int> idx, std::size_t flat) {
        for (int s : idx)
          if (std::abs(grid_.frequency(s)) > b) {
            values_[flat] = 0.0;
            return;
          }
      });
    }
  }
}

TorusField TorusField::zeros(const TorusGrid& grid, Representation rep) {
  return TorusField(grid, rep, std::vector<Complex>(grid.size()), 0);
}

TorusField TorusField::from_function(const TorusGrid& grid, const std::function<Complex(std::span<const double>)>& fn) {
  std::vector<Complex> values(grid.size());
  std::vector<double> t(static_cast<std::size_t>(grid.dim()));
  for_each_index(grid.dim(), grid.points(), [&](std::span<const int> idx, std::size_t flat) {
    for (std::size_t i = 0; i < idx.size(); ++i) t[i] = grid.coordinate(idx[i]);
    values[flat] = fn(t);
  });
  return TorusField(grid, Representation::physical, std::move(values));
}

TorusField TorusField::from_modes(const TorusGrid& grid, const std::vector<std::pair<std::vector<int>, Complex>>& modes) {
  std::vector<Complex> values(grid.size());
  int band = 0;
  for (const auto& [k, c] : modes) {
    for (int ki : k) band = std::max(band, std::abs(ki));
    values[grid.flat_index(k)] += c;
  }
  if (band >= grid.points() / 2) throw std::invalid_argument("mode on the Nyquist line cannot carry a bandlimit");
  return TorusField(grid, Representation::spectral, std::move(values), band);
}

Complex TorusField::coefficient(std::span<const int> freq) const {
  if (rep_ != Representation::spectral) throw std::invalid_argument("coefficient() needs a spectral field");
  return values_[grid_.flat_index(freq)];
}

TorusField forward_transform(const TorusField& f) {
  if (f.is_spectral()) throw std::invalid_argument("forward_transform expects a physical field");
  const auto& g = f.grid();
  std::vector<Complex> v = f.data();
  detail::fft_cube(v, g.dim(), g.points(), -1);
  apply_separable(v, g, axis_phase(g));
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& c : v) c *= scale;
  return TorusField(g, Representation::spectral, std::move(v), f.bandlimit());
}

TorusField inverse_transform(const TorusField& f) {
  if (!f.is_spectral()) throw std::invalid_argument("inverse_transform expects a spectral field");
  const auto& g = f.grid();
  std::vector<Complex> v = f.data();
  auto phase = axis_phase(g);
  for (auto& w : phase) w = std::conj(w);
  apply_separable(v, g, phase);
  detail::fft_cube(v, g.dim(), g.points(), +1);
  return TorusField(g, Representation::physical, std::move(v), f.bandlimit());
}

TorusField to_spectral(const TorusField& f) { return f.is_spectral() ? f : forward_transform(f); }
TorusField to_physical(const TorusField& f) { return f.is_spectral() ? inverse_transform(f) : f; }

TorusField apply_multiplier(const TorusField& f, const Multiplier& s) {
  TorusField spec = to_spectral(f);
  const auto& g = spec.grid();
  std::vector<Complex> v = spec.data();
  std::vector<int> k(static_cast<std::size_t>(g.dim()));
  for_each_index(g.dim(), g.points(), [&](std::span<const int> idx, std::size_t flat) {
    if (v[flat] == Complex(0.0)) return;
    for (std::size_t i = 0; i < idx.size(); ++i) k[i] = g.frequency(idx[i]);
    v[flat] *= s(k);
  });
  TorusField out(g, Representation::spectral, std::move(v), f.bandlimit());
  return f.is_spectral() ? out : inverse_transform(out);
}

TorusField spectral_derivative(const TorusField& f, std::span<const int> gamma) {
  if (static_cast<int>(gamma.size()) != f.grid().dim()) throw std::invalid_argument("derivative order has wrong length");
  for (int gi : gamma)
    if (gi < 0) throw std::invalid_argument("derivative order must be nonnegative");
  const int nyquist = -f.grid().points() / 2;
  return apply_multiplier(f, [&](std::span<const int> k) {
    Complex w = 1.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (gamma[i] == 0) continue;
      if (k[i] == nyquist) return Complex(0.0);
      w *= std::pow(Complex(0.0, 2.0 * std::numbers::pi * k[i]), gamma[i]);
    }
    return w;
  });
}

double lp_norm(const TorusField& f, double p, int oversample) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("lp_norm needs 1 < p < infinity");
  if (oversample < 1) throw std::invalid_argument("oversample must be at least 1");
  TorusField phys = f;
  if (oversample > 1) {
    if (!f.bandlimit()) throw std::invalid_argument("oversampled lp_norm needs a bandlimited field");
    phys = to_physical(resample(f, f.grid().points() * oversample));
  } else {
    phys = to_physical(f);
  }
  detail::CompensatedSum acc;
  if (p == 2.0) {
    for (const auto& z : phys.values()) acc.add(std::norm(z));
  } else {
    for (const auto& z : phys.values()) acc.add(std::pow(std::norm(z), 0.5 * p));
  }
  double mean = acc.value() / static_cast<double>(phys.grid().size());
  return p == 2.0 ? std::sqrt(mean) : std::pow(mean, 1.0 / p);
}

TorusField project_mean_zero(const TorusField& f) {
  std::vector<Complex> v = f.data();
  if (f.is_spectral()) {
    v[0] = 0.0;
  } else {
    detail::CompensatedSum re, im;
    for (const auto& z : v) {
      re.add(z.real());
      im.add(z.imag());
    }
    Complex mean(re.value() / static_cast<double>(v.size()), im.value() / static_cast<double>(v.size()));
    for (auto& z : v) z -= mean;
  }
  return TorusField(f.grid(), f.representation(), std::move(v), f.bandlimit());
}

TorusField with_bandlimit(const TorusField& f, int bandlimit) {
  TorusField spec = to_spectral(f);
  TorusField out(spec.grid(), Representation::spectral, spec.data(), bandlimit);
  return f.is_spectral() ? out : inverse_transform(out);
}

TorusField resample(const TorusField& f, int points) {
  if (!f.bandlimit()) throw std::invalid_argument("resample needs a bandlimited field");
  const int b = *f.bandlimit();
  TorusGrid target(f.grid().dim(), points, f.grid().offset());
  if (b >= points / 2) throw std::invalid_argument("target grid cannot hold the bandlimit");
  TorusField spec = to_spectral(f);
  std::vector<Complex> v(target.size());
  const int n = f.grid().dim();
  const int width = 2 * b + 1;
  std::vector<int> k(static_cast<std::size_t>(n));
  for_each_index(n, width, [&](std::span<const int> idx, std::size_t) {
    for (int i = 0; i < n; ++i) k[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)] - b;
    v[target.flat_index(k)] = spec.data()[spec.grid().flat_index(k)];
  });
  TorusField out(target, Representation::spectral, std::move(v), b);
  return f.is_spectral() ? out : inverse_transform(out);
}

TorusField translate(const TorusField& f, std::span<const int> shift) {
  const auto& g = f.grid();
  if (static_cast<int>(shift.size()) != g.dim()) throw std::invalid_argument("shift has wrong length");
  TorusField phys = to_physical(f);
  std::vector<Complex> v(g.size());
  const int m = g.points();
  for_each_index(g.dim(), m, [&](std::span<const int> idx, std::size_t flat) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      int j = ((idx[i] - shift[i]) % m + m) % m;
      src = src * static_cast<std::size_t>(m) + static_cast<std::size_t>(j);
    }
    v[flat] = phys.data()[src];
  });
  TorusField out(g, Representation::physical, std::move(v), f.bandlimit());
  return f.is_spectral() ? forward_transform(out) : out;
}

Complex evaluate(const TorusField& f, std::span<const double> t) {
  const auto& g = f.grid();
  if (static_cast<int>(t.size()) != g.dim()) throw std::invalid_argument("evaluation point has wrong length");
  TorusField spec = to_spectral(f);
  // Per-axis tables e^{2 pi i k t_i} make the sum cost one multiply per coefficient.
  std::vector<std::vector<Complex>> tables(t.size(), std::vector<Complex>(static_cast<std::size_t>(g.points())));
  for (std::size_t i = 0; i < t.size(); ++i)
    for (int s = 0; s < g.points(); ++s)
      tables[i][static_cast<std::size_t>(s)] = std::polar(1.0, 2.0 * std::numbers::pi * g.frequency(s) * t[i]);
  Complex total = 0.0;
  for_each_index(g.dim(), g.points(), [&](std::span<const int> idx, std::size_t flat) {
    const Complex c = spec.data()[flat];
    if (c == Complex(0.0)) return;
    Complex w = c;
    for (std::size_t i = 0; i < idx.size(); ++i) w *= tables[i][static_cast<std::size_t>(idx[i])];
    total += w;
  });
  return total;
}

double spectral_energy(const TorusField& f) {
  TorusField spec = to_spectral(f);
  detail::CompensatedSum acc;
  for (const auto& z : spec.values()) acc.add(std::norm(z));
  return acc.value();
}

}  // namespace sharpk
