#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sharpk {

using Complex = std::complex<double>;

/// Uniform grid on [-1/2, 1/2]^n with M points per axis.
/// Point k sits at t = (k + offset/2)/M - 1/2; frequencies live in [-M/2, M/2)^n.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(int dim, int points, bool offset = true);

  int dim() const { return dim_; }
  int points() const { return points_; }
  bool offset() const { return offset_; }
  std::size_t size() const { return size_; }

  double coordinate(int index) const;
  std::vector<double> point(std::size_t flat) const;

  // Signed frequency stored at array slot `index` along one axis, and the reverse map.
  int frequency(int index) const { return index < points_ / 2 ? index : index - points_; }
  int slot(int freq) const { return freq >= 0 ? freq : freq + points_; }
  bool representable(std::span<const int> freq) const;
  std::size_t flat_index(std::span<const int> freq) const;
  std::vector<int> frequency_of(std::size_t flat) const;

  bool operator==(const TorusGrid&) const = default;

 private:
  int dim_ = 0;
  int points_ = 2;
  bool offset_ = true;
  std::size_t size_ = 1;
};

enum class Representation { physical, spectral };

/// Complex field on a TorusGrid. Immutable once built.
class TorusField {
 public:
  /// The single-point field 0 on T^0.
  TorusField() : TorusField(TorusGrid(), Representation::physical, {Complex(0.0)}) {}
  TorusField(TorusGrid grid, Representation rep, std::vector<Complex> values,
             std::optional<int> bandlimit = std::nullopt);

  static TorusField zeros(const TorusGrid& grid, Representation rep);
  static TorusField from_function(const TorusGrid& grid, const std::function<Complex(std::span<const double>)>& fn);
  static TorusField from_modes(const TorusGrid& grid, const std::vector<std::pair<std::vector<int>, Complex>>& modes);

  const TorusGrid& grid() const { return grid_; }
  Representation representation() const { return rep_; }
  bool is_spectral() const { return rep_ == Representation::spectral; }
  std::span<const Complex> values() const { return values_; }
  const std::vector<Complex>& data() const { return values_; }
  std::optional<int> bandlimit() const { return bandlimit_; }

  Complex coefficient(std::span<const int> freq) const;

 private:
  TorusGrid grid_;
  Representation rep_ = Representation::physical;
  std::vector<Complex> values_;
  std::optional<int> bandlimit_;
};

// Calls fn(index tuple, flat offset) over the whole cube in row-major order.
void for_each_index(int dim, int points, const std::function<void(std::span<const int>, std::size_t)>& fn);

TorusField forward_transform(const TorusField& f);
TorusField inverse_transform(const TorusField& f);
TorusField to_spectral(const TorusField& f);
TorusField to_physical(const TorusField& f);

using Multiplier = std::function<Complex(std::span<const int>)>;

/// Multiplies spectral coefficients by s(k). Output keeps f's representation and bandlimit.
TorusField apply_multiplier(const TorusField& f, const Multiplier& s);

/// Multiplies coefficient k by prod (2 pi i k_i)^gamma_i. Nyquist slots are zeroed.
TorusField spectral_derivative(const TorusField& f, std::span<const int> gamma);

/// (mean over the oversampled grid of |f|^p)^(1/p). Oversampling needs a bandlimit.
double lp_norm(const TorusField& f, double p, int oversample = 4);

TorusField project_mean_zero(const TorusField& f);

/// Truncates the spectrum to |k|_inf <= bandlimit (which also drops the Nyquist line).
TorusField with_bandlimit(const TorusField& f, int bandlimit);

/// Zero-pads (or truncates) a bandlimited field onto a grid with `points` per axis.
TorusField resample(const TorusField& f, int points);

/// Circular shift by a grid vector: g(t) = f(t - shift/M).
TorusField translate(const TorusField& f, std::span<const int> shift);

/// Evaluates the trigonometric polynomial at an arbitrary point of the torus.
Complex evaluate(const TorusField& f, std::span<const double> t);

/// Squared l2 sum of spectral coefficients; equals the mean of |f|^2.
double spectral_energy(const TorusField& f);

void write_field(std::ostream& out, const TorusField& f);
TorusField read_field(std::istream& in);

}  // namespace sharpk
