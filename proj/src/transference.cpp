#include "sharpk/transference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "numeric.hpp"

namespace sharpk {
namespace {

constexpr double kPi = std::numbers::pi;

void check_epsilons(std::span<const double> eps) {
  if (eps.empty()) throw std::invalid_argument("sweep needs at least one epsilon");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !std::isfinite(eps[i])) throw std::invalid_argument("epsilons must be positive");
    if (i && !(eps[i] < eps[i - 1])) throw std::invalid_argument("epsilons must be strictly decreasing");
  }
}

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
}

double fitted_order(std::span<const double> eps, std::span<const double> err) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (err[i] > 0.0 && std::isfinite(err[i])) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(err[i]));
    }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return linear_fit(x, y).slope;
}

void finish(SweepResult& r) {
  r.errors.clear();
  for (std::size_t i = 0; i < r.values.size(); ++i) r.errors.push_back(std::abs(r.values[i] - r.targets[i]));
  r.fitted_order = fitted_order(r.epsilons, r.errors);
}

int next_pow2(long long v) {
  int p = 2;
  while (p < v) p *= 2;
  return p;
}

}  // namespace

double gaussian_lp_norm(const GaussianProfile& g, int dim, double p) {
  if (!(g.a > 0.0)) throw std::invalid_argument("Gaussian profile needs a > 0");
  return std::pow(g.a * p, -0.5 * dim / p);
}

std::vector<double> dyadic_epsilons(int hi_exp, int lo_exp) {
  if (lo_exp > hi_exp) throw std::invalid_argument("epsilon exponents must satisfy lo <= hi");
  std::vector<double> e;
  for (int k = hi_exp; k >= lo_exp; --k) e.push_back(std::ldexp(1.0, k));
  return e;
}

SweepResult lemma22_sweep(const TorusField& f, double p, std::span<const double> epsilons,
                          std::optional<GaussianProfile> profile) {
  check_p(p);
  check_epsilons(epsilons);
  const GaussianProfile g = profile.value_or(GaussianProfile{1.0 / p});
  if (!(g.a > 0.0)) throw std::invalid_argument("Gaussian profile needs a > 0");
  const int n = f.grid().dim();
  if (n < 1) throw std::invalid_argument("field must live on T^n with n >= 1");
  const int band = f.bandlimit() ? *f.bandlimit() : f.grid().points() / 2 - 1;
  const double c = g.a * p;  // |phi|^p = exp(-pi c |x|^2)
  // W_eps has Fourier coefficients exp(-pi m^2 / (c eps^2)); keep the grid fine enough for both factors.
  const double w_reach = epsilons.front() * std::sqrt(40.0 * c / kPi);
  const int points = next_pow2(std::max<long long>(64, 8LL * (band + 1) + 2 * static_cast<long long>(std::ceil(w_reach))));
  TorusField fine = to_physical(resample(with_bandlimit(f, band), points));
  if (fine.grid().size() > (std::size_t{1} << 22)) throw std::invalid_argument("lemma22 quadrature grid too large");
  const auto& grid = fine.grid();

  std::vector<double> fp(grid.size());
  detail::CompensatedSum fsum;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fp[i] = std::pow(std::norm(fine.data()[i]), 0.5 * p);
    fsum.add(fp[i]);
  }
  const double f_lp = std::pow(fsum.value() / static_cast<double>(grid.size()), 1.0 / p);

  SweepResult r;
  r.name = "lemma22";
  r.target = gaussian_lp_norm(g, n, p) * f_lp;
  const double radius = std::sqrt(40.0 * std::log(10.0) / (kPi * c));  // exp(-pi c R^2) = 1e-40
  for (double eps : epsilons) {
    // 1-D periodization w(x) = eps sum_j exp(-pi c eps^2 (x+j)^2), truncated at |x+j| <= R/eps.
    const long long reach = static_cast<long long>(std::ceil(radius / eps)) + 1;
    std::vector<double> w(static_cast<std::size_t>(points));
    double wmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
      const double x = grid.coordinate(i);
      detail::CompensatedSum s;
      for (long long j = -reach; j <= reach; ++j) {
        const double u = eps * (x + static_cast<double>(j));
        if (std::abs(u) <= radius) s.add(eps * std::exp(-kPi * c * u * u));
      }
      w[static_cast<std::size_t>(i)] = s.value();
      wmin = std::min(wmin, s.value());
    }
    // Dropped terms on both sides: first dropped term plus the Gaussian integral beyond R.
    const double dropped = 2.0 * (eps * std::exp(-kPi * c * radius * radius) +
                                  std::erfc(std::sqrt(kPi * c) * radius) / (2.0 * std::sqrt(c)));
    const double rel_w = std::pow(1.0 + dropped / wmin, n) - 1.0;
    detail::CompensatedSum acc;
    for_each_index(n, points, [&](std::span<const int> idx, std::size_t flat) {
      double weight = 1.0;
      for (int s : idx) weight *= w[static_cast<std::size_t>(s)];
      acc.add(weight * fp[flat]);
    });
    const double value = std::pow(acc.value() / static_cast<double>(grid.size()), 1.0 / p);
    const double tail = value * rel_w / p;
    if (tail > 1e-8 * value) throw std::runtime_error("lemma22 tail bound exceeds tolerance at eps = " + std::to_string(eps));
    r.epsilons.push_back(eps);
    r.values.push_back(value);
    r.targets.push_back(r.target);
    r.tail_bounds.push_back(tail);
  }
  finish(r);
  return r;
}

SweepResult lemma23_sweep(int dim, double p, std::span<const double> epsilons, double amplitude,
                          std::optional<GaussianProfile> profile) {
  check_p(p);
  check_epsilons(epsilons);
  if (dim < 1 || dim > 3) throw std::invalid_argument("lemma23 sweep supports 1 <= n <= 3");
  const GaussianProfile g = profile.value_or(GaussianProfile{1.0 / p});
  if (!(g.a > 0.0)) throw std::invalid_argument("Gaussian profile needs a > 0");
  const double q = p / (p - 1.0);
  SweepResult r;
  r.name = "lemma23";
  r.target = std::abs(amplitude) * gaussian_lp_norm(g, dim, p);
  const double coef = amplitude * std::pow(g.a, -0.5 * dim);  // fhat(xi) = coef exp(-pi |xi|^2 / a)
  for (double eps : epsilons) {
    const double c = eps * eps / g.a;
    const double scale = std::pow(eps, dim / q);
    // Coefficients outside |k|_inf <= K bound the sup-norm error; grow K until the scaled bound is tiny.
    auto tail_at = [&](int k) {
      const double t1 = std::erfc(std::sqrt(kPi * c) * k) / std::sqrt(c);
      const double full = 1.0 + 1.0 / std::sqrt(c);
      return std::abs(coef) * dim * t1 * std::pow(full, dim - 1) * scale;
    };
    int cutoff = 1;
    while (tail_at(cutoff) > 1e-10 * std::max(r.target, 1e-300)) {
      if (cutoff > (1 << 20)) throw std::invalid_argument("lemma23 cutoff overflow");
      ++cutoff;
    }
    const int points = next_pow2(2LL * cutoff + 2);
    long double total = 1;
    for (int i = 0; i < dim; ++i) total *= 2.0L * points;
    if (total > static_cast<long double>(std::size_t{1} << 24))
      throw std::invalid_argument("lemma23 cutoff overflow at eps = " + std::to_string(eps) + " (M = " +
                                  std::to_string(points) + ")");
    TorusGrid grid(dim, points);
    std::vector<double> axis(static_cast<std::size_t>(points));
    for (int s = 0; s < points; ++s) {
      const int k = grid.frequency(s);
      axis[static_cast<std::size_t>(s)] = std::abs(k) <= cutoff ? std::exp(-kPi * c * k * k) : 0.0;
    }
    std::vector<Complex> v(grid.size());
    for_each_index(dim, points, [&](std::span<const int> idx, std::size_t flat) {
      double w = coef;
      for (int s : idx) w *= axis[static_cast<std::size_t>(s)];
      v[flat] = w;
    });
    TorusField field(grid, Representation::spectral, std::move(v), cutoff);
    r.epsilons.push_back(eps);
    r.values.push_back(scale * lp_norm(field, p, 2));
    r.targets.push_back(r.target);
    r.tail_bounds.push_back(tail_at(cutoff));
  }
  finish(r);
  return r;
}

SweepResult pairing_identity_check(const HomogeneousSymbol& s, std::span<const int> k, std::span<const int> l,
                                   std::span<const double> epsilons, double p) {
  check_p(p);
  check_epsilons(epsilons);
  const int n = s.beta().dim();
  if (static_cast<int>(k.size()) != n || static_cast<int>(l.size()) != n)
    throw std::invalid_argument("frequencies must match the symbol dimension");
  if (std::all_of(k.begin(), k.end(), [](int v) { return v == 0; }) ||
      std::all_of(l.begin(), l.end(), [](int v) { return v == 0; }))
    throw std::invalid_argument("pairing check needs k, l != 0");
  if (n > 3) throw std::invalid_argument("pairing check supports n <= 3");
  const double q = p / (p - 1.0);
  const double width = p + q;
  const double half = std::sqrt(46.0 / (kPi * width));  // exp(-pi (p+q) L^2) < 1e-20
  const int steps = n <= 2 ? 64 : 24;
  const double h = half / steps;
  const bool diagonal = std::equal(k.begin(), k.end(), l.begin());
  SweepResult r;
  r.name = "pairing";
  r.target = diagonal ? s(k) : 0.0;
  const double norm_const = std::pow(p * q, 0.5 * n);
  for (double eps : epsilons) {
    std::vector<double> d(static_cast<std::size_t>(n)), center(static_cast<std::size_t>(n));
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
      d[static_cast<std::size_t>(i)] = (k[static_cast<std::size_t>(i)] - l[static_cast<std::size_t>(i)]) / eps;
      center[static_cast<std::size_t>(i)] = -q * d[static_cast<std::size_t>(i)] / width;
      d2 += d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)];
    }
    // After xi = k + eps eta the integrand is m(k + eps eta) phihat(eta) psicheck(eta + d), a Gaussian bump centred at eta*.
    detail::CompensatedSum acc;
    std::vector<double> eta(static_cast<std::size_t>(n)), xi(static_cast<std::size_t>(n));
    for_each_index(n, 2 * steps + 1, [&](std::span<const int> idx, std::size_t) {
      double a2 = 0.0, b2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        eta[ui] = center[ui] + (idx[ui] - steps) * h;
        xi[ui] = k[ui] + eps * eta[ui];
        a2 += eta[ui] * eta[ui];
        b2 += (eta[ui] + d[ui]) * (eta[ui] + d[ui]);
      }
      acc.add(s.at(xi) * norm_const * std::exp(-kPi * (p * a2 + q * b2)));
    });
    const double value = acc.value() * std::pow(h, n);
    r.epsilons.push_back(eps);
    r.values.push_back(value);
    r.targets.push_back(r.target);
    r.tail_bounds.push_back(n * std::erfc(std::sqrt(kPi * width) * half) * std::exp(-kPi * d2));
  }
  finish(r);
  return r;
}

double cutoff_theta0(std::span<const double> xi) {
  double r2 = 0.0;
  for (double x : xi) r2 += x * x;
  const double t = 2.0 - std::sqrt(r2);
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

DyadicBound dyadic_block_bound(const HomogeneousSymbol& s, std::span<const int> k, int block, double eps) {
  const int n = s.beta().dim();
  if (static_cast<int>(k.size()) != n) throw std::invalid_argument("frequency must match the symbol dimension");
  if (std::all_of(k.begin(), k.end(), [](int v) { return v == 0; })) throw std::invalid_argument("k must be nonzero");
  if (block < 0) throw std::invalid_argument("block index must be nonnegative");
  if (n > 3) throw std::invalid_argument("dyadic block bound supports n <= 3");
  if (!(eps > 0.0) || !(eps < std::ldexp(1.0, -block - 3)))
    throw std::invalid_argument("need 0 < eps < 2^{-l-3}");
  const double scale = std::ldexp(eps, block);
  const int per_unit = n <= 2 ? 32 : 12;
  const double h = 1.0 / per_unit;
  const int side = 8 * per_unit + 1;  // [-4, 4]
  const double mk = s(k);
  std::vector<double> values(static_cast<std::size_t>(std::pow(side, n)));
  std::vector<double> eta(static_cast<std::size_t>(n)), xi(static_cast<std::size_t>(n)), tmp(static_cast<std::size_t>(n));
  auto theta_block = [&](std::span<const double> e) {
    for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = 0.5 * e[static_cast<std::size_t>(i)];
    double v = cutoff_theta0(tmp);
    if (block >= 2) {
      for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = 4.0 * e[static_cast<std::size_t>(i)];
      v -= cutoff_theta0(tmp);
    }
    return v;
  };
  double pointwise = 0.0;
  for_each_index(n, side, [&](std::span<const int> idx, std::size_t flat) {
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      eta[ui] = -4.0 + idx[ui] * h;
      xi[ui] = scale * eta[ui] + k[ui];
    }
    const double th = theta_block(eta);
    const double v = th == 0.0 ? 0.0 : (s.at(xi) - mk) * th;
    values[flat] = v;
    pointwise = std::max(pointwise, std::abs(v));
  });

  std::vector<std::size_t> stride(static_cast<std::size_t>(n), 1);
  for (int i = n - 2; i >= 0; --i) stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i + 1)] * side;
  // Central difference along one axis; the symbol vanishes outside |eta| < 4, so the box edge sees zeros.
  auto diff = [&](const std::vector<double>& in, int axis) {
    std::vector<double> out(in.size());
    const std::size_t st = stride[static_cast<std::size_t>(axis)];
    for (std::size_t flat = 0; flat < in.size(); ++flat) {
      const int pos = static_cast<int>((flat / st) % static_cast<std::size_t>(side));
      const double up = pos + 1 < side ? in[flat + st] : 0.0;
      const double down = pos > 0 ? in[flat - st] : 0.0;
      out[flat] = (up - down) / (2.0 * h);
    }
    return out;
  };
  double derivative = 0.0;
  // Walk all gamma with 1 <= |gamma| <= n+1 as nondecreasing axis sequences (mixed partials commute).
  std::vector<std::pair<std::vector<int>, std::vector<double>>> frontier{{{}, values}};
  for (int order = 1; order <= n + 1; ++order) {
    std::vector<std::pair<std::vector<int>, std::vector<double>>> next;
    for (const auto& [axes, data] : frontier) {
      const int start = axes.empty() ? 0 : axes.back();
      for (int a = start; a < n; ++a) {
        auto d = diff(data, a);
        for_each_index(n, side, [&](std::span<const int> idx, std::size_t flat) {
          double r2 = 0.0;
          for (int i = 0; i < n; ++i) {
            const double e = -4.0 + idx[static_cast<std::size_t>(i)] * h;
            r2 += e * e;
          }
          derivative = std::max(derivative, std::pow(r2, 0.5 * order) * std::abs(d[flat]));
        });
        auto ax = axes;
        ax.push_back(a);
        next.emplace_back(std::move(ax), std::move(d));
      }
    }
    frontier = std::move(next);
  }
  return {pointwise, derivative, scale, h};
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace sharpk
