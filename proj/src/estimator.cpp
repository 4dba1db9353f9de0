#include "sharpk/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "numeric.hpp"
#include "sharpk/martingale.hpp"
#include "sharpk/witness.hpp"
#include "torus_detail.hpp"

namespace sharpk {
namespace {

int default_band(const TorusField& f) { return f.bandlimit() ? *f.bandlimit() : f.grid().points() / 2 - 1; }

// Objective and gradient in the coordinates c_k, 0 < |k|_inf <= band, of a coarse-grid field.
// Multiplier outputs are synthesized on the (oversample*M)^n grid where the L^p means are taken.
class Engine {
 public:
  Engine(const DerivativeFamily& fam, double p, const TorusGrid& coarse, int band, int oversample)
      : p_(p), coarse_(coarse), fine_(coarse.dim(), coarse.points() * oversample, coarse.offset()) {
    if (oversample < 1) throw std::invalid_argument("oversample must be at least 1");
    if (band < 1 || band >= coarse.points() / 2) throw std::invalid_argument("band must lie in [1, M/2)");
    const int n = coarse.dim();
    std::vector<HomogeneousSymbol> symbols{make_symbol(fam.beta)};
    for (const auto& a : fam.alphas) symbols.push_back(make_symbol(a));
    symbols_.resize(symbols.size());
    const auto phase = detail::axis_phase(fine_);
    const double inv_size = 1.0 / static_cast<double>(fine_.size());
    std::vector<int> k(static_cast<std::size_t>(n));
    for_each_index(n, 2 * band + 1, [&](std::span<const int> idx, std::size_t) {
      bool zero = true;
      for (int i = 0; i < n; ++i) {
        k[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)] - band;
        zero = zero && k[static_cast<std::size_t>(i)] == 0;
      }
      if (zero) return;
      Complex ph = 1.0;
      for (int ki : k) ph *= phase[static_cast<std::size_t>(fine_.slot(ki))];
      coarse_slot_.push_back(coarse.flat_index(k));
      fine_slot_.push_back(fine_.flat_index(k));
      to_fine_.push_back(std::conj(ph));
      from_fine_.push_back(ph * inv_size);
      for (std::size_t s = 0; s < symbols.size(); ++s) symbols_[s].push_back(symbols[s](k));
    });
    band_ = band;
  }

  std::size_t size() const { return coarse_slot_.size(); }
  int band() const { return band_; }
  int count() const { return static_cast<int>(symbols_.size()) - 1; }

  std::vector<Complex> coefficients(const TorusField& f) const {
    if (!(f.grid() == coarse_)) throw std::invalid_argument("field grid differs from the objective grid");
    TorusField spec = to_spectral(f);
    std::vector<Complex> c(size());
    for (std::size_t j = 0; j < size(); ++j) c[j] = spec.data()[coarse_slot_[j]];
    return c;
  }

  TorusField field(const std::vector<Complex>& c) const {
    std::vector<Complex> v(coarse_.size());
    for (std::size_t j = 0; j < size(); ++j) v[coarse_slot_[j]] = c[j];
    return TorusField(coarse_, Representation::spectral, std::move(v), band_);
  }

  // Returns the ratio; norms[s] receives ||T_s f||_p (s = 0 numerator).
  double value(const std::vector<Complex>& c, std::vector<double>* norms = nullptr) const {
    std::vector<Complex> buf;
    std::vector<double> local(symbols_.size());
    for (std::size_t s = 0; s < symbols_.size(); ++s) {
      synthesize(s, c, buf);
      local[s] = norm_of(buf);
    }
    if (norms) *norms = local;
    double den = 0.0;
    for (std::size_t s = 1; s < local.size(); ++s) den += local[s];
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : local[0] / den;
  }

  std::vector<Complex> gradient(const std::vector<Complex>& c, double smoothing, double* ratio_out = nullptr) const {
    const std::size_t terms = symbols_.size();
    std::vector<std::vector<Complex>> partial(terms, std::vector<Complex>(size()));
    std::vector<double> norms(terms);
    std::vector<Complex> buf;
    for (std::size_t s = 0; s < terms; ++s) {
      synthesize(s, c, buf);
      norms[s] = norm_of(buf);
      if (norms[s] == 0.0) continue;  // the norm has no gradient at 0; use the zero subgradient
      double gmax = 0.0;
      for (const auto& z : buf) gmax = std::max(gmax, std::abs(z));
      const double eps2 = (p_ < 2.0) ? std::pow(smoothing * gmax, 2) : 0.0;
      if (p_ < 2.0 && !(eps2 > 0.0)) throw std::invalid_argument("p < 2 needs a positive smoothing parameter");
      for (auto& z : buf) {
        if (p_ == 2.0) continue;
        const double w = std::pow(std::norm(z) + eps2, 0.5 * (p_ - 2.0));
        z *= w;
      }
      detail::fft_cube(buf, fine_.dim(), fine_.points(), -1);
      const double scale = std::pow(norms[s], 1.0 - p_);
      for (std::size_t j = 0; j < size(); ++j)
        partial[s][j] = scale * symbols_[s][j] * buf[fine_slot_[j]] * from_fine_[j];
    }
    double den = 0.0;
    for (std::size_t s = 1; s < terms; ++s) den += norms[s];
    if (den == 0.0) throw std::invalid_argument("all denominator multipliers annihilate the field");
    const double ratio = norms[0] / den;
    std::vector<Complex> g(size());
    for (std::size_t j = 0; j < size(); ++j) {
      Complex acc = partial[0][j] / den;
      for (std::size_t s = 1; s < terms; ++s) acc -= ratio / den * partial[s][j];
      if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw std::runtime_error("non-finite gradient entry " + std::to_string(j) + " (ratio " + std::to_string(ratio) +
                                 ", denominator " + std::to_string(den) + ")");
      g[j] = acc;
    }
    if (ratio_out) *ratio_out = ratio;
    return g;
  }

 private:
  void synthesize(std::size_t s, const std::vector<Complex>& c, std::vector<Complex>& buf) const {
    buf.assign(fine_.size(), Complex(0.0));
    for (std::size_t j = 0; j < size(); ++j) buf[fine_slot_[j]] = symbols_[s][j] * c[j] * to_fine_[j];
    detail::fft_cube(buf, fine_.dim(), fine_.points(), +1);
  }

  double norm_of(const std::vector<Complex>& buf) const {
    detail::CompensatedSum acc;
    if (p_ == 2.0)
      for (const auto& z : buf) acc.add(std::norm(z));
    else
      for (const auto& z : buf) acc.add(std::pow(std::norm(z), 0.5 * p_));
    const double mean = acc.value() / static_cast<double>(buf.size());
    return p_ == 2.0 ? std::sqrt(mean) : std::pow(mean, 1.0 / p_);
  }

  double p_;
  TorusGrid coarse_, fine_;
  int band_ = 0;
  std::vector<std::size_t> coarse_slot_, fine_slot_;
  std::vector<Complex> to_fine_, from_fine_;
  std::vector<std::vector<double>> symbols_;
};

double l2(const std::vector<Complex>& c) {
  double s = 0.0;
  for (const auto& z : c) s += std::norm(z);
  return std::sqrt(s);
}

void normalize(std::vector<Complex>& c) {
  const double s = l2(c);
  if (s == 0.0) throw std::invalid_argument("cannot normalize a zero field");
  for (auto& z : c) z /= s;
}

struct AscentResult {
  std::vector<Complex> c;
  double ratio = 0.0;
  double initial = 0.0;
  std::vector<TracePoint> trace;
  int iterations = 0;
};

AscentResult ascend(const Engine& engine, std::vector<Complex> c, double p, const SolverOptions& opts) {
  AscentResult out;
  normalize(c);
  double r = engine.value(c);
  if (!std::isfinite(r)) return out;  // every m_j annihilates the start
  out.initial = r;
  out.trace.push_back({0, r});
  std::vector<double> phases{0.0};
  if (p < 2.0) {
    phases.clear();
    for (double e = opts.smoothing; e >= 1e-12 * 0.999; e /= 10.0) phases.push_back(e);
    if (phases.empty()) phases.push_back(opts.smoothing);
  }
  int iter = 0;
  for (std::size_t ph = 0; ph < phases.size() && iter < opts.max_iter; ++ph) {
    double step = 1.0;
    int quiet = 0;
    // Later smoothing phases share whatever budget the earlier ones left.
    const int phase_end = ph + 1 == phases.size()
                              ? opts.max_iter
                              : iter + std::max(1, (opts.max_iter - iter) / static_cast<int>(phases.size() - ph));
    while (iter < phase_end) {
      auto g = engine.gradient(c, phases[ph] > 0.0 ? phases[ph] : 1e-12);
      double g2 = 0.0;
      for (const auto& z : g) g2 += std::norm(z);
      if (!(g2 > 1e-30)) break;
      bool accepted = false;
      double t = step, r_new = r;
      std::vector<Complex> trial(c.size());
      for (int h = 0; h <= 30; ++h) {
        for (std::size_t j = 0; j < c.size(); ++j) trial[j] = c[j] + t * g[j];
        normalize(trial);
        r_new = engine.value(trial);
        if (std::isfinite(r_new) && r_new > r + 1e-4 * t * g2) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      ++iter;
      const double gain = (r_new - r) / r;
      c.swap(trial);
      r = r_new;
      out.trace.push_back({iter, r});
      quiet = gain < opts.tol ? quiet + 1 : 0;
      if (quiet >= opts.patience) break;
      step = 2.0 * t;
    }
  }
  out.c = std::move(c);
  out.ratio = r;
  out.iterations = iter;
  return out;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

bool is_mixed_second_family(const DerivativeFamily& fam) {
  if (fam.dim() != 2 || fam.count() != 2 || fam.beta != MultiIndex({1, 1})) return false;
  std::vector<MultiIndex> a = fam.alphas;
  std::sort(a.begin(), a.end());
  return a[0] == MultiIndex({0, 2}) && a[1] == MultiIndex({2, 0});
}

double ratio_objective(const DerivativeFamily& fam, const TorusField& f, double p, int oversample) {
  fam.validate();
  if (f.grid().dim() != fam.dim()) throw std::invalid_argument("field dimension differs from the family dimension");
  TorusField g = with_bandlimit(to_spectral(f), default_band(f));
  const double num = lp_norm(apply_multiplier(g, make_symbol(fam.beta)), p, oversample);
  double den = 0.0;
  for (const auto& a : fam.alphas) den += lp_norm(apply_multiplier(g, make_symbol(a)), p, oversample);
  if (den == 0.0) {
    std::string js = fam.count() == 1 ? "j = 1" : "j = 1.." + std::to_string(fam.count());
    throw std::invalid_argument("zero denominator: every multiplier m_j annihilates f (" + js + ")");
  }
  return num / den;
}

TorusField ratio_gradient(const DerivativeFamily& fam, const TorusField& f, double p, double smoothing, int oversample) {
  fam.validate();
  if (f.grid().dim() != fam.dim()) throw std::invalid_argument("field dimension differs from the family dimension");
  if (p < 2.0 && !(smoothing > 0.0)) throw std::invalid_argument("p < 2 needs a positive smoothing parameter");
  Engine engine(fam, p, f.grid(), default_band(f), oversample);
  auto gc = engine.gradient(engine.coefficients(f), smoothing);
  TorusField spec = engine.field(gc);
  std::vector<Complex> v = inverse_transform(spec).data();
  const double scale = 1.0 / static_cast<double>(f.grid().size());
  for (auto& z : v) z *= scale;
  return TorusField(f.grid(), Representation::physical, std::move(v), engine.band());
}

ScanResult single_frequency_scan(const DerivativeFamily& fam, int range) {
  fam.validate();
  if (range < 1) throw std::invalid_argument("scan range must be at least 1");
  const int n = fam.dim();
  const bool exact = fam.orders_match();
  std::vector<HomogeneousSymbol> dens;
  for (const auto& a : fam.alphas) dens.push_back(make_symbol(a));
  const HomogeneousSymbol num = make_symbol(fam.beta);
  using boost::multiprecision::cpp_int;
  auto monomial = [](const MultiIndex& e, const std::vector<int>& k) {
    cpp_int v = 1;
    for (std::size_t i = 0; i < k.size(); ++i) v *= boost::multiprecision::pow(cpp_int(std::abs(k[i])), e[static_cast<int>(i)]);
    return v;
  };
  ScanResult best;
  bool have = false;
  // Coordinates ordered 0, 1, -1, 2, -2, ... so low positive modes come first within a shell.
  std::vector<int> order{0};
  for (int v = 1; v <= range; ++v) {
    order.push_back(v);
    order.push_back(-v);
  }
  for (int shell = 1; shell <= range; ++shell) {
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const int width = 2 * shell + 1;
    while (true) {
      std::vector<int> k(static_cast<std::size_t>(n));
      int inf = 0;
      for (int i = 0; i < n; ++i) {
        k[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        inf = std::max(inf, std::abs(k[static_cast<std::size_t>(i)]));
      }
      if (inf == shell) {
        if (exact) {
          cpp_int nv = monomial(fam.beta, k), dv = 0;
          for (const auto& a : fam.alphas) dv += monomial(a, k);
          if (dv == 0 && nv != 0) {
            best = {std::numeric_limits<double>::infinity(), std::nullopt, k, true};
            return best;
          }
          if (dv != 0) {
            Rational q(nv, dv);
            if (!have || q > *best.best_exact) {
              best.best_exact = q;
              best.best_k = static_cast<double>(q);
              best.best_freq = k;
              have = true;
            }
          }
        } else {
          double nv = std::abs(num(k)), dv = 0.0;
          for (const auto& d : dens) dv += std::abs(d(k));
          if (dv == 0.0 && nv != 0.0) {
            best = {std::numeric_limits<double>::infinity(), std::nullopt, k, true};
            return best;
          }
          if (dv != 0.0 && (!have || nv / dv > best.best_k)) {
            best.best_k = nv / dv;
            best.best_freq = k;
            have = true;
          }
        }
      }
      int i = n - 1;
      while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == width) idx[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
    }
  }
  return best;
}

EstimateReport maximize_ratio(const DerivativeFamily& fam_in, double p, const TorusGrid& grid, const SolverOptions& opts) {
  DerivativeFamily fam = fam_in;
  fam.p = p;
  fam.validate();
  if (grid.dim() != fam.dim()) throw std::invalid_argument("grid dimension differs from the family dimension");
  const int band = grid.points() / 2 - 1;
  if (band < 4) throw std::invalid_argument("grid must resolve |k|_inf <= 4 (M >= 10)");
  if (opts.starts < 1 || opts.max_iter < 0 || opts.patience < 1 || !(opts.tol >= 0.0))
    throw std::invalid_argument("invalid solver options");
  // At p = 2 the mean of |G|^2 is exact on the base grid because 2B < M.
  const int oversample = p == 2.0 ? 1 : opts.oversample;
  Engine engine(fam, p, grid, band, oversample);

  EstimateReport rep;
  rep.family = fam;
  rep.grid = grid;
  rep.p = p;
  rep.settings = opts;
  rep.settings.warm_starts.clear();
  rep.settings.oversample = oversample;
  rep.seed = opts.seed;
  rep.scan = single_frequency_scan(fam, std::min(opts.scan_range, band));
  if (rep.scan.unbounded)
    throw std::invalid_argument("no finite constant: a mode has m(k) != 0 while every m_j(k) = 0");
  if (is_mixed_second_family(fam)) rep.upper_bound_ref = burkholder_ceiling(p) / 2.0;
  if (find_parity_set(fam.beta, fam.alphas)) rep.theory_lower = burkholder_ceiling(p) / fam.count();

  std::vector<std::pair<std::string, std::vector<Complex>>> starts;
  if (!rep.scan.best_freq.empty() && rep.scan.best_k > 0.0) {
    starts.emplace_back("single-frequency",
                        engine.coefficients(TorusField::from_modes(grid, {{rep.scan.best_freq, 1.0}})));
  }
  DerivativeFamily withf = fam;
  if (!withf.parity_set) withf.parity_set = find_parity_set(fam.beta, fam.alphas);
  if (withf.is_normalized()) {
    const int degree = band % 2 ? band : band - 1;
    auto pair = eigen_witness_pair(withf, square_wave_poly(std::min(degree, 15)), grid);
    std::vector<Complex> v = pair.plus.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += pair.minus.data()[i];
    starts.emplace_back("eigen-witness", engine.coefficients(TorusField(grid, Representation::physical, v, pair.plus.bandlimit())));
  }
  for (const auto& w : opts.warm_starts) {
    if (w.grid().dim() != grid.dim()) throw std::invalid_argument("warm start has the wrong dimension");
    TorusField spec = with_bandlimit(to_spectral(w), std::min(default_band(w), band));
    if (spec.grid().offset() != grid.offset())
      spec = TorusField(TorusGrid(grid.dim(), spec.grid().points(), grid.offset()), Representation::spectral, spec.data(),
                        spec.bandlimit());
    starts.emplace_back("warm-start", engine.coefficients(resample(spec, grid.points())));
  }
  std::uint64_t state = opts.seed;
  for (int i = static_cast<int>(starts.size()); i < opts.starts; ++i) {
    state = mix(state);
    std::mt19937_64 rng(state);
    std::normal_distribution<double> normal;
    std::vector<Complex> v(grid.size());
    const int reach = std::max(1, grid.points() / 4);
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
      auto k = grid.frequency_of(flat);
      bool inside = true;
      for (int ki : k) inside = inside && std::abs(ki) <= reach && std::abs(ki) <= band;
      if (inside) v[flat] = Complex(normal(rng), normal(rng));
    }
    starts.emplace_back("random", engine.coefficients(TorusField(grid, Representation::spectral, v, band)));
  }

  std::vector<std::future<AscentResult>> jobs;
  starts.erase(std::remove_if(starts.begin(), starts.end(), [](const auto& s) { return l2(s.second) == 0.0; }),
               starts.end());
  for (auto& s : starts) {
    jobs.push_back(std::async(std::launch::async, ascend, std::cref(engine), s.second, p, std::cref(opts)));
  }
  AscentResult best;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto res = jobs[i].get();
    rep.starts.push_back({starts[i].first, res.initial, res.ratio, res.iterations});
    if (!res.c.empty() && (rep.best_start < 0 || res.ratio > best.ratio)) {
      best = std::move(res);
      rep.best_start = static_cast<int>(i);
    }
  }
  if (rep.best_start < 0 || !(best.ratio > 0.0)) throw std::runtime_error("all starts are degenerate (ratio 0)");
  rep.k_lower = best.ratio;
  rep.trace = std::move(best.trace);
  rep.witness = engine.field(best.c);
  return rep;
}

}  // namespace sharpk
