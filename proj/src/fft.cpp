#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace sharpk::detail {
namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int points, int sign) {
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(dim, points, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    std::vector<int> shape(static_cast<std::size_t>(dim), points);
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(points);
    // Scratch arrays only; execution goes through fftw_execute_dft on caller buffers.
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, shape.data(), in, out, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    plans.emplace(key, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_cube(std::span<std::complex<double>> data, int dim, int points, int sign) {
  if (dim == 0 || data.size() <= 1) return;
  fftw_plan plan = cache().get(dim, points, sign);
  std::vector<std::complex<double>> out(data.size());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data.data()), reinterpret_cast<fftw_complex*>(out.data()));
  std::copy(out.begin(), out.end(), data.begin());
}

}  // namespace sharpk::detail
