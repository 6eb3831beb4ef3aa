#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace tdhfb::detail {
namespace {

enum class Layout { columns, rows, both };

using PlanKey = std::tuple<Layout, int, int, std::ptrdiff_t, Direction>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Layout layout, int dim, int M, std::ptrdiff_t count, Direction dir) {
    std::lock_guard lock(mutex_);
    PlanKey key{layout, dim, M, count, dir};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    int n = 1;
    for (int a = 0; a < dim; ++a) n *= M;
    const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding,
    // independent of timing noise.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

    fftw_plan plan = nullptr;
    std::vector<int> dims;
    std::size_t buffer = 0;
    switch (layout) {
      case Layout::columns:
        dims.assign(static_cast<std::size_t>(dim), M);
        buffer = static_cast<std::size_t>(n) * static_cast<std::size_t>(count);
        break;
      case Layout::rows:
        dims.assign(static_cast<std::size_t>(dim), M);
        buffer = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
        break;
      case Layout::both:
        dims.assign(static_cast<std::size_t>(2 * dim), M);
        buffer = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
        break;
    }
    auto* scratch = fftw_alloc_complex(buffer);
    switch (layout) {
      case Layout::columns:
        plan = fftw_plan_many_dft(dim, dims.data(), static_cast<int>(count), scratch, nullptr, 1, n,
                                  scratch, nullptr, 1, n, sign, flags);
        break;
      case Layout::rows:
        plan = fftw_plan_many_dft(dim, dims.data(), n, scratch, nullptr, n, 1, scratch, nullptr, n, 1,
                                  sign, flags);
        break;
      case Layout::both:
        plan = fftw_plan_many_dft(2 * dim, dims.data(), 1, scratch, nullptr, 1, 0, scratch, nullptr,
                                  1, 0, sign, flags);
        break;
    }
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void run(fftw_plan plan, std::complex<double>* data) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, p, p);
}

}  // namespace

void fft_columns(int dim, int M, std::complex<double>* data, std::ptrdiff_t count, Direction dir) {
  run(cache().get(Layout::columns, dim, M, count, dir), data);
}

void fft_rows(int dim, int M, std::complex<double>* data, Direction dir) {
  run(cache().get(Layout::rows, dim, M, 0, dir), data);
}

void fft_both(int dim, int M, std::complex<double>* data, Direction dir) {
  run(cache().get(Layout::both, dim, M, 0, dir), data);
}

const char* fft_library_version() { return fftw_version; }

}  // namespace tdhfb::detail
