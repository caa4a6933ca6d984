#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace hnoise::detail {

namespace {

enum class PlanKind { r2c, c2r };

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

template <typename T>
FftwBuffer<T> allocate(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

// The planner is not thread-safe; execution through the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(PlanKind kind, std::size_t n) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(kind, n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto real = allocate<double>(n);
    auto cplx = allocate<fftw_complex>(n / 2 + 1);
    const int size = static_cast<int>(n);
    fftw_plan plan = kind == PlanKind::r2c
                         ? fftw_plan_dft_r2c_1d(size, real.get(), cplx.get(), FFTW_ESTIMATE)
                         : fftw_plan_dft_c2r_1d(size, cplx.get(), real.get(), FFTW_ESTIMATE);
    if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<PlanKind, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

std::vector<std::complex<double>> real_forward(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  fftw_plan plan = cache().get(PlanKind::r2c, n);
  auto in = allocate<double>(n);
  auto out = allocate<fftw_complex>(n / 2 + 1);
  std::memcpy(in.get(), x.data(), n * sizeof(double));
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  std::vector<std::complex<double>> result(n / 2 + 1);
  for (std::size_t l = 0; l < result.size(); ++l) {
    result[l] = {out[l][0], out[l][1]};
  }
  return result;
}

std::vector<double> hermitian_inverse(std::span<const std::complex<double>> half, std::size_t n) {
  if (half.size() != n / 2 + 1) {
    throw std::invalid_argument("half spectrum must have n/2+1 entries");
  }
  fftw_plan plan = cache().get(PlanKind::c2r, n);
  auto in = allocate<fftw_complex>(n / 2 + 1);
  auto out = allocate<double>(n);
  for (std::size_t l = 0; l < half.size(); ++l) {
    in[l][0] = half[l].real();
    in[l][1] = half[l].imag();
  }
  fftw_execute_dft_c2r(plan, in.get(), out.get());
  return std::vector<double>(out.get(), out.get() + n);
}

}  // namespace hnoise::detail
