#include "hbundle/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace hbundle::fft {
namespace {

using PlanKey = std::tuple<int, int, int, int>;  // dims, N, axis (-1 = all), sign

class PlanCache {
public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dims, int points, int axis, int sign) {
    const PlanKey key{dims, points, axis, sign};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const auto total = static_cast<std::size_t>(dims == 1 ? points : points * points);
    auto* scratch = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (axis < 0 || dims == 1) {
      int n[2] = {points, points};
      plan = fftw_plan_dft(dims, n, scratch, scratch, sign, flags);
    } else {
      // Axis 1 rows are contiguous; axis 0 columns are strided by N.
      int n[1] = {points};
      const int stride = axis == 0 ? points : 1;
      const int dist = axis == 0 ? 1 : points;
      plan = fftw_plan_many_dft(1, n, points, scratch, nullptr, stride, dist, scratch, nullptr,
                                stride, dist, sign, flags);
    }
    fftw_free(scratch);
    if (plan == nullptr) throw std::runtime_error("fftw planning failed");
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

int fftw_sign(Direction dir) { return dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD; }

void execute(fftw_plan plan, Amplitudes& data) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void transform(Amplitudes& data, int dims, int points, Direction dir) {
  execute(cache().get(dims, points, -1, fftw_sign(dir)), data);
}

void transform_axis(Amplitudes& data, int dims, int points, int axis, Direction dir) {
  if (dims == 1) {
    transform(data, dims, points, dir);
    return;
  }
  execute(cache().get(dims, points, axis, fftw_sign(dir)), data);
}

}  // namespace hbundle::fft
