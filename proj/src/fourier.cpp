#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "psido/errors.hpp"
#include "psido/grid.hpp"

namespace psido {
namespace {

// FFTW planning is not thread-safe; plans are created once per shape under
// a lock and executed through the new-array interface, which is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = 1;
    int dims[3];
    for (int a = 0; a < dim; ++a) {
      dims[a] = static_cast<int>(n);
      total *= n;
    }
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan plan = fftw_plan_dft(dim, dims, scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) throw InvalidInput("FFTW could not plan a transform of this shape");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

// (-1)^{j_1 + ... + j_d}: the phase from placing the origin at the box centre.
double centring_phase(const Grid& grid, std::size_t flat) {
  const std::size_t n = grid.points_per_axis();
  std::size_t parity = 0;
  for (int a = 0; a < grid.dim(); ++a) {
    parity += flat % n;
    flat /= n;
  }
  return (parity % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

SampledFunction fourier_transform(const SampledFunction& f, Direction direction) {
  const Grid& grid = f.grid();
  if (f.size() != grid.size()) throw InvalidInput("sample count does not match grid");
  f.require_finite();

  std::vector<Complex> data(f.values().begin(), f.values().end());
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  const std::size_t count = data.size();

  if (direction == Direction::forward) {
    fftw_execute_dft(PlanCache::instance().get(grid.dim(), grid.points_per_axis(), FFTW_FORWARD), raw, raw);
    const double w = grid.cell_volume();
    for (std::size_t j = 0; j < count; ++j) data[j] *= w * centring_phase(grid, j);
  } else {
    for (std::size_t j = 0; j < count; ++j) data[j] *= centring_phase(grid, j);
    fftw_execute_dft(PlanCache::instance().get(grid.dim(), grid.points_per_axis(), FFTW_BACKWARD), raw, raw);
    // (2 pi)^{-d} (pi / R)^d = (2R)^{-d}
    const double w = std::pow(2.0 * grid.half_extent(), -grid.dim());
    for (auto& v : data) v *= w;
  }
  return SampledFunction(grid, std::move(data));
}

}  // namespace psido
