#include "lyhlab/fft.hpp"

#include <mutex>

#include <fftw3.h>

#include "lyhlab/error.hpp"

namespace lyhlab::fft {
namespace {

// The FFTW planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

class Plan {
 public:
  explicit Plan(fftw_plan plan) : plan_(plan) {
    if (plan_ == nullptr) throw ConsistencyError("FFTW failed to create a plan");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

fftw_complex* as_fftw(std::span<Complex> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

int sign_of(Direction direction) {
  return direction == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
}

}  // namespace

void transform(std::span<Complex> data, std::span<const int> dims, Direction direction) {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  if (total != data.size()) throw InputError("fft: data size does not match dims");
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), as_fftw(data), as_fftw(data),
                        sign_of(direction), FFTW_ESTIMATE);
  }
  Plan(raw).execute();
}

void transform_rows(std::span<Complex> data, int rows, int length, Direction direction) {
  if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(length) != data.size()) {
    throw InputError("fft: data size does not match rows * length");
  }
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_many_dft(1, &length, rows, as_fftw(data), nullptr, 1, length, as_fftw(data),
                             nullptr, 1, length, sign_of(direction), FFTW_ESTIMATE);
  }
  Plan(raw).execute();
}

}  // namespace lyhlab::fft
