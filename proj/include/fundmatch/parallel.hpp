#pragma once

#include <exception>
#include <mutex>

namespace fundmatch::parallel {

/// Caps the OpenMP team size; 0 restores the runtime default.
void set_max_threads(int n);
int max_threads();

/// Holds the first exception thrown inside an OpenMP region so it can be
/// rethrown after the region ends.
class FirstError {
 public:
  template <typename F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace fundmatch::parallel
