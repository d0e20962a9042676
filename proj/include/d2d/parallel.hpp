#pragma once

#include <exception>
#include <mutex>

namespace d2d {

/// Selects between the OpenMP kernel and its serial reference loop. Both
/// produce identical results; the serial path is kept for testing.
enum class Execution { serial, parallel };

/// Collects the first exception thrown inside an OpenMP region so it can be
/// rethrown on the calling thread once the region has joined.
class ExceptionSlot {
 public:
  template <typename F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
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

int max_threads();

}  // namespace d2d
