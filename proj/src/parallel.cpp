#include "qnopt/parallel.hpp"

namespace qnopt {

std::size_t default_worker_count() noexcept {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

} // namespace qnopt
