#include "barostat/parallel.hpp"

#include <algorithm>
#include <memory>
#include <mutex>

#include <tbb/global_control.h>

namespace barostat {
namespace {
std::mutex g_mutex;
int g_threads = 1;
std::unique_ptr<tbb::global_control> g_control;
}  // namespace

void set_thread_count(int n) {
  std::lock_guard lock(g_mutex);
  g_threads = std::max(1, n);
  g_control = std::make_unique<tbb::global_control>(
      tbb::global_control::max_allowed_parallelism,
      static_cast<std::size_t>(g_threads));
}

int thread_count() noexcept { return g_threads; }

}  // namespace barostat
