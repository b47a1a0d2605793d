#include "lrei/audit.hpp"

#include <algorithm>
#include <atomic>

namespace lrei::audit {

namespace {
std::atomic<long> g_live{0};
std::atomic<long> g_peak{0};
std::atomic<std::size_t> g_max_alloc{0};
}  // namespace

void block_acquired() {
  long live = g_live.fetch_add(1) + 1;
  long peak = g_peak.load();
  while (live > peak && !g_peak.compare_exchange_weak(peak, live)) {
  }
}

void block_released() { g_live.fetch_sub(1); }

long live_blocks() { return g_live.load(); }
long peak_blocks() { return g_peak.load(); }

void reset_blocks() {
  g_peak.store(g_live.load());
}

void record_alloc(std::size_t bytes) {
  std::size_t cur = g_max_alloc.load();
  while (bytes > cur && !g_max_alloc.compare_exchange_weak(cur, bytes)) {
  }
}

std::size_t max_alloc_bytes() { return g_max_alloc.load(); }
void reset_alloc() { g_max_alloc.store(0); }

}  // namespace lrei::audit
