// Allocation accounting: every global operator new records its size so the
// test can read the live and peak heap use of the library.

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <new>

#include "gausscov/select.hpp"
#include "gausscov/sim.hpp"

namespace {

std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};
std::atomic<std::size_t> g_largest{0};

constexpr std::size_t kHeader = alignof(std::max_align_t);

void* counted_alloc(std::size_t size) {
  void* raw = std::malloc(size + kHeader);
  if (!raw) throw std::bad_alloc();
  *static_cast<std::size_t*>(raw) = size;
  const std::size_t live = g_live.fetch_add(size) + size;
  std::size_t peak = g_peak.load();
  while (live > peak && !g_peak.compare_exchange_weak(peak, live)) {
  }
  std::size_t largest = g_largest.load();
  while (size > largest && !g_largest.compare_exchange_weak(largest, size)) {
  }
  return static_cast<char*>(raw) + kHeader;
}

void counted_free(void* p) noexcept {
  if (!p) return;
  void* raw = static_cast<char*>(p) - kHeader;
  g_live.fetch_sub(*static_cast<std::size_t*>(raw));
  std::free(raw);
}

void reset_peak() {
  g_peak.store(g_live.load());
  g_largest.store(0);
}

}  // namespace

void* operator new(std::size_t size) { return counted_alloc(size); }
void* operator new[](std::size_t size) { return counted_alloc(size); }
void operator delete(void* p) noexcept { counted_free(p); }
void operator delete[](void* p) noexcept { counted_free(p); }
void operator delete(void* p, std::size_t) noexcept { counted_free(p); }
void operator delete[](void* p, std::size_t) noexcept { counted_free(p); }

using namespace gausscov;

TEST(Memory, StepwiseStaysLinearInData) {
  const std::size_t n = 500, q = 100000;
  const std::size_t data_bytes = 8 * n * q;
  reset_peak();
  const DataMatrix x = detail::gaussian_design(n, q, 1);
  std::vector<double> y(n);
  Rng rng(2);
  for (std::size_t i = 0; i < n; ++i) y[i] = 3 * x(i, 10) - 2 * x(i, 50000) + x(i, 99999) + rng.normal();

  const std::size_t before = g_live.load();
  reset_peak();
  SelectionConfig cfg;
  cfg.kmn = 10;
  const SelectionResult r = f1st(x, y, cfg);
  const std::size_t extra = g_peak.load() - before;
  ASSERT_FALSE(r.empty());
  // whole-process peak including the matrix itself
  EXPECT_LT(before + extra, 3 * data_bytes);
  // working memory: a few q-vectors and O(n k) for the basis, never n x n or q x q
  EXPECT_LT(extra, 8 * (4 * q + 4 * n * (cfg.kmn + 5)));
  EXPECT_LT(g_largest.load(), 8 * std::max(n * n, q) / 2);
}

TEST(Memory, AccountingSeesAllocations) {
  const std::size_t before = g_live.load();
  reset_peak();
  { std::vector<double> v(1000); }
  EXPECT_GE(g_peak.load() - before, 8000u);
  EXPECT_EQ(g_live.load(), before);
}
