#include <atomic>

#include "freeconv/kernels.hpp"

namespace freeconv::kernels {

#if defined(FREECONV_HAVE_AVX2_TU)
const Backend& avx2_backend();
#endif
#if defined(FREECONV_HAVE_NEON_TU)
const Backend& neon_backend();
#endif

namespace {

const Backend* detect() {
#if defined(FREECONV_HAVE_AVX2_TU)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return &avx2_backend();
#endif
#if defined(FREECONV_HAVE_NEON_TU)
  return &neon_backend();
#endif
  return &scalar_backend();
}

std::atomic<const Backend*>& slot() {
  static std::atomic<const Backend*> current{detect()};
  return current;
}

}  // namespace

const Backend& active_backend() { return *slot().load(std::memory_order_relaxed); }

std::vector<const Backend*> available_backends() {
  std::vector<const Backend*> v{&scalar_backend()};
#if defined(FREECONV_HAVE_AVX2_TU)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    v.push_back(&avx2_backend());
#endif
#if defined(FREECONV_HAVE_NEON_TU)
  v.push_back(&neon_backend());
#endif
  return v;
}

bool force_backend(std::string_view name) {
  for (const Backend* b : available_backends()) {
    if (name == b->name) {
      slot().store(b, std::memory_order_relaxed);
      return true;
    }
  }
  return false;
}

}  // namespace freeconv::kernels
