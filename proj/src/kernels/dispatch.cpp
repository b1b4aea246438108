#include <cstdlib>
#include <string_view>

#include "koopman/kernels.hpp"

namespace koopman::kernels {

#if defined(KOOPMAN_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2() {
#if defined(KOOPMAN_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("KOOPMAN_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar();
    if (const KernelTable* v = avx2()) return *v;
    return scalar();
  }();
  return chosen;
}

}  // namespace koopman::kernels
