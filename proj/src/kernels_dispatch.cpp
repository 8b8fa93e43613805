#include "aptshield/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace aptshield::kernels {

namespace {

const Kernels& select() {
    const char* force = std::getenv("APTSHIELD_KERNELS");
    if (force != nullptr) {
        if (std::strcmp(force, "scalar") == 0) return scalar_kernels();
        if (std::strcmp(force, "avx2") == 0) {
            const Kernels* k = avx2_kernels();
            if (k != nullptr) return *k;
            return scalar_kernels();
        }
    }
    const Kernels* k = avx2_kernels();
    return k != nullptr ? *k : scalar_kernels();
}

}  // namespace

const Kernels& active_kernels() {
    static const Kernels& chosen = select();
    return chosen;
}

}  // namespace aptshield::kernels
