#include "dsnav/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "dsnav/errors.hpp"

namespace dsnav::kernels {

const Ops* avx2_ops_or_null();  // defined in kernels_avx2.cpp

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

bool avx2_available() { return avx2_ops_or_null() != nullptr && cpu_has_avx2(); }

void select(Backend backend) {
    switch (backend) {
        case Backend::Scalar:
            g_active.store(&scalar_ops());
            return;
        case Backend::Avx2:
            if (!avx2_available()) throw Error("kernels: avx2 backend unavailable on this CPU/build");
            g_active.store(avx2_ops_or_null());
            return;
    }
    throw Error("kernels: unknown backend");
}

void select_auto() {
    if (const char* env = std::getenv("DSNAV_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) {
            select(Backend::Scalar);
            return;
        }
        if (std::strcmp(env, "avx2") == 0) {
            select(Backend::Avx2);
            return;
        }
        throw Error(std::string("kernels: bad DSNAV_KERNELS value '") + env + "' (want scalar|avx2)");
    }
    g_active.store(avx2_available() ? avx2_ops_or_null() : &scalar_ops());
}

Backend active_backend() { return &ops() == &scalar_ops() ? Backend::Scalar : Backend::Avx2; }

const Ops& ops() {
    const Ops* t = g_active.load();
    if (t == nullptr) {
        select_auto();
        t = g_active.load();
    }
    return *t;
}

}  // namespace dsnav::kernels
