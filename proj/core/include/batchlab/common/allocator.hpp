#pragma once

#include <cstdlib>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace batchlab {

/// Training allocates many short-lived tensors just above glibc's default
/// 128 KiB mmap threshold, which turns every allocation into an mmap/munmap
/// pair. Raising the thresholds keeps them on the heap. 32 MiB is the largest
/// mmap threshold glibc accepts on 64-bit targets. Call once from main.
inline void configure_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

}  // namespace batchlab
