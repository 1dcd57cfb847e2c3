#pragma once

#include <cstddef>
#include <mutex>
#include <new>

#include <fftw3.h>

namespace runaway::detail {

// FFTW planning is not thread safe; execution with new-array calls is.
std::mutex& fftw_planner_mutex();

template <class T>
struct FftwBuffer {
    T* data = nullptr;
    std::size_t size = 0;

    explicit FftwBuffer(std::size_t n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * n))), size(n) {
        if (data == nullptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace runaway::detail
