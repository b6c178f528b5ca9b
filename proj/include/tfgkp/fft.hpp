#ifndef TFGKP_FFT_HPP
#define TFGKP_FFT_HPP

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace tfgkp::fft {

enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

struct FftwDeleter {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

inline Buffer make_buffer(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!p)
        throw std::bad_alloc();
    return Buffer(p);
}

// FFTW planning is not thread safe; execution with fftw_execute_dft is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t n, Direction dir) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, static_cast<int>(dir));
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        auto buf = make_buffer(n);
        fftw_plan p =
            fftw_plan_dft_1d(static_cast<int>(n), buf.get(), buf.get(), static_cast<int>(dir), FFTW_ESTIMATE);
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache() {
        for (auto& [k, p] : plans_)
            fftw_destroy_plan(p);
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

} // namespace detail

// Unnormalized in-place DFT: forward is sum_j x_j exp(-2 pi i j k / n).
inline void transform(std::vector<std::complex<double>>& data, Direction dir) {
    const std::size_t n = data.size();
    fftw_plan plan = detail::PlanCache::instance().get(n, dir);
    auto buf = detail::make_buffer(n);
    std::copy(data.begin(), data.end(), reinterpret_cast<std::complex<double>*>(buf.get()));
    fftw_execute_dft(plan, buf.get(), buf.get());
    std::copy_n(reinterpret_cast<std::complex<double>*>(buf.get()), n, data.begin());
}

} // namespace tfgkp::fft

#endif
