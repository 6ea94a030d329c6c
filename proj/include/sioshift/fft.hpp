#pragma once
// In-place complex DFT on top of FFTW with a process-wide plan cache.

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <span>
#include <utility>

namespace sioshift {

namespace detail {

class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    /// Plan for an in-place transform of length n on an fftw_malloc'd buffer.
    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mu_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

private:
    FftPlans() = default;
    ~FftPlans() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mu_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalised DFT: X_k = sum_j x_j exp(-+2 pi i jk/n) (minus sign for forward).
inline void fft(std::span<std::complex<double>> data, bool inverse = false) {
    const int n = static_cast<int>(data.size());
    if (n == 0) return;
    fftw_plan plan = detail::FftPlans::instance().get(n, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
    fftw_complex* buf = fftw_alloc_complex(data.size());
    std::memcpy(buf, data.data(), data.size() * sizeof(fftw_complex));
    fftw_execute_dft(plan, buf, buf);
    std::memcpy(static_cast<void*>(data.data()), buf, data.size() * sizeof(fftw_complex));
    fftw_free(buf);
}

/// Angular frequency of DFT bin k for sample spacing h.
inline double fftFrequency(std::size_t k, std::size_t n, double h) {
    const long kk = k < (n + 1) / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
    return 2.0 * 3.14159265358979323846 * static_cast<double>(kk) / (static_cast<double>(n) * h);
}

}  // namespace sioshift
