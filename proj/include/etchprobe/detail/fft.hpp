#pragma once

#include <complex>
#include <vector>

#include "etchprobe/common.hpp"

namespace etchprobe::detail {

/// Minimal iterative radix-2 FFT with a precomputed twiddle table, enough to
/// run repeated same-size convolutions cheaply.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw std::logic_error("Fft: size must be a power of two");
        roots_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / n;
            roots_[k] = {std::cos(ang), std::sin(ang)};
        }
        rev_.resize(n);
        std::size_t bits = 0;
        while ((1u << bits) < n)
            ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b))
                    r |= std::size_t{1} << (bits - 1 - b);
            rev_[i] = r;
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::vector<std::complex<double>>& a) const { transform(a, false); }

    void inverse(std::vector<std::complex<double>>& a) const {
        transform(a, true);
        const double inv = 1.0 / static_cast<double>(n_);
        for (auto& v : a)
            v *= inv;
    }

private:
    void transform(std::vector<std::complex<double>>& a, bool invert) const {
        if (a.size() != n_)
            throw std::logic_error("Fft: buffer size mismatch");
        for (std::size_t i = 0; i < n_; ++i)
            if (i < rev_[i])
                std::swap(a[i], a[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t stride = n_ / len;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t k = 0; k < len / 2; ++k) {
                    std::complex<double> w = roots_[k * stride];
                    if (invert)
                        w = std::conj(w);
                    const auto u = a[i + k];
                    const auto v = a[i + k + len / 2] * w;
                    a[i + k] = u + v;
                    a[i + k + len / 2] = u - v;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::complex<double>> roots_;
    std::vector<std::size_t> rev_;
};

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

} // namespace etchprobe::detail
