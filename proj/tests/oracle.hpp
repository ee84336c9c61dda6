#pragma once

// Independent reference implementations used by the tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

/// Direct O(n^2) DFT of the zero-padded input, single-sided amplitudes.
/// Twiddles come from a table of exp(-2 pi i m / N) evaluated in long double,
/// indexed by k*n mod N, so no angle is ever reduced in floating point.
inline std::vector<double> dft_magnitude(const std::vector<double>& x, std::size_t padded) {
    std::vector<double> c(padded), s(padded);
    for (std::size_t m = 0; m < padded; ++m) {
        const long double ang = -2.0L * std::numbers::pi_v<long double> * m / padded;
        c[m] = static_cast<double>(std::cos(ang));
        s[m] = static_cast<double>(std::sin(ang));
    }
    std::vector<double> out(padded / 2 + 1);
    for (std::size_t k = 0; k <= padded / 2; ++k) {
        double re = 0, im = 0;
        std::size_t idx = 0;
        for (std::size_t n = 0; n < x.size(); ++n) {
            re += x[n] * c[idx];
            im += x[n] * s[idx];
            idx += k;
            if (idx >= padded) idx -= padded;
        }
        const double mag = std::sqrt(re * re + im * im) / static_cast<double>(padded);
        out[k] = (k == 0 || k == padded / 2) ? mag : 2.0 * mag;
    }
    return out;
}

inline std::size_t pow2_at_least(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace oracle
