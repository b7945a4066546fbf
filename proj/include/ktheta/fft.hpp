#pragma once

#include <vector>

#include "ktheta/common.hpp"

namespace ktheta {

// unnormalized DFT; sign -1 is forward (sum x_j e^{-2 pi i jk/n}), +1 backward
void fft_inplace(std::vector<cplx>& data, int sign);

inline bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace ktheta
