#pragma once

#include <complex>
#include <vector>

namespace upspec::detail {

// Forward/inverse complex DFT backed by FFTW (ESTIMATE plans, cached per
// length, planner guarded by a mutex). Inverse is normalized by 1/n.
void fft(std::vector<std::complex<double>>& data, bool inverse);

} // namespace upspec::detail
