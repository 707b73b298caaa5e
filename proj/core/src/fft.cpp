#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace upspec::detail {

namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t n = 0;

    ~PlanPair() {
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
        if (buf) fftw_free(buf);
    }
};

std::mutex g_mutex;
std::map<std::size_t, PlanPair> g_plans;

PlanPair& plan_for(std::size_t n) {
    auto it = g_plans.find(n);
    if (it != g_plans.end()) {
        return it->second;
    }
    PlanPair& p = g_plans[n];
    p.n = n;
    p.buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    p.forward = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p.inverse = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    return p;
}

} // namespace

void fft(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanPair& p = plan_for(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.buf[i][0] = data[i].real();
        p.buf[i][1] = data[i].imag();
    }
    fftw_execute(inverse ? p.inverse : p.forward);
    const double scale = inverse ? 1.0 / static_cast<double>(n) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        data[i] = std::complex<double>(p.buf[i][0] * scale, p.buf[i][1] * scale);
    }
}

} // namespace upspec::detail
