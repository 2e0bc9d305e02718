#include "spectral.h"

#include <cmath>
#include <cstring>
#include <new>

namespace qfound::pilotwave::detail {

Spectral::Spectral(const GridSpec &grid) : grid_(grid), n_(grid.size()) {
    buffer_ = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * n_));
    if (!buffer_) throw std::bad_alloc();
    int dims[2];
    for (std::size_t k = 0; k < grid.dims(); ++k) dims[k] = static_cast<int>(grid.axis(k).points);
    const int rank = static_cast<int>(grid.dims());
    forward_ = fftw_plan_dft(rank, dims, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft(rank, dims, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);

    for (const Axis &ax : grid.axes()) {
        const std::size_t n = ax.points;
        const double base = 2 * M_PI / (static_cast<double>(n) * ax.spacing());
        std::vector<double> k(n);
        for (std::size_t j = 0; j < n; ++j) {
            auto signed_j = static_cast<double>(j < n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n));
            k[j] = base * signed_j;
        }
        k_.push_back(std::move(k));
    }
}

Spectral::~Spectral() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buffer_);
}

void Spectral::forward(std::vector<Complex> &v) const {
    std::memcpy(buffer_, v.data(), sizeof(fftw_complex) * n_);
    fftw_execute(forward_);
    std::memcpy(static_cast<void *>(v.data()), buffer_, sizeof(fftw_complex) * n_);
}

void Spectral::backward(std::vector<Complex> &v) const {
    std::memcpy(buffer_, v.data(), sizeof(fftw_complex) * n_);
    fftw_execute(backward_);
    std::memcpy(static_cast<void *>(v.data()), buffer_, sizeof(fftw_complex) * n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto &x : v) x *= scale;
}

std::vector<double> Spectral::derivative(const std::vector<double> &f, std::size_t axis) const {
    std::vector<Complex> v(f.begin(), f.end());
    forward(v);
    const std::size_t n_axis = grid_.axis(axis).points;
    const std::size_t inner = grid_.dims() == 2 && axis == 0 ? grid_.axis(1).points : 1;
    const auto &k = k_[axis];
    for (std::size_t idx = 0; idx < n_; ++idx) {
        std::size_t j = (idx / inner) % n_axis;
        // Drop the Nyquist mode so the derivative of a real function stays real.
        v[idx] = j == n_axis / 2 ? Complex(0) : v[idx] * Complex(0, k[j]);
    }
    backward(v);
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = v[i].real();
    return out;
}

}  // namespace qfound::pilotwave::detail
