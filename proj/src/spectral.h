#pragma once

#include <fftw3.h>

#include <complex>
#include <vector>

#include "qfound/pilotwave.h"

namespace qfound::pilotwave::detail {

/// FFTW plans for one grid. Not thread-safe: transforms share one buffer.
class Spectral {
   public:
    explicit Spectral(const GridSpec &grid);
    ~Spectral();
    Spectral(const Spectral &) = delete;
    Spectral &operator=(const Spectral &) = delete;

    void forward(std::vector<Complex> &v) const;
    /// Inverse transform including the 1/N normalization.
    void backward(std::vector<Complex> &v) const;
    /// Angular wavenumbers along `axis` in FFT order.
    const std::vector<double> &wavenumbers(std::size_t axis) const { return k_[axis]; }
    /// Real derivative along `axis` of a real-valued grid function.
    std::vector<double> derivative(const std::vector<double> &f, std::size_t axis) const;

   private:
    GridSpec grid_;
    std::size_t n_;
    fftw_complex *buffer_;
    fftw_plan forward_;
    fftw_plan backward_;
    std::vector<std::vector<double>> k_;
};

}  // namespace qfound::pilotwave::detail
