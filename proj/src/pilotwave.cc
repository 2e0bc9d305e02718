#include "qfound/pilotwave.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

#include "spectral.h"

namespace qfound::pilotwave {

namespace {

bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Periodic linear-interpolation stencil along one axis.
struct Stencil {
    std::size_t lo, hi;
    double frac;
};

Stencil stencil(const Axis &ax, double q) {
    const double s = (q - ax.min) / ax.spacing();
    double fl = std::floor(s);
    double frac = s - fl;
    auto n = static_cast<long>(ax.points);
    long lo = static_cast<long>(fl) % n;
    if (lo < 0) lo += n;
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>((lo + 1) % n), frac};
}

double interpolate(const GridSpec &grid, const std::vector<double> &f, const Point &q) {
    Stencil sx = stencil(grid.axis(0), q[0]);
    if (grid.dims() == 1) return (1 - sx.frac) * f[sx.lo] + sx.frac * f[sx.hi];
    Stencil sy = stencil(grid.axis(1), q[1]);
    const double f00 = f[grid.flat_index(sx.lo, sy.lo)], f01 = f[grid.flat_index(sx.lo, sy.hi)];
    const double f10 = f[grid.flat_index(sx.hi, sy.lo)], f11 = f[grid.flat_index(sx.hi, sy.hi)];
    return (1 - sx.frac) * ((1 - sy.frac) * f00 + sy.frac * f01) + sx.frac * ((1 - sy.frac) * f10 + sy.frac * f11);
}

double gaussian_outside_mass(const GaussianProfile &g, const GridSpec &grid) {
    double inside = 1;
    for (std::size_t k = 0; k < grid.dims(); ++k) {
        const double s = std::sqrt(2.0) * g.width[k];
        inside *= 0.5 * (std::erf((grid.axis(k).max - g.center[k]) / s) - std::erf((grid.axis(k).min - g.center[k]) / s));
    }
    return 1 - inside;
}

void validate_gaussian(const GaussianProfile &g, std::size_t dims) {
    if (g.center.size() != dims || g.width.size() != dims || g.momentum.size() != dims) {
        throw std::invalid_argument("gaussian profile: parameter count does not match grid dimension");
    }
    for (double w : g.width) {
        if (!(w > 0)) throw std::invalid_argument("gaussian profile: width must be positive");
    }
}

Complex gaussian_value(const GaussianProfile &g, const Point &q, std::size_t dims) {
    Complex v = 1;
    for (std::size_t k = 0; k < dims; ++k) {
        const double s = g.width[k];
        const double d = q[k] - g.center[k];
        v *= std::pow(2 * M_PI * s * s, -0.25) * std::exp(Complex(-d * d / (4 * s * s), g.momentum[k] * q[k]));
    }
    return v;
}

// Cumulative distribution of the cell measure along one axis. Cell j is
// centred on node j; the lower half of cell 0 wraps to the top of the axis.
class CellCdf {
   public:
    CellCdf(const Axis &ax, std::vector<double> masses) : ax_(ax) {
        const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
        for (auto &m : masses) m /= total;
        const std::size_t n = ax.points;
        const double h = ax.spacing();
        // Segments: [min, min+h/2) for cell 0, then cells 1..n-1, then [max-h/2, max) for cell 0.
        edges_.push_back(ax.min);
        cum_.push_back(0);
        auto push = [&](double right, double mass) {
            edges_.push_back(right);
            cum_.push_back(cum_.back() + mass);
        };
        push(ax.min + h / 2, masses[0] / 2);
        for (std::size_t j = 1; j < n; ++j) push(ax.node(j) + h / 2, masses[j]);
        push(ax.max, masses[0] / 2);
    }

    double operator()(double q) const {
        if (q <= edges_.front()) return 0;
        if (q >= edges_.back()) return 1;
        auto it = std::upper_bound(edges_.begin(), edges_.end(), q);
        std::size_t seg = static_cast<std::size_t>(it - edges_.begin()) - 1;
        const double w = (q - edges_[seg]) / (edges_[seg + 1] - edges_[seg]);
        return cum_[seg] + w * (cum_[seg + 1] - cum_[seg]);
    }

   private:
    Axis ax_;
    std::vector<double> edges_;
    std::vector<double> cum_;
};

double ks_distance(std::vector<double> samples, const CellCdf &cdf) {
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

std::vector<double> marginal_masses(const GridWavefunction &psi, std::size_t axis) {
    const GridSpec &g = psi.grid;
    std::vector<double> out(g.axis(axis).points, 0.0);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        std::size_t j = g.dims() == 1 ? idx : (axis == 0 ? idx / g.axis(1).points : idx % g.axis(1).points);
        out[j] += std::norm(psi.values[idx]);
    }
    return out;
}

// Strict inversions of a: pairs i < j with a[i] > a[j].
std::size_t count_inversions(std::vector<double> &a, std::vector<double> &scratch, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    std::size_t mid = lo + (hi - lo) / 2;
    std::size_t count = count_inversions(a, scratch, lo, mid) + count_inversions(a, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (a[j] < a[i]) {
            count += mid - i;
            scratch[k++] = a[j++];
        } else {
            scratch[k++] = a[i++];
        }
    }
    while (i < mid) scratch[k++] = a[i++];
    while (j < hi) scratch[k++] = a[j++];
    std::copy(scratch.begin() + static_cast<long>(lo), scratch.begin() + static_cast<long>(hi),
              a.begin() + static_cast<long>(lo));
    return count;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid and wavefunction

GridSpec::GridSpec(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 2) throw std::invalid_argument("GridSpec: need one or two axes");
    for (const Axis &ax : axes_) {
        if (!(ax.min < ax.max)) throw std::invalid_argument("GridSpec: axis min must be below max");
        if (ax.points < 64 || !is_power_of_two(ax.points)) {
            throw std::invalid_argument("GridSpec: point count must be a power of two >= 64, got " +
                                        std::to_string(ax.points));
        }
    }
}

std::size_t GridSpec::size() const {
    std::size_t n = 1;
    for (const Axis &ax : axes_) n *= ax.points;
    return n;
}

double GridSpec::cell_volume() const {
    double v = 1;
    for (const Axis &ax : axes_) v *= ax.spacing();
    return v;
}

Point GridSpec::node(std::size_t flat) const {
    if (dims() == 1) return {axes_[0].node(flat), 0};
    return {axes_[0].node(flat / axes_[1].points), axes_[1].node(flat % axes_[1].points)};
}

bool GridSpec::contains(const Point &q) const {
    for (std::size_t k = 0; k < dims(); ++k) {
        if (!(q[k] >= axes_[k].min && q[k] < axes_[k].max)) return false;
    }
    return true;
}

double discrete_norm(const GridSpec &grid, const std::vector<Complex> &values) {
    double s = 0;
    for (const auto &v : values) s += std::norm(v);
    return std::sqrt(s * grid.cell_volume());
}

GridWavefunction::GridWavefunction(GridSpec g, std::vector<Complex> v, double t)
    : grid(std::move(g)), values(std::move(v)), time(t) {
    if (values.size() != grid.size()) throw std::invalid_argument("GridWavefunction: value count does not match grid");
    for (const auto &x : values) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
            throw std::invalid_argument("GridWavefunction: non-finite value");
        }
    }
    const double n = norm();
    if (std::abs(n - 1) > kNormTolerance) {
        throw std::invalid_argument("GridWavefunction: norm " + std::to_string(n) + " is not 1");
    }
}

GridWavefunction GridWavefunction::normalized(GridSpec g, std::vector<Complex> v, double t) {
    const double n = discrete_norm(g, v);
    if (!(n > 0) || !std::isfinite(n)) throw std::invalid_argument("GridWavefunction: cannot normalize");
    for (auto &x : v) x /= n;
    return GridWavefunction(std::move(g), std::move(v), t);
}

double GridWavefunction::norm() const { return discrete_norm(grid, values); }

std::vector<double> GridWavefunction::density() const {
    std::vector<double> d(values.size());
    std::transform(values.begin(), values.end(), d.begin(), [](const Complex &v) { return std::norm(v); });
    return d;
}

// ---------------------------------------------------------------------------
// Physics

void PhysicsParams::validate(const GridSpec &grid) const {
    if (masses.size() != grid.dims()) throw std::invalid_argument("PhysicsParams: one mass per axis required");
    for (double m : masses) {
        if (!(m > 0) || !std::isfinite(m)) throw std::invalid_argument("PhysicsParams: masses must be positive");
    }
    std::visit(overloaded{
                   [](const FreePotential &) {},
                   [&](const HarmonicPotential &h) {
                       if (h.omega.size() != grid.dims() || h.center.size() != grid.dims()) {
                           throw std::invalid_argument("harmonic potential: parameter count does not match grid");
                       }
                   },
                   [&](const DoubleSlitPotential &d) {
                       if (grid.dims() != 2) throw std::invalid_argument("double-slit barrier needs a two-axis grid");
                       if (!(d.thickness > 0) || !(d.slit_width > 0)) {
                           throw std::invalid_argument("double-slit barrier: thickness and slit width must be positive");
                       }
                   },
               },
               potential);
}

double PhysicsParams::potential_at(const Point &q, std::size_t dims) const {
    return std::visit(overloaded{
                          [](const FreePotential &) { return 0.0; },
                          [&](const HarmonicPotential &h) {
                              double v = 0;
                              for (std::size_t k = 0; k < dims; ++k) {
                                  const double d = q[k] - h.center[k];
                                  v += 0.5 * masses[k] * h.omega[k] * h.omega[k] * d * d;
                              }
                              return v;
                          },
                          [&](const DoubleSlitPotential &d) {
                              if (std::abs(q[1] - d.wall) >= d.thickness / 2) return 0.0;
                              const double half = d.separation / 2;
                              const bool open = std::abs(q[0] - half) < d.slit_width / 2 ||
                                                std::abs(q[0] + half) < d.slit_width / 2;
                              return open ? 0.0 : d.height;
                          },
                      },
                      potential);
}

GridWavefunction init_wavefunction(const GridSpec &grid, const Profile &profile) {
    std::vector<Complex> values(grid.size());
    double leakage = std::visit(
        overloaded{
            [&](const GaussianProfile &g) {
                validate_gaussian(g, grid.dims());
                for (std::size_t i = 0; i < values.size(); ++i) values[i] = gaussian_value(g, grid.node(i), grid.dims());
                return gaussian_outside_mass(g, grid);
            },
            [&](const TwoGaussianProfile &t) {
                validate_gaussian(t.first, grid.dims());
                validate_gaussian(t.second, grid.dims());
                const Complex w2 = std::polar(t.weight_second, t.relative_phase);
                for (std::size_t i = 0; i < values.size(); ++i) {
                    const Point q = grid.node(i);
                    values[i] = t.weight_first * gaussian_value(t.first, q, grid.dims()) +
                                w2 * gaussian_value(t.second, q, grid.dims());
                }
                const double a = t.weight_first * t.weight_first, b = t.weight_second * t.weight_second;
                return (a * gaussian_outside_mass(t.first, grid) + b * gaussian_outside_mass(t.second, grid)) / (a + b);
            },
        },
        profile);
    if (leakage > 1e-6) {
        throw std::invalid_argument("init_wavefunction: profile leaks " + std::to_string(leakage) +
                                    " of its probability outside the grid");
    }
    return GridWavefunction::normalized(grid, std::move(values));
}

double max_stable_dt(const GridSpec &grid, const PhysicsParams &params) {
    params.validate(grid);
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.dims(); ++k) {
        const double h = grid.axis(k).spacing();
        bound = std::min(bound, 0.25 * params.masses[k] * h * h);
    }
    double vmax = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        vmax = std::max(vmax, std::abs(params.potential_at(grid.node(i), grid.dims())));
    }
    if (vmax > 0) bound = std::min(bound, 0.1 / vmax);
    return bound;
}

// ---------------------------------------------------------------------------
// Split operator

struct SplitOperator::Impl {
    detail::Spectral spectral;
    std::vector<Complex> half_kick;
    std::vector<Complex> kinetic;

    explicit Impl(const GridSpec &g) : spectral(g) {}
};

SplitOperator::SplitOperator(const GridSpec &grid, const PhysicsParams &params, double dt) : dt_(dt) {
    if (!(dt > 0)) throw std::invalid_argument("SplitOperator: dt must be positive");
    const double bound = max_stable_dt(grid, params);
    if (dt > bound * (1 + 1e-12)) {
        throw std::invalid_argument("SplitOperator: dt " + std::to_string(dt) + " exceeds the stability bound " +
                                    std::to_string(bound));
    }
    impl_ = std::make_unique<Impl>(grid);
    const std::size_t n = grid.size();
    impl_->half_kick.resize(n);
    impl_->kinetic.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        impl_->half_kick[i] = std::polar(1.0, -0.5 * dt * params.potential_at(grid.node(i), grid.dims()));
        double energy = 0;
        if (grid.dims() == 1) {
            const double k = impl_->spectral.wavenumbers(0)[i];
            energy = k * k / (2 * params.masses[0]);
        } else {
            const std::size_t ny = grid.axis(1).points;
            const double kx = impl_->spectral.wavenumbers(0)[i / ny];
            const double ky = impl_->spectral.wavenumbers(1)[i % ny];
            energy = kx * kx / (2 * params.masses[0]) + ky * ky / (2 * params.masses[1]);
        }
        impl_->kinetic[i] = std::polar(1.0, -dt * energy);
    }
}

SplitOperator::~SplitOperator() = default;
SplitOperator::SplitOperator(SplitOperator &&) noexcept = default;
SplitOperator &SplitOperator::operator=(SplitOperator &&) noexcept = default;

void SplitOperator::step(std::vector<Complex> &v) const {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) v[i] *= impl_->half_kick[i];
    impl_->spectral.forward(v);
    for (std::size_t i = 0; i < n; ++i) v[i] *= impl_->kinetic[i];
    impl_->spectral.backward(v);
    for (std::size_t i = 0; i < n; ++i) v[i] *= impl_->half_kick[i];
}

GridWavefunction SplitOperator::step(const GridWavefunction &psi) const {
    std::vector<Complex> v = psi.values;
    step(v);
    return GridWavefunction(psi.grid, std::move(v), psi.time + dt_);
}

GridWavefunction step_schrodinger(const GridWavefunction &psi, const PhysicsParams &params, double dt) {
    return SplitOperator(psi.grid, params, dt).step(psi);
}

// ---------------------------------------------------------------------------
// Guiding equation

namespace {

struct FieldBuilder {
    // J_k = Re(psi) d_k Im(psi) - Im(psi) d_k Re(psi); exactly zero for real psi.
    static void build(const GridWavefunction &psi, const detail::Spectral &spectral, std::vector<double> &density,
                      std::array<std::vector<double>, 2> &current) {
        const std::size_t n = psi.values.size();
        std::vector<double> re(n), im(n);
        density.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            re[i] = psi.values[i].real();
            im[i] = psi.values[i].imag();
            density[i] = re[i] * re[i] + im[i] * im[i];
        }
        for (std::size_t k = 0; k < psi.grid.dims(); ++k) {
            std::vector<double> dre = spectral.derivative(re, k);
            std::vector<double> dim = spectral.derivative(im, k);
            current[k].resize(n);
            for (std::size_t i = 0; i < n; ++i) current[k][i] = re[i] * dim[i] - im[i] * dre[i];
        }
    }
};

}  // namespace

VelocityField::VelocityField(const GridWavefunction &psi, const PhysicsParams &params)
    : grid_(psi.grid), masses_(params.masses) {
    params.validate(grid_);
    detail::Spectral spectral(grid_);
    FieldBuilder::build(psi, spectral, density_, current_);
    floor_ = kNodeFloor * *std::max_element(density_.begin(), density_.end());
}

Point VelocityField::at(const Point &q) const {
    const double rho = std::max(interpolate(grid_, density_, q), floor_);
    Point v{0, 0};
    for (std::size_t k = 0; k < grid_.dims(); ++k) v[k] = interpolate(grid_, current_[k], q) / (masses_[k] * rho);
    return v;
}

std::vector<Point> velocity_field(const GridWavefunction &psi, const PhysicsParams &params,
                                  const std::vector<Point> &positions) {
    VelocityField field(psi, params);
    std::vector<Point> out;
    out.reserve(positions.size());
    for (const Point &q : positions) {
        if (!psi.grid.contains(q)) throw std::invalid_argument("velocity_field: position outside the grid");
        out.push_back(field.at(q));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ensembles

std::size_t BohmianEnsemble::absorbed_count() const {
    return static_cast<std::size_t>(std::count_if(absorbed_at.begin(), absorbed_at.end(), [](long a) { return a >= 0; }));
}

BohmianEnsemble sample_equilibrium(const GridWavefunction &psi, std::size_t n, RngStream &rng) {
    if (n == 0) throw std::invalid_argument("sample_equilibrium: need at least one sample");
    const GridSpec &g = psi.grid;
    std::vector<double> cum(g.size());
    double total = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        total += std::norm(psi.values[i]);
        cum[i] = total;
    }
    BohmianEnsemble e;
    e.dims = g.dims();
    e.positions.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double u = rng.uniform() * total;
        auto cell = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
        cell = std::min(cell, g.size() - 1);
        Point q = g.node(cell);
        for (std::size_t k = 0; k < g.dims(); ++k) {
            const Axis &ax = g.axis(k);
            q[k] += (rng.uniform() - 0.5) * ax.spacing();
            if (q[k] < ax.min) q[k] += ax.max - ax.min;
            if (q[k] >= ax.max) q[k] -= ax.max - ax.min;
        }
        e.positions.push_back(q);
    }
    e.times = {psi.time};
    e.history = {e.positions};
    e.absorbed_at.assign(n, -1);
    return e;
}

IntegrationResult integrate_trajectories(const GridWavefunction &psi0, const PhysicsParams &params,
                                         BohmianEnsemble ensemble, const IntegrationOptions &opt) {
    params.validate(psi0.grid);
    if (opt.save_every == 0) throw std::invalid_argument("integrate_trajectories: save_every must be positive");
    if (ensemble.dims != psi0.grid.dims()) throw std::invalid_argument("integrate_trajectories: dimension mismatch");
    const GridSpec &grid = psi0.grid;
    const double dt = opt.dt;
    SplitOperator half_step(grid, params, dt / 2);
    detail::Spectral spectral(grid);

    struct Snapshot {
        std::vector<double> density;
        std::array<std::vector<double>, 2> current;
        double floor;
    };
    auto snapshot = [&](const GridWavefunction &psi) {
        Snapshot s;
        FieldBuilder::build(psi, spectral, s.density, s.current);
        s.floor = kNodeFloor * *std::max_element(s.density.begin(), s.density.end());
        return s;
    };
    auto velocity = [&](const Snapshot &s, const Point &q) {
        const double rho = std::max(interpolate(grid, s.density, q), s.floor);
        Point v{0, 0};
        for (std::size_t k = 0; k < grid.dims(); ++k) v[k] = interpolate(grid, s.current[k], q) / (params.masses[k] * rho);
        return v;
    };
    auto inside_margin = [&](const Point &q) {
        for (std::size_t k = 0; k < grid.dims(); ++k) {
            const Axis &ax = grid.axis(k);
            const double m = opt.margin_cells * ax.spacing();
            if (!(q[k] >= ax.min + m && q[k] <= ax.max - m)) return false;
        }
        return true;
    };

    const std::size_t n = ensemble.size();
    ensemble.absorbed_at.assign(n, -1);
    ensemble.times = {psi0.time};
    ensemble.history = {ensemble.positions};
    std::vector<bool> active(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        if (!inside_margin(ensemble.positions[i])) {
            active[i] = false;
            ensemble.absorbed_at[i] = 0;
        }
    }

    IntegrationResult result{psi0, {}, {}, {}, std::abs(psi0.norm() - 1)};
    if (opt.keep_snapshots) {
        result.snapshots.push_back(psi0);
        result.snapshot_steps.push_back(0);
    }

    std::vector<Complex> values = psi0.values;
    Snapshot field_now = snapshot(psi0);
    const unsigned workers = std::max(1u, opt.workers);

    for (std::size_t step = 1; step <= opt.steps; ++step) {
        const double t0 = psi0.time + dt * static_cast<double>(step - 1);
        half_step.step(values);
        GridWavefunction mid(grid, values, t0 + dt / 2);
        Snapshot field_mid = snapshot(mid);
        half_step.step(values);
        GridWavefunction end(grid, values, t0 + dt);
        Snapshot field_end = snapshot(end);
        result.max_norm_drift = std::max(result.max_norm_drift, std::abs(end.norm() - 1));

        auto advance = [&](std::size_t begin, std::size_t stop) {
            for (std::size_t i = begin; i < stop; ++i) {
                if (!active[i]) continue;
                Point q = ensemble.positions[i];
                auto shifted = [&](const Point &v, double h) {
                    Point r = q;
                    for (std::size_t k = 0; k < grid.dims(); ++k) r[k] += h * v[k];
                    return r;
                };
                const Point k1 = velocity(field_now, q);
                const Point k2 = velocity(field_mid, shifted(k1, dt / 2));
                const Point k3 = velocity(field_mid, shifted(k2, dt / 2));
                const Point k4 = velocity(field_end, shifted(k3, dt));
                for (std::size_t k = 0; k < grid.dims(); ++k) q[k] += dt / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
                ensemble.positions[i] = q;
            }
        };
        if (workers == 1 || n < 2 * workers) {
            advance(0, n);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (n + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                const std::size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
                pool.emplace_back(advance, b, e);
            }
            for (auto &th : pool) th.join();
        }

        const bool save = step % opt.save_every == 0;
        const auto save_index = static_cast<long>(ensemble.times.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && !inside_margin(ensemble.positions[i])) {
                active[i] = false;
                ensemble.absorbed_at[i] = save_index;
            }
        }
        if (save) {
            ensemble.times.push_back(end.time);
            ensemble.history.push_back(ensemble.positions);
            if (opt.keep_snapshots) {
                result.snapshots.push_back(end);
                result.snapshot_steps.push_back(step);
            }
        }
        field_now = std::move(field_end);
        if (step == opt.steps) result.final_state = std::move(end);
    }
    result.ensemble = std::move(ensemble);
    return result;
}

// ---------------------------------------------------------------------------
// Checks

double ks_threshold_99(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

EquivarianceReport check_equivariance_at(const BohmianEnsemble &e, std::size_t t, const GridWavefunction &psi,
                                         double threshold) {
    if (t >= e.history.size()) throw std::out_of_range("check_equivariance: no saved time " + std::to_string(t));
    if (e.dims != psi.grid.dims()) throw std::invalid_argument("check_equivariance: dimension mismatch");
    if (std::abs(e.times[t] - psi.time) > 1e-9 * std::max(1.0, std::abs(psi.time))) {
        throw std::invalid_argument("check_equivariance: ensemble and wavefunction times differ");
    }
    std::size_t absorbed = 0;
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const long a = e.absorbed_at.empty() ? -1 : e.absorbed_at[i];
        if (a >= 0 && static_cast<std::size_t>(a) <= t) {
            ++absorbed;
        } else {
            live.push_back(i);
        }
    }
    EquivarianceReport r{0, threshold, Verdict::fail, live.size(), absorbed};
    if (r.threshold < 0) r.threshold = ks_threshold_99(std::max<std::size_t>(live.size(), 1));
    if (live.empty()) {
        r.verdict = Verdict::invalid;
        return r;
    }
    for (std::size_t k = 0; k < e.dims; ++k) {
        CellCdf cdf(psi.grid.axis(k), marginal_masses(psi, k));
        std::vector<double> xs;
        xs.reserve(live.size());
        for (std::size_t i : live) xs.push_back(e.history[t][i][k]);
        r.ks = std::max(r.ks, ks_distance(std::move(xs), cdf));
    }
    if (static_cast<double>(absorbed) > 0.01 * static_cast<double>(e.size())) {
        r.verdict = Verdict::invalid;
    } else {
        r.verdict = r.ks < r.threshold ? Verdict::pass : Verdict::fail;
    }
    return r;
}

EquivarianceReport check_equivariance(const BohmianEnsemble &e, const GridWavefunction &psi, double threshold) {
    if (e.history.empty()) throw std::invalid_argument("check_equivariance: ensemble has no history");
    return check_equivariance_at(e, e.history.size() - 1, psi, threshold);
}

std::size_t check_noncrossing(const BohmianEnsemble &e) {
    if (e.dims != 1) throw std::invalid_argument("check_noncrossing: only defined for one configuration axis");
    std::size_t violations = 0;
    for (std::size_t t = 0; t + 1 < e.history.size(); ++t) {
        std::vector<std::size_t> live;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const long a = e.absorbed_at.empty() ? -1 : e.absorbed_at[i];
            if (a < 0 || static_cast<std::size_t>(a) > t + 1) live.push_back(i);
        }
        std::sort(live.begin(), live.end(), [&](std::size_t a, std::size_t b) {
            const double ia = e.history[t][a][0], ib = e.history[t][b][0];
            if (ia != ib) return ia < ib;
            return e.history[t + 1][a][0] < e.history[t + 1][b][0];
        });
        std::vector<double> next(live.size()), scratch(live.size());
        for (std::size_t i = 0; i < live.size(); ++i) next[i] = e.history[t + 1][live[i]][0];
        violations += count_inversions(next, scratch, 0, next.size());
    }
    return violations;
}

GridWavefunction conditional_wavefunction(const GridWavefunction &psi, std::size_t fixed_axis, double value) {
    const GridSpec &g = psi.grid;
    if (g.dims() != 2) throw std::invalid_argument("conditional_wavefunction: need a two-axis wavefunction");
    if (fixed_axis > 1) throw std::invalid_argument("conditional_wavefunction: axis must be 0 or 1");
    const Axis &fixed = g.axis(fixed_axis);
    if (!(value >= fixed.min && value < fixed.max)) {
        throw std::invalid_argument("conditional_wavefunction: fixed value outside the grid");
    }
    const std::size_t free_axis = 1 - fixed_axis;
    const Axis &kept = g.axis(free_axis);
    Stencil s = stencil(fixed, value);
    std::vector<Complex> slice(kept.points);
    for (std::size_t j = 0; j < kept.points; ++j) {
        const std::size_t lo = fixed_axis == 0 ? g.flat_index(s.lo, j) : g.flat_index(j, s.lo);
        const std::size_t hi = fixed_axis == 0 ? g.flat_index(s.hi, j) : g.flat_index(j, s.hi);
        slice[j] = (1 - s.frac) * psi.values[lo] + s.frac * psi.values[hi];
    }
    GridSpec line({kept});
    const double n = discrete_norm(line, slice);
    if (!(n > 1e-12)) {
        throw NodeConditioning("conditional_wavefunction: slice norm " + std::to_string(n) +
                               " is too small to condition on");
    }
    return GridWavefunction::normalized(std::move(line), std::move(slice), psi.time);
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_trajectories_csv(std::ostream &out, const BohmianEnsemble &e) {
    out << "trajectory_id,time,q1" << (e.dims == 2 ? ",q2" : "") << "\n";
    for (std::size_t i = 0; i < e.size(); ++i) {
        const long a = e.absorbed_at.empty() ? -1 : e.absorbed_at[i];
        for (std::size_t t = 0; t < e.history.size(); ++t) {
            if (a >= 0 && static_cast<long>(t) >= a) break;
            const Point &q = e.history[t][i];
            out << i << "," << number(e.times[t]) << "," << number(q[0]);
            if (e.dims == 2) out << "," << number(q[1]);
            out << "\n";
        }
    }
}

void write_snapshot_csv(std::ostream &out, const GridWavefunction &psi) {
    const std::size_t dims = psi.grid.dims();
    out << "q1" << (dims == 2 ? ",q2" : "") << ",re,im\n";
    for (std::size_t j = 0; j < psi.values.size(); ++j) {
        const Point q = psi.grid.node(j);
        out << number(q[0]) << ",";
        if (dims == 2) out << number(q[1]) << ",";
        out << number(psi.values[j].real()) << "," << number(psi.values[j].imag()) << "\n";
    }
}

std::string snapshot_file_name(std::size_t step, std::size_t last_step) {
    const std::size_t width = std::to_string(last_step).size();
    std::string digits = std::to_string(step);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "snapshot_" + digits + ".csv";
}

}  // namespace qfound::pilotwave
