#ifndef HAMLEVY_GRID_HPP
#define HAMLEVY_GRID_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "hamlevy/common.hpp"
#include "hamlevy/kernels.hpp"
#include "hamlevy/levy_noise.hpp"
#include "hamlevy/quadrature.hpp"
#include "hamlevy/rng.hpp"
#include "hamlevy/solver.hpp"

namespace hamlevy {

// in-place iterative radix-2 transform; sign=+1 gives the unscaled inverse
inline void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw NumericError("fft_radix2: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Lattice-interpolated kernel antiderivative; falls back to the exact form
// near the Riesz singularity.  Shared across replicates of an experiment.
class KernelMassTable {
  public:
    KernelMassTable() = default;
    KernelMassTable(const KernelSpec& kernel, double step, double range)
        : kernel_(kernel), step_(step), range_(range) {
        const auto n = static_cast<std::size_t>(std::ceil(range / step)) + 2;
        values_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            values_[i] = kernel.antiderivative(static_cast<double>(i) * step);
        exact_below_ = 16.0 * step;
    }

    double K(double u) const {
        if (values_.empty()) return kernel_.antiderivative(u);
        const double au = std::abs(u);
        if (au < exact_below_) return kernel_.antiderivative(u);
        const double s = u < 0.0 ? -1.0 : 1.0;
        const double v = au / step_;
        auto i = static_cast<std::size_t>(v);
        if (i + 1 >= values_.size()) return s * values_.back();
        const double f = v - static_cast<double>(i);
        return s * (values_[i] * (1.0 - f) + values_[i + 1] * f);
    }

  private:
    KernelSpec kernel_;
    double step_ = 0.0, range_ = 0.0, exact_below_ = 0.0;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Leapfrog scheme with dt = dx.  The four-point stencil is exact for the
// homogeneous wave part; the noise enters as half-diamond masses, each
// multiplied by the field at the slab start so the compensated-martingale
// structure (E[u] = 1) survives discretization exactly.
// ---------------------------------------------------------------------------

class GridSolution {
  public:
    // Levy colored noise driven by an atom cloud
    GridSolution(const AtomCloud& cloud, const KernelSpec& kernel,
                 const LevyMeasureSpec& noise, const SolverConfig& cfg,
                 double eval_lo, double eval_hi,
                 const KernelMassTable* mass_table = nullptr) {
        cfg.validate();
        if (std::abs(cfg.dt - cfg.dx) > 1e-12)
            throw ConfigError("GridSolution: the diamond stencil needs dt == dx");
        if (noise.mean() != 0.0 && kernel.is_riesz())
            throw ConfigError("GridSolution: Riesz kernel requires centered noise");
        setup_geometry(cloud.T, cfg.dx, eval_lo, eval_hi);
        const double drift =
            noise.mean() * kernel.l1_norm * cfg.dx * cfg.dx;  // per half-diamond
        std::size_t cursor = 0;
        // far-zone contributions of heavy-tailed kernels accumulate on a
        // coarse lattice and are upsampled once per slab
        const std::size_t stride = 8;
        const bool split = kernel.is_riesz();
        const std::size_t ncoarse = split ? nx_ / stride + 2 : 0;
        std::vector<double> cup(ncoarse, 0.0), clow(ncoarse, 0.0);
        run([&](std::size_t s, std::vector<double>& up, std::vector<double>& low) {
            std::fill(up.begin(), up.end(), -drift);
            std::fill(low.begin(), low.end(), -drift);
            std::fill(cup.begin(), cup.end(), 0.0);
            std::fill(clow.begin(), clow.end(), 0.0);
            const double t0 = static_cast<double>(s) * dt_;
            const double t1 = t0 + dt_;
            while (cursor < cloud.atoms.size() && cloud.atoms[cursor].t <= t1) {
                const Atom& a = cloud.atoms[cursor];
                ++cursor;
                if (a.t <= t0) continue;  // guards the first slab
                if (split) {
                    add_atom_split(kernel, mass_table, a, t1 - a.t, stride, up, cup);
                    add_atom_split(kernel, mass_table, a, a.t - t0, stride, low,
                                   clow);
                } else {
                    add_atom(kernel, mass_table, a, t1 - a.t, up);
                    add_atom(kernel, mass_table, a, a.t - t0, low);
                }
            }
            if (split) {
                upsample_add(cup, stride, up);
                upsample_add(clow, stride, low);
            }
        });
    }

    struct GaussianTag {};
    // Gaussian comparison model driven by sqrt(m2) W with spatial covariance f
    GridSolution(GaussianTag, Rng& rng, const KernelSpec& kernel, double m2,
                 double T, const SolverConfig& cfg, double eval_lo, double eval_hi) {
        cfg.validate();
        if (std::abs(cfg.dt - cfg.dx) > 1e-12)
            throw ConfigError("GridSolution: the diamond stencil needs dt == dx");
        setup_geometry(T, cfg.dx, eval_lo, eval_hi);
        SpectralNoise synth(kernel, dt_, dx_, nx_, std::sqrt(m2));
        run([&](std::size_t, std::vector<double>& up, std::vector<double>& low) {
            synth.sample_slab(rng, up, low);
        });
    }

    double time_horizon() const { return T_; }
    double dx() const { return dx_; }

    double eval(double t, double x) const {
        if (t < 0.0 || t > T_ + 1e-12)
            throw DomainError("GridSolution::eval: t outside [0,T]");
        const double s = std::min(t / dt_, static_cast<double>(nsteps_));
        const auto n0 = static_cast<std::size_t>(s);
        const double ft = s - static_cast<double>(n0);
        const double v0 = eval_level(n0, x);
        if (ft == 0.0 || n0 + 1 > static_cast<std::size_t>(nsteps_)) return v0;
        return v0 * (1.0 - ft) + eval_level(n0 + 1, x) * ft;
    }

    // int_{-R}^{R} (u(t,x) - 1) dx, exact on the piecewise-linear field
    double spatial_average_centered(double t, double R) const {
        const double s = std::min(t / dt_, static_cast<double>(nsteps_));
        const auto n0 = static_cast<std::size_t>(s);
        const double ft = s - static_cast<double>(n0);
        const double v0 = level_integral(n0, -R, R);
        if (ft == 0.0 || n0 + 1 > static_cast<std::size_t>(nsteps_)) return v0;
        return v0 * (1.0 - ft) + level_integral(n0 + 1, -R, R) * ft;
    }

  private:
    // exact covariance synthesis of the paired half-diamond masses by
    // per-frequency 2x2 Cholesky against shared white noise
    class SpectralNoise {
      public:
        SpectralNoise(const KernelSpec& kernel, double dt, double dx,
                      std::size_t nx, double scale)
            : dt_(dt), scale_(scale) {
            const double pad = kernel.is_riesz()
                                   ? static_cast<double>(nx) * dx
                                   : 4.0 * kernel.reach() + 8.0;
            std::size_t np = 1;
            while (np < nx + static_cast<std::size_t>(std::ceil(pad / dx))) np <<= 1;
            np_ = np;
            const double period = static_cast<double>(np_) * dx;
            const double dxi = 2.0 * M_PI / period;
            ca_.resize(np_);
            cab_.resize(np_);
            cb_.resize(np_);
            for (std::size_t m = 0; m <= np_ / 2; ++m) {
                const double xi = dxi * static_cast<double>(m);
                const double cell =
                    weight_cell_integral(kernel, xi - 0.5 * dxi, xi + 0.5 * dxi) /
                    (2.0 * M_PI);
                const double vA = cell * profile_up(xi);
                const double vX = cell * profile_cross(xi);
                // Cholesky of [[vA, vX], [vX, vA]]
                const double l11 = std::sqrt(std::max(vA, 0.0));
                const double l21 = l11 > 0.0 ? vX / l11 : 0.0;
                const double l22 = std::sqrt(std::max(vA - l21 * l21, 0.0));
                ca_[m] = l11;
                cab_[m] = l21;
                cb_[m] = l22;
            }
        }

        void sample_slab(Rng& rng, std::vector<double>& up,
                         std::vector<double>& low) {
            std::vector<std::complex<double>> fa(np_), fb(np_);
            for (std::size_t m = 0; m <= np_ / 2; ++m) {
                const bool real_mode = (m == 0 || m == np_ / 2);
                const double sd = real_mode ? 1.0 : M_SQRT1_2;
                const std::complex<double> e1(rng.normal() * sd,
                                              real_mode ? 0.0 : rng.normal() * sd);
                const std::complex<double> e2(rng.normal() * sd,
                                              real_mode ? 0.0 : rng.normal() * sd);
                fa[m] = ca_[m] * e1;
                fb[m] = cab_[m] * e1 + cb_[m] * e2;
                if (m != 0 && m != np_ / 2) {
                    fa[np_ - m] = std::conj(fa[m]);
                    fb[np_ - m] = std::conj(fb[m]);
                }
            }
            fft_radix2(fa, +1);
            fft_radix2(fb, +1);
            for (std::size_t j = 0; j < up.size(); ++j) {
                up[j] = scale_ * fa[j].real();
                low[j] = scale_ * fb[j].real();
            }
        }

      private:
        // int over the frequency cell of |Fk|^2, closed form per family
        static double weight_cell_integral(const KernelSpec& k, double lo,
                                           double hi) {
            lo = std::max(lo, 0.0);
            if (!(hi > lo)) return 0.0;
            if (k.is_riesz()) {
                const double e = 1.0 - k.alpha;
                return (std::pow(hi, e) - std::pow(lo, e)) / e;
            }
            switch (k.shape) {
                case IntegrableShape::Gaussian:
                    return 0.5 * std::sqrt(M_PI) * (std::erf(hi) - std::erf(lo));
                case IntegrableShape::Zero:
                    return 0.0;
                default:
                    return adaptive_simpson(
                        [&](double xi) { return k.fourier_weight_sq(xi); }, lo, hi,
                        1e-12);
            }
        }

        // (4/xi^2) int_0^dt sin^2(u xi) du
        double profile_up(double xi) const {
            const double d = dt_;
            if (std::abs(xi) * d < 1e-4) return 4.0 * d * d * d / 3.0;
            return (4.0 / (xi * xi)) * (0.5 * d - std::sin(2.0 * d * xi) / (4.0 * xi));
        }

        // (4/xi^2) int_0^dt sin(u xi) sin((dt-u) xi) du
        double profile_cross(double xi) const {
            const double d = dt_;
            if (std::abs(xi) * d < 1e-4) return 2.0 * d * d * d / 3.0;
            return (4.0 / (xi * xi)) * 0.5 *
                   (std::sin(d * xi) / xi - d * std::cos(d * xi));
        }

        double dt_, scale_;
        std::size_t np_ = 0;
        std::vector<double> ca_, cab_, cb_;
    };

    void setup_geometry(double T, double dx, double eval_lo, double eval_hi) {
        if (!(eval_hi >= eval_lo))
            throw DomainError("GridSolution: empty evaluation window");
        T_ = T;
        dx_ = dx;
        dt_ = dx;
        const double steps = T / dt_;
        nsteps_ = static_cast<int>(std::llround(steps));
        if (std::abs(steps - static_cast<double>(nsteps_)) > 1e-9 || nsteps_ < 1)
            throw ConfigError("GridSolution: horizon T must be a positive multiple of dx");
        const double pad = 2.0 * dx;
        glo_ = dx * std::floor((eval_lo - T - pad) / dx);
        const double ghi = dx * std::ceil((eval_hi + T + pad) / dx);
        nx_ = static_cast<std::size_t>(std::llround((ghi - glo_) / dx)) + 1;
    }

    void add_atom(const KernelSpec& kernel, const KernelMassTable* table,
                  const Atom& a, double w, std::vector<double>& out) const {
        if (!(w > 0.0)) return;
        const double reach = kernel.reach();
        const double lo = std::max(glo_, a.x - reach - w);
        const double hi = a.x + reach + w;
        auto j0 = static_cast<std::size_t>(
            std::max(0.0, std::ceil((lo - glo_) / dx_)));
        for (std::size_t j = j0; j < nx_; ++j) {
            const double x = glo_ + static_cast<double>(j) * dx_;
            if (x > hi) break;
            const double mass = atom_mass(kernel, table, a.x, w, x);
            out[j] += a.z * mass;
        }
    }

    double atom_mass(const KernelSpec& kernel, const KernelMassTable* table,
                     double center, double w, double x) const {
        double slo = x - w, shi = x + w;
        if (kernel.is_riesz()) {
            const double reach = kernel.reach();
            slo = std::max(slo, center - reach);
            shi = std::min(shi, center + reach);
            if (!(shi > slo)) return 0.0;
        }
        return table ? table->K(shi - center) - table->K(slo - center)
                     : kernel.segment_mass(slo - center, shi - center);
    }

    // Exact masses on fine nodes near the atom; coarse-lattice samples beyond,
    // upsampled per slab.  The far mass profile is smooth, so linear
    // interpolation at stride*dx is accurate to a few 1e-4 relative.
    void add_atom_split(const KernelSpec& kernel, const KernelMassTable* table,
                        const Atom& a, double w, std::size_t stride,
                        std::vector<double>& fine, std::vector<double>& coarse) const {
        if (!(w > 0.0)) return;
        const double hc = dx_ * static_cast<double>(stride);
        // coarse samples everywhere within the kernel reach
        const double reach = kernel.reach();
        const auto c0 = static_cast<std::size_t>(std::max(
            0.0, std::floor((a.x - reach - w - glo_) / hc)));
        for (std::size_t c = c0; c < coarse.size(); ++c) {
            const double x = glo_ + static_cast<double>(c) * hc;
            if (x > a.x + reach + w) break;
            coarse[c] += a.z * atom_mass(kernel, table, a.x, w, x);
        }
        // near zone: exact value minus this atom's own coarse interpolation
        const double near = std::max(4.0, 48.0 * dx_);
        const auto j0 = static_cast<std::size_t>(
            std::max(0.0, std::ceil((a.x - near - glo_) / dx_)));
        for (std::size_t j = j0; j < nx_; ++j) {
            const double x = glo_ + static_cast<double>(j) * dx_;
            if (x > a.x + near) break;
            const auto c = std::min(j / stride, coarse.size() - 2);
            const double xc = glo_ + static_cast<double>(c) * hc;
            const double f = (x - xc) / hc;
            const double lerp =
                atom_mass(kernel, table, a.x, w, xc) * (1.0 - f) +
                atom_mass(kernel, table, a.x, w, xc + hc) * f;
            fine[j] += a.z * (atom_mass(kernel, table, a.x, w, x) - lerp);
        }
    }

    static void upsample_add(const std::vector<double>& coarse, std::size_t stride,
                             std::vector<double>& fine) {
        for (std::size_t j = 0; j < fine.size(); ++j) {
            const auto c = std::min(j / stride, coarse.size() - 2);
            const double f = static_cast<double>(j - c * stride) /
                             static_cast<double>(stride);
            fine[j] += coarse[c] * (1.0 - f) + coarse[c + 1] * f;
        }
    }

    template <typename SlabNoise>
    void run(SlabNoise&& slab_noise) {
        levels_.assign(static_cast<std::size_t>(nsteps_) + 1,
                       std::vector<double>(nx_, 1.0));
        std::vector<double> A(nx_, 0.0), Bprev(nx_, 0.0), B(nx_, 0.0);
        for (int n = 0; n < nsteps_; ++n) {
            slab_noise(static_cast<std::size_t>(n), A, B);
            const auto& un = levels_[static_cast<std::size_t>(n)];
            auto& next = levels_[static_cast<std::size_t>(n) + 1];
            if (n == 0) {
                for (std::size_t j = 0; j < nx_; ++j)
                    next[j] = 1.0 + 0.5 * A[j] * un[j];
            } else {
                const auto& um = levels_[static_cast<std::size_t>(n) - 1];
                for (std::size_t j = 1; j + 1 < nx_; ++j)
                    next[j] = un[j + 1] + un[j - 1] - um[j] +
                              0.5 * (un[j] * A[j] + um[j] * Bprev[j]);
                next[0] = un[0];
                next[nx_ - 1] = un[nx_ - 1];
            }
            std::swap(Bprev, B);
        }
    }

    double eval_level(std::size_t n, double x) const {
        const auto& u = levels_[n];
        const double v = (x - glo_) / dx_;
        if (v <= 0.0) return u.front();
        if (v >= static_cast<double>(nx_ - 1)) return u.back();
        const auto j = static_cast<std::size_t>(v);
        const double f = v - static_cast<double>(j);
        return u[j] * (1.0 - f) + u[j + 1] * f;
    }

    // exact integral of the piecewise-linear (u - 1) over [a, b]
    double level_integral(std::size_t n, double a, double b) const {
        const auto& u = levels_[n];
        KahanSum acc;
        auto node = [&](std::size_t j) { return glo_ + static_cast<double>(j) * dx_; };
        auto valat = [&](double x) { return eval_level(n, x) - 1.0; };
        const auto ja = static_cast<std::size_t>(
            std::clamp((a - glo_) / dx_, 0.0, static_cast<double>(nx_ - 2)));
        const auto jb = static_cast<std::size_t>(
            std::clamp((b - glo_) / dx_, 0.0, static_cast<double>(nx_ - 2)));
        for (std::size_t j = ja; j <= jb; ++j) {
            const double clo = std::max(a, node(j));
            const double chi = std::min(b, node(j + 1));
            if (!(chi > clo)) continue;
            acc.add(0.5 * (valat(clo) + valat(chi)) * (chi - clo));
        }
        return acc.value();
    }

    double T_ = 0.0, dx_ = 0.0, dt_ = 0.0, glo_ = 0.0;
    int nsteps_ = 0;
    std::size_t nx_ = 0;
    std::vector<std::vector<double>> levels_;
};

}  // namespace hamlevy

#endif
