#ifndef HAMLEVY_KERNELS_HPP
#define HAMLEVY_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hamlevy/common.hpp"
#include "hamlevy/quadrature.hpp"

namespace hamlevy {

// ---------------------------------------------------------------------------
// Wave kernel G_t(x) = (1/2) 1{|x| < t} and derived quantities
// ---------------------------------------------------------------------------

inline double wave_kernel(double t, double x) {
    if (!(t > 0.0)) throw DomainError("wave_kernel: t must be positive");
    return std::abs(x) < t ? 0.5 : 0.0;
}

// ||G_t||_{L^p} = (2^{1-p} t)^{1/p}
inline double wave_kernel_lp_norm(double t, double p) {
    if (!(t > 0.0)) throw DomainError("wave_kernel_lp_norm: t must be positive");
    if (!(p > 0.0)) throw DomainError("wave_kernel_lp_norm: p must be positive");
    return std::pow(std::exp2(1.0 - p) * t, 1.0 / p);
}

// phi_{t,R}(r,y) = int_{-R}^{R} G_{t-r}(x-y) dx
//               = (1/2) |[-R,R] ∩ [y-(t-r), y+(t-r)]|   (exact)
inline double phi_tR(double t, double R, double r, double y) {
    if (!(R > 0.0)) throw DomainError("phi_tR: R must be positive");
    if (r < 0.0 || r > t) throw DomainError("phi_tR: need 0 <= r <= t");
    const double c = t - r;
    const double lo = std::max(-R, y - c);
    const double hi = std::min(R, y + c);
    return hi > lo ? 0.5 * (hi - lo) : 0.0;
}

// ||phi_{t,R}(r,.)||_{L^p(R)}^p in closed form: the profile is a trapezoid of
// height min(R,c), plateau half-width |R-c| and ramps of length 2 min(R,c).
inline double phi_lp_norm_p_exact(double t, double R, double r, double p) {
    if (!(R > 0.0)) throw DomainError("phi_lp_norm_p_exact: R must be positive");
    if (r < 0.0 || r > t) throw DomainError("phi_lp_norm_p_exact: need 0 <= r <= t");
    if (!(p > 0.0)) throw DomainError("phi_lp_norm_p_exact: p must be positive");
    const double c = t - r;
    if (c == 0.0) return 0.0;
    const double m = std::min(R, c);
    return 2.0 * std::abs(R - c) * std::pow(m, p) +
           4.0 * std::pow(m, p + 1.0) / (p + 1.0);
}

// C_{1,alpha} = pi^{-1/2} 2^{-alpha} Gamma((1-alpha)/2) / Gamma(alpha/2)
inline double riesz_constant(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("riesz_constant: alpha must lie in (0,1)");
    return std::pow(M_PI, -0.5) * std::exp2(-alpha) *
           std::tgamma(0.5 * (1.0 - alpha)) / std::tgamma(0.5 * alpha);
}

// ---------------------------------------------------------------------------
// Coloration kernel k
// ---------------------------------------------------------------------------

enum class KernelFamily { Integrable, Riesz };
enum class IntegrableShape { Gaussian, Box, Zero };

// The Riesz variant stores the order alpha of the covariance kernel
// f = R_{1,alpha}; the coloration kernel itself is k = R_{1,alpha/2}.
struct KernelSpec {
    KernelFamily family = KernelFamily::Integrable;

    // Integrable variant
    IntegrableShape shape = IntegrableShape::Gaussian;
    double support_halfwidth = 0.0;  // a: evaluator is exactly 0 beyond it
    double l1_norm = 0.0;

    // Riesz variant
    double alpha = 0.0;              // in (0,1)
    double truncation_radius = 0.0;  // for numeric convolution / atom reach

    static KernelSpec gaussian(double support_halfwidth = 6.0) {
        KernelSpec s;
        s.family = KernelFamily::Integrable;
        s.shape = IntegrableShape::Gaussian;
        s.support_halfwidth = support_halfwidth;
        s.l1_norm = std::erf(support_halfwidth / std::sqrt(2.0));
        return s;
    }

    // indicator of [-a,a]; violates the continuity assumption, test fixture only
    static KernelSpec box(double a = 1.0) {
        KernelSpec s;
        s.family = KernelFamily::Integrable;
        s.shape = IntegrableShape::Box;
        s.support_halfwidth = a;
        s.l1_norm = 2.0 * a;
        return s;
    }

    static KernelSpec zero() {
        KernelSpec s;
        s.family = KernelFamily::Integrable;
        s.shape = IntegrableShape::Zero;
        s.support_halfwidth = 1.0;
        s.l1_norm = 0.0;
        return s;
    }

    static KernelSpec riesz(double alpha, double truncation_radius) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("KernelSpec::riesz: alpha must lie in (0,1)");
        if (!(truncation_radius > 0.0))
            throw DomainError("KernelSpec::riesz: truncation radius must be positive");
        KernelSpec s;
        s.family = KernelFamily::Riesz;
        s.alpha = alpha;
        s.truncation_radius = truncation_radius;
        return s;
    }

    bool is_riesz() const { return family == KernelFamily::Riesz; }

    // spatial extent used for atom windows and influence cutoffs
    double reach() const {
        return is_riesz() ? truncation_radius : support_halfwidth;
    }

    double riesz_coefficient() const { return riesz_constant(0.5 * alpha); }

    // k(x); Integrable evaluators return exactly 0 beyond the support
    double eval(double x) const {
        switch (family) {
            case KernelFamily::Riesz: {
                const double ax = std::abs(x);
                if (ax == 0.0) return std::numeric_limits<double>::infinity();
                return riesz_coefficient() * std::pow(ax, 0.5 * alpha - 1.0);
            }
            case KernelFamily::Integrable:
                break;
        }
        const double ax = std::abs(x);
        if (ax > support_halfwidth) return 0.0;
        switch (shape) {
            case IntegrableShape::Gaussian:
                return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
            case IntegrableShape::Box:
                return 1.0;
            case IntegrableShape::Zero:
                return 0.0;
            default:
                return 0.0;
        }
    }

    // K(x) = int_0^x k(u) du (odd); integrates the Riesz singularity exactly
    double antiderivative(double x) const {
        const double s = x < 0.0 ? -1.0 : 1.0;
        const double ax = std::abs(x);
        if (is_riesz()) {
            const double h = 0.5 * alpha;
            return s * riesz_coefficient() * std::pow(ax, h) / h;
        }
        const double c = std::min(ax, support_halfwidth);
        switch (shape) {
            case IntegrableShape::Gaussian:
                return s * 0.5 * std::erf(c / std::sqrt(2.0));
            case IntegrableShape::Box:
                return s * c;
            case IntegrableShape::Zero:
                return 0.0;
            default:
                return 0.0;
        }
    }

    // int over [lo,hi] of k
    double segment_mass(double lo, double hi) const {
        if (!(hi > lo)) return 0.0;
        return antiderivative(hi) - antiderivative(lo);
    }

    // |F k(xi)|^2; closed forms only
    double fourier_weight_sq(double xi) const {
        if (is_riesz()) {
            const double axi = std::abs(xi);
            if (axi == 0.0) return std::numeric_limits<double>::infinity();
            return std::pow(axi, -alpha);
        }
        switch (shape) {
            case IntegrableShape::Gaussian: {
                // support truncation ignored: tail mass < 1e-8
                return std::exp(-xi * xi);
            }
            case IntegrableShape::Box: {
                if (xi == 0.0) {
                    const double a = support_halfwidth;
                    return 4.0 * a * a;
                }
                const double s = 2.0 * std::sin(support_halfwidth * xi) / xi;
                return s * s;
            }
            case IntegrableShape::Zero:
                return 0.0;
            default:
                return 0.0;
        }
    }

    std::string name() const {
        if (is_riesz()) return "riesz(alpha=" + std::to_string(alpha) + ")";
        switch (shape) {
            case IntegrableShape::Gaussian: return "gaussian";
            case IntegrableShape::Box: return "box";
            default: return "zero";
        }
    }
};

// ---------------------------------------------------------------------------
// Covariance kernel f = k * k~
// ---------------------------------------------------------------------------

struct CovarianceKernel {
    KernelSpec source;
    bool closed_form = false;

    double eval(double x) const {
        const double ax = std::abs(x);
        if (source.is_riesz()) {
            if (ax == 0.0) return std::numeric_limits<double>::infinity();
            return riesz_constant(source.alpha) * std::pow(ax, source.alpha - 1.0);
        }
        switch (source.shape) {
            case IntegrableShape::Gaussian:
                // normal density with variance 2
                return std::exp(-0.25 * x * x) / (2.0 * std::sqrt(M_PI));
            case IntegrableShape::Box: {
                const double w = 2.0 * source.support_halfwidth - ax;
                return w > 0.0 ? w : 0.0;
            }
            case IntegrableShape::Zero:
                return 0.0;
            default:
                return 0.0;
        }
    }

    // F(x) = int_0^x f(u) du (odd), exact through the Riesz singularity
    double antiderivative(double x) const {
        const double s = x < 0.0 ? -1.0 : 1.0;
        const double ax = std::abs(x);
        if (source.is_riesz()) {
            const double a = source.alpha;
            return s * riesz_constant(a) * std::pow(ax, a) / a;
        }
        switch (source.shape) {
            case IntegrableShape::Gaussian:
                return s * 0.5 * std::erf(0.5 * ax);
            case IntegrableShape::Box: {
                const double a2 = 2.0 * source.support_halfwidth;
                const double c = std::min(ax, a2);
                return s * (a2 * c - 0.5 * c * c);
            }
            case IntegrableShape::Zero:
                return 0.0;
            default:
                return 0.0;
        }
    }

    double segment_mass(double lo, double hi) const {
        if (!(hi > lo)) return 0.0;
        return antiderivative(hi) - antiderivative(lo);
    }

    // cell average over [lo,hi]; exact even across the singularity
    double cell_average(double lo, double hi) const {
        if (!(hi > lo)) return 0.0;
        return segment_mass(lo, hi) / (hi - lo);
    }

    // dmu/dxi = |F k(xi)|^2 / (2 pi)
    double mu_density(double xi) const {
        return source.fourier_weight_sq(xi) / (2.0 * M_PI);
    }
};

// Riesz: f = R_{1,alpha} in closed form.  Gaussian shape: normal density with
// variance 2.  Box: triangle.  All are closed forms; the quadrature route
// below exists to cross-check them.
inline CovarianceKernel covariance_kernel(const KernelSpec& spec) {
    CovarianceKernel f;
    f.source = spec;
    f.closed_form = true;
    return f;
}

// (k * k~)(x) by adaptive quadrature of the integrable evaluator; oracle path.
inline double covariance_by_quadrature(const KernelSpec& spec, double x) {
    if (spec.is_riesz())
        throw ConfigError("covariance_by_quadrature: integrable kernels only");
    const double a = spec.support_halfwidth;
    const double lo = std::max(-a, x - a);
    const double hi = std::min(a, x + a);
    if (!(hi > lo)) return 0.0;
    return adaptive_simpson(
        [&](double y) { return spec.eval(y) * spec.eval(y - x); }, lo, hi, 1e-12);
}

// ---------------------------------------------------------------------------
// Convolution of a sampled function with k
// ---------------------------------------------------------------------------

struct ConvolutionResult {
    SampledFunction values;
    double tail_error_bound = 0.0;  // Riesz truncation, 0 when nothing was cut
};

// (g * k) with g piecewise constant per cell; each cell integrates k exactly
// through its antiderivative, so the Riesz singularity needs no special case.
inline ConvolutionResult convolve_kernel(const SampledFunction& g,
                                         const KernelSpec& spec) {
    if (g.values.size() < 2 || !(g.step > 0.0))
        throw ConfigError("convolve_kernel: need a sampled grid with >= 2 nodes");
    const double reach = spec.reach();
    if (g.step > reach / 8.0)
        throw ConfigError(
            "convolve_kernel: grid step " + std::to_string(g.step) +
            " too coarse for kernel reach " + std::to_string(reach) +
            " (need step <= reach/8)");

    const std::size_t n = g.values.size();
    ConvolutionResult out;
    out.values.step = g.step;
    out.values.lo = g.lo - reach;
    const auto m = static_cast<std::size_t>(
        std::ceil((g.hi() + reach - out.values.lo) / g.step)) + 1;
    out.values.values.assign(m, 0.0);

    double g_l1 = 0.0;
    for (std::size_t c = 0; c + 1 < n; ++c)
        g_l1 += std::abs(0.5 * (g.values[c] + g.values[c + 1])) * g.step;

    const bool truncated = spec.is_riesz();
    for (std::size_t i = 0; i < m; ++i) {
        const double x = out.values.lo + static_cast<double>(i) * g.step;
        KahanSum acc;
        bool cut = false;
        for (std::size_t c = 0; c + 1 < n; ++c) {
            double y0 = g.lo + static_cast<double>(c) * g.step;
            double y1 = y0 + g.step;
            const double gc = 0.5 * (g.values[c] + g.values[c + 1]);
            if (truncated) {
                if (y0 < x - reach || y1 > x + reach) cut = true;
                y0 = std::max(y0, x - reach);
                y1 = std::min(y1, x + reach);
                if (!(y1 > y0)) continue;
            }
            // int_{y0}^{y1} k(x - y) dy = K(x-y0) - K(x-y1)
            acc.add(gc * (spec.antiderivative(x - y0) - spec.antiderivative(x - y1)));
        }
        out.values.values[i] = acc.value();
        if (cut && truncated)
            out.tail_error_bound =
                std::max(out.tail_error_bound, g_l1 * spec.eval(reach));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dalang sanity gate: int (1+xi^2)^{-1} mu(dxi)
// ---------------------------------------------------------------------------

inline double dalang_check(const KernelSpec& spec) {
    const CovarianceKernel f = covariance_kernel(spec);
    if (!spec.is_riesz() && spec.shape == IntegrableShape::Zero) return 0.0;
    auto integrand = [&](double xi) {
        return f.mu_density(xi) / (1.0 + xi * xi);
    };
    double value = 0.0;
    if (spec.is_riesz()) {
        // substitute xi = u^{1/(1-alpha)} to remove the origin singularity
        const double a = spec.alpha;
        const double e = 1.0 / (1.0 - a);
        value += 2.0 * adaptive_simpson(
                          [&](double u) {
                              const double xi = std::pow(u, e);
                              const double jac = e * std::pow(u, e - 1.0);
                              return u > 0.0 ? integrand(xi) * jac : 0.0;
                          },
                          0.0, 1.0, 1e-10);
        value += 2.0 * adaptive_simpson(integrand, 1.0, 1e6, 1e-10);
    } else {
        value = 2.0 * adaptive_simpson(integrand, 0.0, 60.0, 1e-12);
    }
    if (!std::isfinite(value))
        throw ConfigError("dalang_check: integral did not converge");
    return value;
}

// ---------------------------------------------------------------------------
// || phi_{t,R}(r,.) * k ||_{L^p} helpers (used by bounds tests, variance
// surrogates and the gamma-rate audit)
// ---------------------------------------------------------------------------

// (phi_{t,R}(r,.) * k)(y), exact in k: phi is piecewise linear, and each
// linear segment integrates against k through the two antiderivatives
//   K(x) = int_0^x k,  K1(x) = int_0^x u k(u) du.
inline double kernel_first_moment_antiderivative(const KernelSpec& spec, double x) {
    const double ax = std::abs(x);
    if (spec.is_riesz()) {
        const double e = 0.5 * spec.alpha + 1.0;
        return spec.riesz_coefficient() * std::pow(ax, e) / e;
    }
    const double c = std::min(ax, spec.support_halfwidth);
    switch (spec.shape) {
        case IntegrableShape::Gaussian: {
            const double pdf0 = 1.0 / std::sqrt(2.0 * M_PI);
            return pdf0 - std::exp(-0.5 * c * c) / std::sqrt(2.0 * M_PI);
        }
        case IntegrableShape::Box:
            return 0.5 * c * c;
        default:
            return 0.0;
    }
}

inline double phi_convolved(const KernelSpec& spec, double t, double R, double r,
                            double y) {
    const double c = t - r;
    if (!(c > 0.0)) return 0.0;
    // breakpoints of phi in y'-space
    const double b[4] = {-R - c, -std::abs(R - c), std::abs(R - c), R + c};
    const double plateau = std::min(R, c);
    KahanSum acc;
    auto segment = [&](double lo, double hi, double v0, double v1) {
        if (!(hi > lo)) return;
        // phi(y') = v0 + slope (y'-lo) on [lo,hi];
        // integral of phi(y') k(y-y') dy' via u = y-y'
        const double slope = (v1 - v0) / (hi - lo);
        const double ulo = y - hi, uhi = y - lo;
        const double mass = spec.segment_mass(ulo, uhi);
        const double first = kernel_first_moment_antiderivative(spec, uhi) -
                             kernel_first_moment_antiderivative(spec, ulo);
        // phi(y-u) = v0 + slope (y - u - lo)
        acc.add((v0 + slope * (y - lo)) * mass - slope * first);
    };
    segment(b[0], b[1], 0.0, plateau);
    segment(b[1], b[2], plateau, plateau);
    segment(b[2], b[3], plateau, 0.0);
    return acc.value();
}

// ||phi_{t,R}(r,.) * k||_{L^p}^p over a generous window with tail control
inline double phi_convolved_lp_norm_p(const KernelSpec& spec, double t, double R,
                                      double r, double p, double tail_factor = 4.0,
                                      double step = 0.0) {
    const double c = t - r;
    const double extent =
        spec.is_riesz() ? tail_factor * (R + c) : R + c + spec.reach();
    if (step <= 0.0) step = std::max(extent / 8192.0, 1.0 / 64.0);
    KahanSum acc;
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * extent / step));
    for (std::size_t i = 0; i <= n; ++i) {
        const double y = -extent + static_cast<double>(i) * step;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc.add(w * std::pow(std::abs(phi_convolved(spec, t, R, r, y)), p));
    }
    return acc.value() * step;
}

}  // namespace hamlevy

#endif
