#ifndef HAMLEVY_STATS_HPP
#define HAMLEVY_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "hamlevy/common.hpp"
#include "hamlevy/kernels.hpp"
#include "hamlevy/quadrature.hpp"

namespace hamlevy {

// ---------------------------------------------------------------------------
// basic estimators
// ---------------------------------------------------------------------------

inline double sample_mean(const std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    return v.empty() ? 0.0 : s.value() / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = sample_mean(v);
    KahanSum s;
    for (double x : v) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(v.size() - 1);
}

inline double mean_stderr(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

// Jackknife over contiguous blocks (50 by default); theta maps a sample
// subset mask to the statistic.
inline double jackknife_se(std::size_t n,
                           const std::function<double(std::size_t, std::size_t)>&
                               theta_leaving_out,
                           std::size_t blocks = 50) {
    blocks = std::min(blocks, n);
    if (blocks < 2) return 0.0;
    std::vector<double> theta(blocks);
    KahanSum mean;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = n * b / blocks;
        const std::size_t hi = n * (b + 1) / blocks;
        theta[b] = theta_leaving_out(lo, hi);
        mean.add(theta[b]);
    }
    const double tbar = mean.value() / static_cast<double>(blocks);
    KahanSum ss;
    for (double v : theta) ss.add((v - tbar) * (v - tbar));
    return std::sqrt(ss.value() * static_cast<double>(blocks - 1) /
                     static_cast<double>(blocks));
}

// variance with block-jackknife standard error
struct VarianceEstimate {
    double value = 0.0;
    double se = 0.0;
};

inline VarianceEstimate variance_with_se(const std::vector<double>& v,
                                         std::size_t blocks = 50) {
    VarianceEstimate e;
    e.value = sample_variance(v);
    e.se = jackknife_se(
        v.size(),
        [&](std::size_t lo, std::size_t hi) {
            // variance leaving the block out
            KahanSum s, s2;
            std::size_t m = 0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i >= lo && i < hi) continue;
                s.add(v[i]);
                s2.add(v[i] * v[i]);
                ++m;
            }
            const double mean = s.value() / static_cast<double>(m);
            return (s2.value() - static_cast<double>(m) * mean * mean) /
                   static_cast<double>(m - 1);
        },
        blocks);
    return e;
}

// ---------------------------------------------------------------------------
// normal distribution helpers
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Acklam's rational approximation polished by one Newton step
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
            q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return x - e / pdf;
}

// ---------------------------------------------------------------------------
// empirical distances to N(0,1)
// ---------------------------------------------------------------------------

struct CltDistances {
    double d_K = 0.0;
    double d_W = 0.0;
    double dkw_floor = 0.0;  // sqrt(log(2/delta) / (2n)) at delta = 0.01
};

inline CltDistances clt_distances(std::vector<double> samples) {
    if (samples.size() < 2) throw DomainError("clt_distances: need samples");
    std::sort(samples.begin(), samples.end());
    const auto n = samples.size();
    CltDistances out;
    KahanSum wsum;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = normal_cdf(samples[i]);
        const double up = (static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        out.d_K = std::max(out.d_K, std::max(std::abs(up - F), std::abs(F - lo)));
        const double q =
            normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
        wsum.add(std::abs(samples[i] - q));
    }
    out.d_W = wsum.value() / static_cast<double>(n);
    out.dkw_floor = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n)));
    return out;
}

// two-sample Kolmogorov-Smirnov; returns the statistic and the asymptotic
// critical value at the given level
struct KsTwoSample {
    double statistic = 0.0;
    double critical = 0.0;
    bool reject = false;
};

inline KsTwoSample ks_two_sample(std::vector<double> a, std::vector<double> b,
                                 double level = 0.01) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
    }
    KsTwoSample out;
    out.statistic = d;
    out.critical =
        std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((na + nb) / (na * nb));
    out.reject = d > out.critical;
    return out;
}

// ---------------------------------------------------------------------------
// log-log slope fitting with jackknife error over replicate blocks
// ---------------------------------------------------------------------------

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se = 0.0;  // 0 when no resampling structure was given
    double max_residual = 0.0;
};

inline SlopeFit fit_loglog(const std::vector<double>& x,
                           const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DomainError("fit_loglog: need >= 2 points");
    const auto n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw DomainError("fit_loglog: positive data required");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double dn = static_cast<double>(n);
    SlopeFit f;
    f.slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / dn;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = f.intercept + f.slope * std::log(x[i]);
        f.max_residual = std::max(f.max_residual, std::abs(std::log(y[i]) - pred));
    }
    return f;
}

// slope of log(var of column r) vs log R, jackknifed over replicate blocks;
// samples[r][i] = replicate i of radius R_list[r]
inline SlopeFit variance_slope(const std::vector<double>& R_list,
                               const std::vector<std::vector<double>>& samples,
                               std::size_t blocks = 50) {
    if (R_list.size() != samples.size() || R_list.size() < 2)
        throw DomainError("variance_slope: need >= 2 radii (cannot fit a slope "
                          "from one point)");
    std::vector<double> vars(R_list.size());
    for (std::size_t r = 0; r < R_list.size(); ++r)
        vars[r] = sample_variance(samples[r]);
    SlopeFit fit = fit_loglog(R_list, vars);
    const std::size_t n = samples[0].size();
    fit.se = jackknife_se(
        n,
        [&](std::size_t lo, std::size_t hi) {
            std::vector<double> v(R_list.size());
            for (std::size_t r = 0; r < R_list.size(); ++r) {
                KahanSum s, s2;
                std::size_t m = 0;
                for (std::size_t i = 0; i < samples[r].size(); ++i) {
                    if (i >= lo && i < hi) continue;
                    s.add(samples[r][i]);
                    s2.add(samples[r][i] * samples[r][i]);
                    ++m;
                }
                const double mean = s.value() / static_cast<double>(m);
                v[r] = (s2.value() - static_cast<double>(m) * mean * mean) /
                       static_cast<double>(m - 1);
            }
            return fit_loglog(R_list, v).slope;
        },
        blocks);
    return fit;
}

// ---------------------------------------------------------------------------
// first-chaos variance surrogate: m2 int_0^t ||phi_{t,R}(r,.) * k||_2^2 dr
// ---------------------------------------------------------------------------

inline double first_chaos_variance(const KernelSpec& kernel, double m2, double t,
                                   double R) {
    static const GaussRule rule = gauss_legendre(24);
    return m2 * gauss_integrate(rule, 0.0, t, [&](double r) {
               return phi_convolved_lp_norm_p(kernel, t, R, r, 2.0);
           });
}

// limiting covariance shape in the Riesz case: int_0^{t^s} (t-r)(s-r) dr
inline double riesz_covariance_shape(double t, double s) {
    const double m = std::min(t, s);
    return t * s * m - 0.5 * (t + s) * m * m + m * m * m / 3.0;
}

// ---------------------------------------------------------------------------
// rate plan for the gamma audit
// ---------------------------------------------------------------------------

struct RatePlan {
    bool riesz = false;
    double alpha = 0.0;
    double p = 2.0;
    double beta = 1.0;
    double r1 = 0.0;     // gamma_1 window parameter (Riesz)
    double a6_par = 0.0; // Hoelder parameter a for gamma_6 (Riesz)
    double r7 = 0.0;     // gamma_7 window parameter (Riesz)
    double a[8] = {0, 0, 0, 0, 0, 0, 0, 0};  // target exponents a_1..a_7

    static RatePlan integrable(double p) {
        if (!(p > 1.0 && p <= 2.0)) throw DomainError("RatePlan: p in (1,2]");
        RatePlan plan;
        plan.p = p;
        plan.beta = 1.0;
        for (int i = 1; i <= 7; ++i) plan.a[i] = 1.0 - 1.0 / p;
        return plan;
    }

    static RatePlan riesz_plan(double alpha, double p) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("RatePlan: alpha in (0,1)");
        if (!(p > 2.0 / (2.0 - alpha)) || !(p <= 2.0))
            throw DomainError("RatePlan: need 2/(2-alpha) < p <= 2");
        RatePlan plan;
        plan.riesz = true;
        plan.alpha = alpha;
        plan.p = p;
        plan.beta = alpha + 1.0;
        // r in (1, 2p/(2+alpha p)): midpoint in 1/r
        const double inv_r_lo = (2.0 + alpha * p) / (2.0 * p);
        if (!(inv_r_lo < 1.0))
            throw DomainError("RatePlan: empty r-window for gamma_1");
        const double inv_r1 = 0.5 * (inv_r_lo + 1.0);
        plan.r1 = 1.0 / inv_r1;
        plan.a[1] = inv_r1 - 1.0 / p - 0.5 * alpha;
        plan.a[2] = plan.a[3] = plan.a[4] = plan.a[5] = 1.0 - 1.0 / p;
        // a > 1/(p-1)
        plan.a6_par = 2.0 / (p - 1.0);
        plan.a[6] = 1.0 - 1.0 / p - 1.0 / (plan.a6_par * p);
        // 1/r in (alpha, min(1, p + alpha/2 - 1))
        const double hi = std::min(1.0, p + 0.5 * alpha - 1.0);
        if (!(hi > alpha))
            throw DomainError("RatePlan: empty r-window for gamma_7");
        const double inv_r7 = 0.5 * (alpha + hi);
        plan.r7 = 1.0 / inv_r7;
        plan.a[7] = 1.0 + 0.5 * alpha / p - (1.0 + inv_r7) / p;
        for (int i = 1; i <= 7; ++i)
            if (!(plan.a[i] > 0.0))
                throw DomainError("RatePlan: nonpositive target exponent");
        return plan;
    }
};

}  // namespace hamlevy

#endif
