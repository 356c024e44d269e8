#ifndef HAMLEVY_EXPERIMENTS_HPP
#define HAMLEVY_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hamlevy/chaos.hpp"
#include "hamlevy/grid.hpp"
#include "hamlevy/kernels.hpp"
#include "hamlevy/levy_noise.hpp"
#include "hamlevy/parallel.hpp"
#include "hamlevy/report.hpp"
#include "hamlevy/solution.hpp"
#include "hamlevy/stats.hpp"

namespace hamlevy {

struct McOptions {
    std::size_t n_replicates = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0 = HAM_LEVY_WORKERS or hardware
    SolverConfig solver;

    unsigned resolved_workers() const {
        return workers ? workers : default_workers();
    }
};

// ---------------------------------------------------------------------------
// Coupled spatial averages: F_R(t) for every (R, t) from one realization
// ---------------------------------------------------------------------------

struct CoupledSamples {
    std::vector<double> R_list;
    std::vector<double> t_list;
    // samples[r][k][i]: radius r, time k, replicate i
    std::vector<std::vector<std::vector<double>>> samples;

    const std::vector<double>& at(std::size_t r, std::size_t k) const {
        return samples[r][k];
    }
};

inline CoupledSamples sample_spatial_averages(const KernelSpec& kernel,
                                              const LevyMeasureSpec& nu,
                                              std::vector<double> R_list,
                                              std::vector<double> t_list,
                                              const McOptions& opt) {
    if (R_list.empty() || t_list.empty())
        throw ConfigError("sample_spatial_averages: empty R or t grid");
    const double Rmax = *std::max_element(R_list.begin(), R_list.end());
    const double T = *std::max_element(t_list.begin(), t_list.end());
    const double L = Rmax + T + kernel.reach() + 1.0;

    CoupledSamples out;
    out.R_list = R_list;
    out.t_list = t_list;
    out.samples.assign(R_list.size(),
                       std::vector<std::vector<double>>(
                           t_list.size(), std::vector<double>(opt.n_replicates)));

    const bool grid = opt.solver.scheme == Scheme::Grid;
    KernelMassTable mass_table;
    if (grid)
        mass_table = KernelMassTable(kernel, opt.solver.dx / 8.0,
                                     2.0 * (L + Rmax + 2.0 * T) + 4.0);

    parallel_for(opt.n_replicates, opt.resolved_workers(), [&](std::size_t i) {
        Rng rng = make_stream(opt.seed, i);
        const AtomCloud cloud = sample_atoms(nu, T, L, rng);
        if (grid) {
            GridSolution u(cloud, kernel, nu, opt.solver, -Rmax, Rmax,
                           &mass_table);
            for (std::size_t r = 0; r < R_list.size(); ++r)
                for (std::size_t k = 0; k < t_list.size(); ++k)
                    out.samples[r][k][i] =
                        u.spatial_average_centered(t_list[k], R_list[r]);
        } else {
            EventDrivenField u(cloud, kernel, nu, opt.solver, -Rmax, Rmax);
            for (std::size_t r = 0; r < R_list.size(); ++r)
                for (std::size_t k = 0; k < t_list.size(); ++k)
                    out.samples[r][k][i] =
                        u.spatial_average_centered(t_list[k], R_list[r]);
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Variance scaling (limiting covariance, diagonal)
// ---------------------------------------------------------------------------

struct VarianceScanResult {
    ExperimentReport report;
    CoupledSamples samples;  // reusable by downstream experiments
    SlopeFit fit;
};

inline VarianceScanResult variance_scan(const KernelSpec& kernel,
                                        const LevyMeasureSpec& nu, double t,
                                        const std::vector<double>& R_list,
                                        double beta, const McOptions& opt,
                                        double slope_tol = 0.15) {
    if (R_list.size() < 2)
        throw ConfigError("variance_scan: need >= 2 radii to fit a slope");
    VarianceScanResult res;
    res.samples = sample_spatial_averages(kernel, nu, R_list, {t}, opt);
    ExperimentReport& rep = res.report;
    rep.experiment = "variance-scan";
    rep.kernel = kernel.name();
    rep.nu = nu.name();

    std::vector<std::vector<double>> per_R;
    for (std::size_t r = 0; r < R_list.size(); ++r) {
        per_R.push_back(res.samples.at(r, 0));
        const auto est = variance_with_se(per_R.back());
        rep.add("sigma2_R", est.value, est.se, R_list[r], t);
        rep.add("sigma2_first_chaos",
                first_chaos_variance(kernel, nu.m2(), t, R_list[r]), std::nan(""),
                R_list[r], t);
    }
    res.fit = variance_slope(R_list, per_R);
    rep.add("loglog_slope", res.fit.slope, res.fit.se);
    rep.add("beta_target", beta);

    const bool noisy = res.fit.se > slope_tol / 3.0;
    const bool pass = std::abs(res.fit.slope - beta) <= slope_tol + 3.0 * res.fit.se;
    rep.status = !pass ? Status::Fail
                       : (noisy ? Status::Inconclusive : Status::Pass);
    return res;
}

// ---------------------------------------------------------------------------
// Ergodic averaging: E|F_R / R|^2 decreasing at rate beta - 2
// ---------------------------------------------------------------------------

inline ExperimentReport ergodic_check(const KernelSpec& kernel,
                                      const LevyMeasureSpec& nu, double t,
                                      const std::vector<double>& R_list,
                                      double beta, const McOptions& opt,
                                      double slope_tol = 0.2,
                                      const CoupledSamples* reuse = nullptr) {
    CoupledSamples local;
    if (!reuse) {
        local = sample_spatial_averages(kernel, nu, R_list, {t}, opt);
        reuse = &local;
    }
    ExperimentReport rep;
    rep.experiment = "ergodic";
    rep.kernel = kernel.name();
    rep.nu = nu.name();

    std::vector<double> values(R_list.size());
    bool decreasing = true;
    bool centered = true;
    for (std::size_t r = 0; r < R_list.size(); ++r) {
        const auto& F = reuse->at(r, 0);
        std::vector<double> sq(F.size());
        for (std::size_t i = 0; i < F.size(); ++i)
            sq[i] = (F[i] / R_list[r]) * (F[i] / R_list[r]);
        values[r] = sample_mean(sq);
        const double se = mean_stderr(sq);
        rep.add("mean_sq_FR_over_R", values[r], se, R_list[r], t);
        if (r > 0 && !(values[r] < values[r - 1])) decreasing = false;
        const double mean_F = sample_mean(F) / R_list[r];
        const double se_mean = mean_stderr(F) / R_list[r];
        rep.add("mean_FR_over_R", mean_F, se_mean, R_list[r], t);
        if (std::abs(mean_F) > 10.0 * se_mean) centered = false;
    }
    const SlopeFit fit = fit_loglog(R_list, values);
    rep.add("loglog_slope", fit.slope);
    rep.add("slope_target", beta - 2.0);
    const bool slope_ok = std::abs(fit.slope - (beta - 2.0)) <= slope_tol;
    rep.status = (decreasing && slope_ok && centered) ? Status::Pass : Status::Fail;
    return rep;
}

// ---------------------------------------------------------------------------
// Quantitative CLT distances
// ---------------------------------------------------------------------------

inline ExperimentReport qclt_experiment(const KernelSpec& kernel,
                                        const LevyMeasureSpec& nu, double p,
                                        double t, const std::vector<double>& R_list,
                                        const McOptions& opt,
                                        double dk_threshold = 0.06,
                                        const CoupledSamples* reuse = nullptr) {
    if (!(nu.moment(p) < std::numeric_limits<double>::infinity()) ||
        !(nu.moment(2.0 * p) < std::numeric_limits<double>::infinity()))
        throw ConfigError("qclt: m_p and m_2p must be finite");
    CoupledSamples local;
    if (!reuse) {
        local = sample_spatial_averages(kernel, nu, R_list, {t}, opt);
        reuse = &local;
    }
    ExperimentReport rep;
    rep.experiment = "qclt";
    rep.kernel = kernel.name();
    rep.nu = nu.name();
    rep.p = p;

    std::vector<double> dks;
    double floor = 0.0;
    bool moments_ok = true;
    for (std::size_t r = 0; r < R_list.size(); ++r) {
        const auto& F = reuse->at(r, 0);
        const double sd = std::sqrt(sample_variance(F));
        std::vector<double> std_samples(F.size());
        for (std::size_t i = 0; i < F.size(); ++i) std_samples[i] = F[i] / sd;
        const auto d = clt_distances(std_samples);
        floor = d.dkw_floor;
        dks.push_back(d.d_K);
        rep.add("d_K", d.d_K, d.dkw_floor, R_list[r], t);
        rep.add("d_W", d.d_W, std::nan(""), R_list[r], t);
        const double m = sample_mean(std_samples);
        const double se_m = mean_stderr(std_samples);
        const double v = sample_variance(std_samples);
        const auto vest = variance_with_se(std_samples);
        rep.add("std_mean", m, se_m, R_list[r], t);
        rep.add("std_var", v, vest.se, R_list[r], t);
        if (std::abs(m) > 3.0 * se_m || std::abs(v - 1.0) > 3.0 * vest.se)
            moments_ok = false;
    }
    bool monotone = true;
    for (std::size_t r = 1; r < dks.size(); ++r)
        if (dks[r] > dks[r - 1] + floor) monotone = false;
    rep.add("dkw_floor", floor);
    const bool final_ok = dks.back() <= dk_threshold;
    rep.add("final_d_K", dks.back(), floor, R_list.back(), t,
            std::nan(""), final_ok ? "PASS" : "FAIL");
    rep.status = (final_ok && monotone && moments_ok) ? Status::Pass : Status::Fail;
    return rep;
}

// ---------------------------------------------------------------------------
// Limiting covariance across time pairs
// ---------------------------------------------------------------------------

struct CovariancePair {
    double t, s;
};

// covariance of coupled samples with jackknife SE
inline VarianceEstimate covariance_with_se(const std::vector<double>& a,
                                           const std::vector<double>& b,
                                           std::size_t blocks = 50) {
    const std::size_t n = a.size();
    auto cov_excluding = [&](std::size_t lo, std::size_t hi) {
        KahanSum sa, sb, sab;
        std::size_t m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= lo && i < hi) continue;
            sa.add(a[i]);
            sb.add(b[i]);
            sab.add(a[i] * b[i]);
            ++m;
        }
        const double ma = sa.value() / m, mb = sb.value() / m;
        return (sab.value() - m * ma * mb) / static_cast<double>(m - 1);
    };
    VarianceEstimate e;
    e.value = cov_excluding(1, 0);  // empty exclusion
    e.se = jackknife_se(n, cov_excluding, blocks);
    return e;
}

inline ExperimentReport covariance_limit(const KernelSpec& kernel,
                                         const LevyMeasureSpec& nu,
                                         const std::vector<CovariancePair>& pairs,
                                         double R, double beta,
                                         const McOptions& opt,
                                         double rel_tol = 0.10) {
    // coupled sampling over the union of times
    std::vector<double> t_list;
    for (const auto& pr : pairs) {
        t_list.push_back(pr.t);
        t_list.push_back(pr.s);
    }
    std::sort(t_list.begin(), t_list.end());
    t_list.erase(std::unique(t_list.begin(), t_list.end()), t_list.end());
    const CoupledSamples cs =
        sample_spatial_averages(kernel, nu, {R}, t_list, opt);
    auto idx_of = [&](double t) {
        return static_cast<std::size_t>(
            std::find(t_list.begin(), t_list.end(), t) - t_list.begin());
    };

    ExperimentReport rep;
    rep.experiment = "covariance";
    rep.kernel = kernel.name();
    rep.nu = nu.name();

    const double Rb = std::pow(R, beta);
    std::vector<double> khat(pairs.size()), kse(pairs.size()), shape(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto est =
            covariance_with_se(cs.at(0, idx_of(pairs[i].t)), cs.at(0, idx_of(pairs[i].s)));
        khat[i] = est.value / Rb;
        kse[i] = est.se / Rb;
        shape[i] = riesz_covariance_shape(pairs[i].t, pairs[i].s);
        rep.add("K_hat", khat[i], kse[i], R, pairs[i].t, pairs[i].s);
    }

    if (kernel.is_riesz()) {
        // least squares through the origin for the single constant c_alpha
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            num += khat[i] * shape[i];
            den += shape[i] * shape[i];
        }
        const double c_alpha = num / den;
        rep.add("c_alpha_fit", c_alpha);
        bool pass = c_alpha > 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double fitted = c_alpha * shape[i];
            const double resid = std::abs(khat[i] - fitted) / std::abs(fitted);
            rep.add("rel_residual", resid, kse[i] / std::abs(fitted), R,
                    pairs[i].t, pairs[i].s);
            if (resid > rel_tol + 3.0 * kse[i] / std::abs(fitted)) pass = false;
        }
        // forced ratio K(t,t)/K(s,s) = (t/s)^3 across equal-time pairs
        for (std::size_t i = 0; i < pairs.size(); ++i)
            for (std::size_t j = 0; j < pairs.size(); ++j) {
                if (i == j || pairs[i].t != pairs[i].s || pairs[j].t != pairs[j].s)
                    continue;
                if (pairs[i].t <= pairs[j].t) continue;
                const double ratio = khat[i] / khat[j];
                const double target = std::pow(pairs[i].t / pairs[j].t, 3.0);
                rep.add("diag_ratio", ratio, std::nan(""), R, pairs[i].t,
                        pairs[j].t);
                rep.add("diag_ratio_target", target, std::nan(""), R, pairs[i].t,
                        pairs[j].t);
                if (std::abs(ratio / target - 1.0) > 0.15) pass = false;
            }
        rep.status = pass ? Status::Pass : Status::Fail;
    } else {
        // Gaussian comparison model: K(t,s) = 2 int Cov(U(t,x), U(s,0)) dx
        SolverConfig gcfg = opt.solver;
        gcfg.scheme = Scheme::Grid;
        const double Tmax = t_list.back();
        const double W = 2.0 * Tmax + 3.0 * std::sqrt(2.0) + 6.0;
        const double hx = 0.25;
        const auto nxc = static_cast<std::size_t>(std::ceil(2.0 * W / hx)) + 1;
        const std::size_t nrep = opt.n_replicates;
        std::vector<std::vector<double>> At(nrep), As(nrep);  // per pair below
        bool pass = true;
        for (std::size_t ip = 0; ip < pairs.size(); ++ip) {
            std::vector<std::vector<double>> ux(nrep, std::vector<double>(nxc));
            std::vector<double> u0(nrep);
            parallel_for(nrep, opt.resolved_workers(), [&](std::size_t i) {
                Rng rng = make_stream(opt.seed ^ 0x9D5ull, i);
                GridSolution U(GridSolution::GaussianTag{}, rng, kernel, nu.m2(),
                               Tmax, gcfg, -W, W);
                for (std::size_t j = 0; j < nxc; ++j)
                    ux[i][j] = U.eval(pairs[ip].t, -W + static_cast<double>(j) * hx);
                u0[i] = U.eval(pairs[ip].s, 0.0);
            });
            // K_gauss = 2 int Cov(U(t,x), U(s,0)) dx (trapezoid over x)
            KahanSum kg;
            const double mean0 = sample_mean(u0);
            for (std::size_t j = 0; j < nxc; ++j) {
                KahanSum sx, sxy;
                for (std::size_t i = 0; i < nrep; ++i) {
                    sx.add(ux[i][j]);
                    sxy.add(ux[i][j] * u0[i]);
                }
                const double mx = sx.value() / nrep;
                const double cov = sxy.value() / nrep - mx * mean0;
                kg.add((j == 0 || j + 1 == nxc ? 0.5 : 1.0) * cov);
            }
            const double K_gauss = 2.0 * kg.value() * hx;
            const std::size_t i1 = idx_of(pairs[ip].t), i2 = idx_of(pairs[ip].s);
            const auto est = covariance_with_se(cs.at(0, i1), cs.at(0, i2));
            const double K_levy = est.value / R;
            // rough SE for the Gaussian-model estimate via replicate blocks
            const double se_g = std::abs(K_gauss) * std::sqrt(2.0 / nrep) +
                                2.0 * W / std::sqrt(static_cast<double>(nrep));
            rep.add("K_levy", K_levy, est.se / R, R, pairs[ip].t, pairs[ip].s);
            rep.add("K_gauss", K_gauss, se_g, R, pairs[ip].t, pairs[ip].s);
            if (std::abs(K_levy - K_gauss) >
                3.0 * std::sqrt(est.se / R * est.se / R + se_g * se_g))
                pass = false;
        }
        rep.status = pass ? Status::Pass : Status::Fail;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Functional CLT: path covariance shape and increment moments
// ---------------------------------------------------------------------------

inline ExperimentReport fclt_experiment(const KernelSpec& kernel,
                                        const LevyMeasureSpec& nu, double pprime,
                                        double R, const std::vector<double>& t_grid,
                                        double beta, const McOptions& opt) {
    if (t_grid.size() < 3) throw ConfigError("fclt: need a time grid");
    const CoupledSamples cs = sample_spatial_averages(kernel, nu, {R}, t_grid, opt);
    ExperimentReport rep;
    rep.experiment = "fclt";
    rep.kernel = kernel.name();
    rep.nu = nu.name();
    rep.p = pprime;

    const double Rb = std::pow(R, beta);
    const std::size_t nt = t_grid.size();

    // finite-dimensional covariances of R^{-beta/2} F_R(.)
    std::vector<std::vector<double>> khat(nt, std::vector<double>(nt));
    std::vector<std::vector<double>> kse(nt, std::vector<double>(nt));
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = i; j < nt; ++j) {
            const auto est = covariance_with_se(cs.at(0, i), cs.at(0, j));
            khat[i][j] = khat[j][i] = est.value / Rb;
            kse[i][j] = kse[j][i] = est.se / Rb;
        }

    bool cov_ok = true;
    if (kernel.is_riesz()) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = i; j < nt; ++j) {
                const double sh = riesz_covariance_shape(t_grid[i], t_grid[j]);
                num += khat[i][j] * sh;
                den += sh * sh;
            }
        const double c_alpha = num / den;
        rep.add("c_alpha_fit", c_alpha);
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = i; j < nt; ++j) {
                const double fitted =
                    c_alpha * riesz_covariance_shape(t_grid[i], t_grid[j]);
                rep.add("K_hat", khat[i][j], kse[i][j], R, t_grid[i], t_grid[j]);
                if (std::abs(khat[i][j] - fitted) > 3.0 * kse[i][j]) cov_ok = false;
            }
    } else {
        // positivity and monotonicity in t ^ s along the grid
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = i; j < nt; ++j)
                rep.add("K_hat", khat[i][j], kse[i][j], R, t_grid[i], t_grid[j]);
        for (std::size_t i = 0; i + 1 < nt; ++i) {
            if (khat[i][i] <= 0.0) cov_ok = false;
            if (khat[i + 1][nt - 1] + 3.0 * kse[i + 1][nt - 1] <
                khat[i][nt - 1])
                cov_ok = false;
        }
    }

    // increment moments: E|F(t)-F(s)|^p' / (R^{beta p'/2} (t-s)^p')
    std::vector<double> ratios;
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = i + 1; j < nt; ++j) {
            const auto& Fi = cs.at(0, i);
            const auto& Fj = cs.at(0, j);
            KahanSum s;
            for (std::size_t r = 0; r < Fi.size(); ++r)
                s.add(std::pow(std::abs(Fj[r] - Fi[r]), pprime));
            const double mom = s.value() / static_cast<double>(Fi.size());
            const double denom = std::pow(R, 0.5 * beta * pprime) *
                                 std::pow(t_grid[j] - t_grid[i], pprime);
            ratios.push_back(mom / denom);
            rep.add("incr_ratio", ratios.back(), std::nan(""), R, t_grid[i],
                    t_grid[j]);
        }
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    const double mx = sorted.back();
    rep.add("incr_ratio_max", mx);
    rep.add("incr_ratio_median", med);
    const bool incr_ok = mx <= 5.0 * med;
    rep.status = (cov_ok && incr_ok) ? Status::Pass : Status::Fail;
    return rep;
}

}  // namespace hamlevy

#endif
