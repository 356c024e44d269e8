#ifndef HAMLEVY_MALLIAVIN_HPP
#define HAMLEVY_MALLIAVIN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hamlevy/kernels.hpp"
#include "hamlevy/levy_noise.hpp"
#include "hamlevy/parallel.hpp"
#include "hamlevy/quadrature.hpp"
#include "hamlevy/report.hpp"
#include "hamlevy/solver.hpp"
#include "hamlevy/stats.hpp"

namespace hamlevy {

// ---------------------------------------------------------------------------
// Add-one-point / add-two-point difference operators at a single probe.
// ---------------------------------------------------------------------------

inline double difference_D(const AtomCloud& cloud, const KernelSpec& kernel,
                           const SolverConfig& cfg, const Atom& extra, double t,
                           double x) {
    EventDrivenField base(cloud, kernel, cfg, x, x);
    DifferenceField d(base, extra);
    return d.eval(t, x);
}

inline double difference_D2(const AtomCloud& cloud, const KernelSpec& kernel,
                            const SolverConfig& cfg, const Atom& e1,
                            const Atom& e2, double t, double x) {
    EventDrivenField base(cloud, kernel, cfg, x, x);
    SecondDifferenceField dd(base, e1, e2);
    return dd.eval(t, x);
}

// RHS of the first key estimate: |z| (G_{t-r}(x-.) * k)(y), exact in k
inline double key_D_rhs(const KernelSpec& kernel, double t, double x, double r,
                        double y, double z) {
    if (!(t > r)) return 0.0;
    const double c = t - r;
    return std::abs(z) * 0.5 *
           (kernel.antiderivative(y - x + c) - kernel.antiderivative(y - x - c));
}

// RHS of the second key estimate:
// |z1 z2| int int f~2(r1,y1',r2,y2',t,x) k(y1-y1') k(y2-y2') dy1' dy2'
inline double key_D2_rhs(const KernelSpec& kernel, double t, double x, double r1,
                         double y1, double z1, double r2, double y2, double z2,
                         std::size_t cells = 512) {
    if (r1 > r2) {
        std::swap(r1, r2);
        std::swap(y1, y2);
        std::swap(z1, z2);
    }
    if (!(t > r2) || r1 == r2) return 0.0;
    // f~2 = (1/2) G_{t-r2}(x-y2') G_{r2-r1}(y2'-y1') on the off-diagonal
    const double c2 = t - r2;
    const double c1 = r2 - r1;
    const double lo = x - c2, hi = x + c2;
    const double h = (hi - lo) / static_cast<double>(cells);
    KahanSum acc;
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = lo + static_cast<double>(i) * h;
        const double b = a + h;
        const double mid = 0.5 * (a + b);
        // inner: int G_{r2-r1}(y2'-y1') k(y1-y1') dy1'
        const double inner =
            0.5 * (kernel.antiderivative(y1 - mid + c1) -
                   kernel.antiderivative(y1 - mid - c1));
        // outer cell mass of k(y2 - y2')
        const double mass =
            kernel.antiderivative(y2 - a) - kernel.antiderivative(y2 - b);
        acc.add(inner * mass);
    }
    return std::abs(z1 * z2) * 0.5 * 0.5 * acc.value();
}

// ---------------------------------------------------------------------------
// Monte-Carlo audits of the key estimates
// ---------------------------------------------------------------------------

struct KeyEstimateOptions {
    double t = 1.0;
    double x = 0.0;
    std::size_t n_samples = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0 = default
    double ratio_cap = 5.0;  // PASS iff max ratio <= cap * median ratio
    double max_rel_se = 0.2;
};

namespace detail {

inline std::vector<double> nu_support(const LevyMeasureSpec& nu) {
    switch (nu.law) {
        case JumpLaw::Rademacher: return {1.0, -1.0};
        case JumpLaw::TwoPoint: return {nu.z1, nu.z2};
        case JumpLaw::Uniform: return {0.5 * nu.uniform_halfwidth,
                                       -0.5 * nu.uniform_halfwidth};
    }
    return {1.0};
}

}  // namespace detail

inline ExperimentReport verify_key_D(const KernelSpec& kernel,
                                     const LevyMeasureSpec& nu,
                                     const SolverConfig& cfg, double p,
                                     const KeyEstimateOptions& opt) {
    if (!(nu.moment(p) < std::numeric_limits<double>::infinity()))
        throw DomainError("verify_key_D: m_p must be finite");
    ExperimentReport rep;
    rep.experiment = "malliavin-verify";
    rep.kernel = kernel.name();
    rep.nu = nu.name();
    rep.p = p;

    const double t = opt.t, x = opt.x;
    const double reach = kernel.reach();
    const double L = std::abs(x) + t + reach + 1.0;
    const std::vector<double> r_list = {0.1 * t, 0.3 * t, 0.5 * t, 0.7 * t,
                                        0.9 * t};
    // spatial offsets: three inside every reach-extended cone, two that exit
    // the cone for the later r values
    const std::vector<double> dy_list = {0.0, -0.35 * (t + reach),
                                         0.35 * (t + reach), -0.8 * (t + reach),
                                         0.8 * (t + reach)};
    const std::vector<double> zs = detail::nu_support(nu);

    struct Cell {
        double r, y, z, rhs;
        KahanSum sum_pow;     // |D|^p accumulations (single-writer per thread)
    };
    const std::size_t G = r_list.size() * dy_list.size() * zs.size();
    const unsigned workers = opt.workers ? opt.workers : default_workers();
    // per-worker accumulators, merged in index order afterwards
    std::vector<std::vector<double>> pow_sum(opt.n_samples);
    std::vector<std::vector<double>> pow_sq(opt.n_samples);
    std::vector<char> support_violation(opt.n_samples, 0);

    std::vector<Cell> cells;
    cells.reserve(G);
    for (double r : r_list)
        for (double dy : dy_list)
            for (double z : zs) {
                Cell c;
                c.r = r;
                c.y = x + dy;
                c.z = z;
                c.rhs = key_D_rhs(kernel, t, x, r, c.y, z);
                cells.push_back(c);
            }

    parallel_for(opt.n_samples, workers, [&](std::size_t i) {
        Rng rng = make_stream(opt.seed, i);
        const AtomCloud cloud = sample_atoms(nu, t, L, rng);
        EventDrivenField base(cloud, kernel, cfg, x, x);
        auto& ps = pow_sum[i];
        auto& pq = pow_sq[i];
        ps.assign(G, 0.0);
        pq.assign(G, 0.0);
        for (std::size_t g = 0; g < G; ++g) {
            DifferenceField d(base, Atom{cells[g].r, cells[g].y, cells[g].z});
            const double v = d.eval(t, x);
            if (cells[g].rhs == 0.0 && v != 0.0) support_violation[i] = 1;
            const double w = std::pow(std::abs(v), p);
            ps[g] = w;
            pq[g] = w * w;
        }
    });

    bool violated = false;
    for (char c : support_violation) violated |= (c != 0);

    const double n = static_cast<double>(opt.n_samples);
    std::vector<double> ratios;
    bool inconclusive = false;
    // per-row trend bookkeeping: ratio vs y at fixed r over interior offsets
    std::vector<std::vector<std::pair<double, double>>> rows(r_list.size());
    for (std::size_t g = 0; g < G; ++g) {
        KahanSum s, s2;
        for (std::size_t i = 0; i < opt.n_samples; ++i) {
            s.add(pow_sum[i][g]);
            s2.add(pow_sq[i][g]);
        }
        const double mean = s.value() / n;
        const double var = std::max(s2.value() / n - mean * mean, 0.0);
        const double se_mean = std::sqrt(var / n);
        const double norm = std::pow(mean, 1.0 / p);
        const double rel_se = mean > 0.0 ? se_mean / (p * mean) : 0.0;
        double ratio = 0.0;
        if (cells[g].rhs > 0.0 && mean > 0.0) {
            ratio = norm / cells[g].rhs;
            ratios.push_back(ratio);
            if (rel_se > opt.max_rel_se) inconclusive = true;
            const std::size_t r_idx =
                (g / zs.size()) / dy_list.size();
            rows[r_idx].push_back({cells[g].y, ratio});
        }
        rep.add("normD_ratio", ratio, norm * rel_se, std::nan(""), cells[g].r,
                std::nan(""));
        rep.rows.back().s = cells[g].y;
    }

    double max_ratio = 0.0, median_ratio = 0.0;
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        max_ratio = ratios.back();
        median_ratio = ratios[ratios.size() / 2];
    }
    rep.add("max_ratio", max_ratio);
    rep.add("median_ratio", median_ratio);
    rep.add("fitted_constant", max_ratio);

    // trend check: least-squares slope of ratio on y per r row
    bool trend_free = true;
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        const auto& row = rows[ri];
        if (row.size() < 3) continue;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [yy, rr] : row) {
            sx += yy;
            sy += rr;
            sxx += yy * yy;
            sxy += yy * rr;
        }
        const double m = static_cast<double>(row.size());
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double scale = median_ratio > 0 ? median_ratio : 1.0;
        rep.add("ratio_trend_slope", slope, std::nan(""), std::nan(""),
                r_list[ri]);
        if (std::abs(slope) * (t + reach) > 0.75 * scale) trend_free = false;
    }

    rep.add("support_violations", violated ? 1.0 : 0.0);
    const bool pass = !violated && trend_free && !ratios.empty() &&
                      max_ratio <= opt.ratio_cap * median_ratio;
    rep.status = inconclusive ? Status::Inconclusive
                              : (pass ? Status::Pass : Status::Fail);
    return rep;
}

inline ExperimentReport verify_key_D2(const KernelSpec& kernel,
                                      const LevyMeasureSpec& nu,
                                      const SolverConfig& cfg, double p,
                                      const KeyEstimateOptions& opt) {
    if (!(nu.moment(p) < std::numeric_limits<double>::infinity()))
        throw DomainError("verify_key_D2: m_p must be finite");
    ExperimentReport rep;
    rep.experiment = "malliavin-verify-d2";
    rep.kernel = kernel.name();
    rep.nu = nu.name();
    rep.p = p;

    const double t = opt.t, x = opt.x;
    const double reach = kernel.reach();
    const double L = std::abs(x) + t + reach + 1.0;
    const std::vector<double> r1_list = {0.15 * t, 0.35 * t, 0.55 * t};
    const std::vector<double> gap_list = {0.1 * t, 0.25 * t, 0.4 * t};
    const std::vector<double> dy_list = {0.0, -0.4 * (t + reach),
                                         0.9 * (t + reach)};
    const std::vector<double> zs = detail::nu_support(nu);
    const double z1 = zs[0], z2 = zs[zs.size() > 1 ? 1 : 0];

    struct Cell {
        Atom e1, e2;
        double rhs;
    };
    std::vector<Cell> cells;
    for (double r1 : r1_list)
        for (double gap : gap_list)
            for (double dy : dy_list) {
                Cell c;
                c.e1 = Atom{r1, x + dy, z1};
                c.e2 = Atom{r1 + gap, x - 0.5 * dy, z2};
                c.rhs = key_D2_rhs(kernel, t, x, c.e1.t, c.e1.x, z1, c.e2.t,
                                   c.e2.x, z2);
                cells.push_back(c);
            }
    const std::size_t G = cells.size();
    const unsigned workers = opt.workers ? opt.workers : default_workers();
    std::vector<std::vector<double>> pow_sum(opt.n_samples);
    std::vector<char> support_violation(opt.n_samples, 0);

    parallel_for(opt.n_samples, workers, [&](std::size_t i) {
        Rng rng = make_stream(opt.seed, i);
        const AtomCloud cloud = sample_atoms(nu, t, L, rng);
        EventDrivenField base(cloud, kernel, cfg, x, x);
        auto& ps = pow_sum[i];
        ps.assign(G, 0.0);
        for (std::size_t g = 0; g < G; ++g) {
            SecondDifferenceField dd(base, cells[g].e1, cells[g].e2);
            const double v = dd.eval(t, x);
            if (cells[g].rhs == 0.0 && v != 0.0) support_violation[i] = 1;
            ps[g] = std::pow(std::abs(v), p);
        }
    });

    bool violated = false;
    for (char c : support_violation) violated |= (c != 0);

    const double n = static_cast<double>(opt.n_samples);
    std::vector<double> ratios;
    bool inconclusive = false;
    for (std::size_t g = 0; g < G; ++g) {
        KahanSum s, s2;
        for (std::size_t i = 0; i < opt.n_samples; ++i) {
            s.add(pow_sum[i][g]);
            s2.add(pow_sum[i][g] * pow_sum[i][g]);
        }
        const double mean = s.value() / n;
        const double var = std::max(s2.value() / n - mean * mean, 0.0);
        const double rel_se = mean > 0.0 ? std::sqrt(var / n) / (p * mean) : 0.0;
        const double norm = std::pow(mean, 1.0 / p);
        double ratio = 0.0;
        if (cells[g].rhs > 0.0 && mean > 0.0) {
            ratio = norm / cells[g].rhs;
            ratios.push_back(ratio);
            if (rel_se > opt.max_rel_se) inconclusive = true;
        }
        rep.add("normD2_ratio", ratio, std::nan(""), std::nan(""), cells[g].e1.t,
                cells[g].e2.t);
    }
    double max_ratio = 0.0, median_ratio = 0.0;
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        max_ratio = ratios.back();
        median_ratio = ratios[ratios.size() / 2];
    }
    rep.add("max_ratio", max_ratio);
    rep.add("median_ratio", median_ratio);
    rep.add("support_violations", violated ? 1.0 : 0.0);
    const bool pass =
        !violated && !ratios.empty() && max_ratio <= opt.ratio_cap * median_ratio;
    rep.status = inconclusive ? Status::Inconclusive
                              : (pass ? Status::Pass : Status::Fail);
    return rep;
}

// ---------------------------------------------------------------------------
// Poincare inequality:  Var(F) <= E ||DF||_H^2
// ---------------------------------------------------------------------------

// assembly from paired per-replicate samples
inline ExperimentReport poincare_check(const std::vector<double>& F_samples,
                                       const std::vector<double>& DF_normsq_samples) {
    if (F_samples.size() != DF_normsq_samples.size() || F_samples.size() < 10)
        throw DomainError("poincare_check: need paired samples");
    ExperimentReport rep;
    rep.experiment = "poincare";
    const auto varF = variance_with_se(F_samples);
    const double meanQ = sample_mean(DF_normsq_samples);
    const double seQ = mean_stderr(DF_normsq_samples);
    const double se = std::sqrt(varF.se * varF.se + seQ * seQ);
    rep.add("var_F", varF.value, varF.se);
    rep.add("E_DF_normsq", meanQ, seQ);
    rep.add("gap", meanQ - varF.value, se);
    const bool inconclusive =
        varF.value > 0.0 && (varF.se > 0.2 * varF.value || seQ > 0.2 * meanQ);
    const bool pass = varF.value <= meanQ + 3.0 * se;
    rep.status = !pass ? Status::Fail
                       : (inconclusive ? Status::Inconclusive : Status::Pass);
    return rep;
}

struct PoincareOptions {
    double t = 1.0;
    double R = 8.0;
    std::size_t n_replicates = 400;
    std::uint64_t seed = 2;
    unsigned workers = 0;
    std::size_t r_nodes = 6;
    double y_step = 1.0;
};

// Monte-Carlo driver: F = F_R(t), the H-norm of DF by (r,y) quadrature with
// the nu-integral in closed form.
inline ExperimentReport run_poincare(const KernelSpec& kernel,
                                     const LevyMeasureSpec& nu,
                                     const SolverConfig& cfg,
                                     const PoincareOptions& opt) {
    const double t = opt.t, R = opt.R;
    const double reach = kernel.reach();
    const double L = R + t + reach + 1.0;
    const GaussRule rrule = gauss_legendre(opt.r_nodes);
    const double ylo = -R - reach - t, yhi = R + reach + t;
    const auto ny = static_cast<std::size_t>(std::ceil((yhi - ylo) / opt.y_step));
    const std::vector<double> zs = detail::nu_support(nu);

    std::vector<double> F(opt.n_replicates), Q(opt.n_replicates);
    const unsigned workers = opt.workers ? opt.workers : default_workers();
    parallel_for(opt.n_replicates, workers, [&](std::size_t i) {
        Rng rng = make_stream(opt.seed, i);
        const AtomCloud cloud = sample_atoms(nu, t, L, rng);
        EventDrivenField base(cloud, kernel, cfg, -R, R);
        F[i] = base.spatial_average_centered(t, R);
        KahanSum q;
        for (std::size_t a = 0; a < rrule.nodes.size(); ++a) {
            const double r = 0.5 * t * (1.0 + rrule.nodes[a]);
            const double wr = 0.5 * t * rrule.weights[a];
            for (std::size_t b = 0; b < ny; ++b) {
                const double y = ylo + (static_cast<double>(b) + 0.5) * opt.y_step;
                const double nuint = nu.nu_expectation([&](double z) {
                    DifferenceField d(base, Atom{r, y, z});
                    const double v = d.spatial_average_centered(t, R);
                    return v * v;
                });
                q.add(wr * opt.y_step * nuint);
            }
        }
        Q[i] = q.value();
    });

    ExperimentReport rep = poincare_check(F, Q);
    rep.kernel = kernel.name();
    rep.nu = nu.name();
    rep.add("R", R);
    rep.add("t", t);
    return rep;
}

}  // namespace hamlevy

#endif
