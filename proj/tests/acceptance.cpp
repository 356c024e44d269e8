// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line.  Tolerances are pinned here, not configurable.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "hamlevy/runner.hpp"

using namespace hamlevy;

namespace {

void verdict(int criterion, const char* label, bool pass) {
    std::printf("criterion %2d (%s): %s\n", criterion, label,
                pass ? "PASS" : "FAIL");
    std::fflush(stdout);
}

McOptions mc(std::size_t n, std::uint64_t seed, SolverConfig solver = {}) {
    McOptions opt;
    opt.n_replicates = n;
    opt.seed = seed;
    opt.solver = solver;
    return opt;
}

SolverConfig event_solver(double step = 1.0 / 16.0) {
    SolverConfig s;
    s.quad_step_target = step;
    return s;
}

SolverConfig grid_solver(double dx) {
    SolverConfig s;
    s.scheme = Scheme::Grid;
    s.dx = dx;
    s.dt = dx;
    return s;
}

const std::vector<double> kRScan = {8, 16, 32, 64};

}  // namespace

TEST_CASE("variance scaling in both kernel regimes", "[c1]") {
    auto nu = LevyMeasureSpec::rademacher();
    bool pass = true;

    {
        auto res = variance_scan(KernelSpec::gaussian(), nu, 1.0, kRScan, 1.0,
                                 mc(20000, 101, event_solver()), 0.15);
        std::printf("  integrable slope %.4f +- %.4f (target 1 +- 0.15)\n",
                    res.fit.slope, res.fit.se);
        pass = pass && std::abs(res.fit.slope - 1.0) <= 0.15;
    }
    {
        auto kernel = KernelSpec::riesz(0.5, 8.0 * (64.0 + 1.0));
        auto res = variance_scan(kernel, nu, 1.0, kRScan, 1.5,
                                 mc(20000, 102, grid_solver(1.0 / 32.0)), 0.15);
        std::printf("  riesz slope %.4f +- %.4f (target 1.5 +- 0.15)\n",
                    res.fit.slope, res.fit.se);
        pass = pass && std::abs(res.fit.slope - 1.5) <= 0.15;
    }
    verdict(1, "variance scaling", pass);
    CHECK(pass);
}

TEST_CASE("covariance shape in the riesz regime", "[c2]") {
    auto nu = LevyMeasureSpec::rademacher();
    auto kernel = KernelSpec::riesz(0.5, 8.0 * (64.0 + 2.0));
    McOptions opt = mc(8000, 202, grid_solver(1.0 / 16.0));
    std::vector<CovariancePair> pairs = {{1, 1}, {2, 1}, {2, 2}, {1.5, 1}};
    auto rep = covariance_limit(kernel, nu, pairs, 64.0, 1.5, opt, 0.10);
    for (const auto& r : rep.rows)
        if (r.statistic == "c_alpha_fit" || r.statistic == "diag_ratio" ||
            r.statistic == "rel_residual")
            std::printf("  %-14s %10.5f (t=%.1f s=%.1f)\n", r.statistic.c_str(),
                        r.value, r.t, r.s);
    const bool pass = rep.status == Status::Pass;
    verdict(2, "riesz covariance shape", pass);
    CHECK(pass);
}

TEST_CASE("Levy-Gaussian second moment identity", "[c3]") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::ChaosVerify;
    cfg.kernel = KernelSpec::gaussian();
    cfg.noise = LevyMeasureSpec::rademacher();
    cfg.t = 1.0;
    cfg.n_replicates = 20000;
    cfg.seed = 303;
    cfg.solver = event_solver();
    cfg.solver.dx = 1.0 / 32.0;
    cfg.solver.dt = cfg.solver.dx;
    auto rep = run_chaos_verify(cfg);
    double levy = 0, gauss = 0, chaos = 0;
    for (const auto& r : rep.rows) {
        if (r.statistic == "levy_second_moment") levy = r.value;
        if (r.statistic == "gaussian_second_moment") gauss = r.value;
        if (r.statistic == "chaos_moment") chaos = r.value;
    }
    std::printf("  E|u|^2: levy %.5f  gaussian %.5f  chaos(n<=3) %.5f\n", levy,
                gauss, chaos);
    const bool pass = rep.status == Status::Pass;
    verdict(3, "second moment identity", pass);
    CHECK(pass);
}

TEST_CASE("quantitative CLT at desk scale", "[c4]") {
    auto nu = LevyMeasureSpec::rademacher();
    bool pass = true;
    {
        auto rep = qclt_experiment(KernelSpec::gaussian(), nu, 2.0, 1.0, kRScan,
                                   mc(10000, 404, event_solver()), 0.06);
        for (const auto& r : rep.rows)
            if (r.statistic == "d_K")
                std::printf("  integrable R=%-4.0f d_K=%.4f (floor %.4f)\n", r.R,
                            r.value, r.stderr_value);
        pass = pass && rep.status == Status::Pass;
    }
    {
        auto kernel = KernelSpec::riesz(0.5, 8.0 * (64.0 + 1.0));
        auto rep = qclt_experiment(kernel, nu, 2.0, 1.0, kRScan,
                                   mc(10000, 405, grid_solver(1.0 / 32.0)), 0.06);
        for (const auto& r : rep.rows)
            if (r.statistic == "d_K")
                std::printf("  riesz      R=%-4.0f d_K=%.4f (floor %.4f)\n", r.R,
                            r.value, r.stderr_value);
        pass = pass && rep.status == Status::Pass;
    }
    verdict(4, "quantitative CLT", pass);
    CHECK(pass);
}

TEST_CASE("gamma rate audit", "[c5]") {
    auto nu = LevyMeasureSpec::rademacher();
    const std::vector<double> Rs = {8, 16, 32, 64, 128, 256, 512, 1024};
    bool pass = true;
    for (bool riesz : {false, true}) {
        auto kernel =
            riesz ? KernelSpec::riesz(0.5, 16.0) : KernelSpec::gaussian();
        auto rep = audit_gamma_rates(kernel, nu, 2.0, Rs, 1.0);
        std::printf("  %s:", riesz ? "riesz     " : "integrable");
        for (const auto& r : rep.rows)
            if (r.statistic.size() == 13 &&
                r.statistic.find("_slope") != std::string::npos)
                std::printf(" %.3f", r.value);
        std::printf("\n");
        pass = pass && rep.status == Status::Pass;
    }
    verdict(5, "gamma rate audit", pass);
    CHECK(pass);
}

TEST_CASE("Malliavin key estimates", "[c6]") {
    auto kernel = KernelSpec::gaussian(3.0);
    auto nu = LevyMeasureSpec::rademacher();
    SolverConfig cfg = event_solver(1.0 / 32.0);
    bool pass = true;

    KeyEstimateOptions opt;
    opt.t = 1.0;
    opt.n_samples = 10000;
    opt.seed = 606;
    {
        auto rep = verify_key_D(kernel, nu, cfg, 2.0, opt);
        double mx = 0, med = 0, viol = 1;
        for (const auto& r : rep.rows) {
            if (r.statistic == "max_ratio") mx = r.value;
            if (r.statistic == "median_ratio") med = r.value;
            if (r.statistic == "support_violations") viol = r.value;
        }
        std::printf("  D : max/median ratio %.3f (cap 5), support violations %g\n",
                    med > 0 ? mx / med : 0.0, viol);
        pass = pass && rep.status == Status::Pass;
    }
    {
        KeyEstimateOptions o2 = opt;
        o2.n_samples = 5000;
        auto rep = verify_key_D2(kernel, nu, cfg, 2.0, o2);
        double mx = 0, med = 0, viol = 1;
        for (const auto& r : rep.rows) {
            if (r.statistic == "max_ratio") mx = r.value;
            if (r.statistic == "median_ratio") med = r.value;
            if (r.statistic == "support_violations") viol = r.value;
        }
        std::printf("  D2: max/median ratio %.3f (cap 5), support violations %g\n",
                    med > 0 ? mx / med : 0.0, viol);
        pass = pass && rep.status == Status::Pass;
    }
    {
        // representation spot check on <= 2-atom instances
        const double t = 1.0, x = 0.1, r = 0.45, y = 0.2, z = 1.0;
        double worst = 0.0;
        for (int atoms = 0; atoms <= 2; ++atoms) {
            AtomCloud cloud;
            cloud.T = 1.0;
            cloud.L = 9.0;
            if (atoms >= 1) cloud.atoms.push_back(Atom{0.30, 0.4, 1.0});
            if (atoms >= 2) cloud.atoms.push_back(Atom{0.62, -0.5, -1.0});
            EventDrivenField base(cloud, kernel, cfg, x, x);
            DifferenceField d(base, Atom{r, y, z});
            const double lhs = d.eval(t, x);
            const int cells = 360;
            const double a = kernel.reach();
            KahanSum rhs;
            for (int i = 0; i < cells; ++i) {
                const double ylo = y - a + 2.0 * a * i / cells;
                const double yhi = y - a + 2.0 * a * (i + 1) / cells;
                const double mid = 0.5 * (ylo + yhi);
                auto v = solve_v_delta(cloud, kernel, r, mid, z, cfg, x, x);
                rhs.add(base.eval(r, mid) * v.eval(t, x) *
                        kernel.segment_mass(ylo - y, yhi - y));
            }
            worst = std::max(worst, std::abs(lhs - rhs.value()));
        }
        std::printf("  representation spot check: max |D - int u v k| = %.2e\n",
                    worst);
        pass = pass && worst <= 1e-3;
    }
    verdict(6, "Malliavin key estimates", pass);
    CHECK(pass);
}

TEST_CASE("Poincare inequality at R = 8", "[c7]") {
    auto kernel = KernelSpec::gaussian(3.0);
    auto nu = LevyMeasureSpec::rademacher();
    PoincareOptions opt;
    opt.t = 1.0;
    opt.R = 8.0;
    opt.n_replicates = 400;
    opt.seed = 707;
    auto rep = run_poincare(kernel, nu, event_solver(1.0 / 16.0), opt);
    for (const auto& r : rep.rows)
        if (r.statistic == "var_F" || r.statistic == "E_DF_normsq")
            std::printf("  %-12s %.5f +- %.5f\n", r.statistic.c_str(), r.value,
                        r.stderr_value);
    const bool pass = rep.status != Status::Fail;
    verdict(7, "Poincare inequality", pass);
    CHECK(pass);
}

TEST_CASE("multiple-integral combinatorics suite", "[c8]") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::ChaosVerify;
    cfg.seed = 808;
    cfg.n_replicates = 2000;  // only the identity block samples fields
    cfg.kernel = KernelSpec::gaussian();
    cfg.noise = LevyMeasureSpec::rademacher();
    cfg.solver = event_solver();
    auto rep = run_chaos_verify(cfg);
    bool pass = true;
    for (const auto& r : rep.rows) {
        if (r.statistic.rfind("product_formula", 0) == 0 ||
            r.statistic == "disjoint_support_product")
            std::printf("  %-26s max discrepancy %.2e %s\n", r.statistic.c_str(),
                        r.value, r.status.c_str());
        if (!r.status.empty() && r.status == "FAIL") pass = false;
    }
    pass = pass && rep.status == Status::Pass;
    verdict(8, "product formula and isometry", pass);
    CHECK(pass);
}

TEST_CASE("kernel analytics", "[c9]") {
    bool pass = true;
    Rng rng(909);
    // phi closed form vs quadrature at 1e-10
    for (int i = 0; i < 100 && pass; ++i) {
        const double t = rng.uniform(0.2, 3.0);
        const double r = rng.uniform(0.0, t);
        const double R = rng.uniform(0.5, 12.0);
        const double y = rng.uniform(-R - t, R + t);
        const std::size_t cells = 200000;
        const double h = 2.0 * R / cells;
        KahanSum acc;
        for (std::size_t c = 0; c < cells; ++c)
            acc.add(wave_kernel(t - r, -R + (c + 0.5) * h - y));
        if (std::abs(phi_tR(t, R, r, y) - acc.value() * h) > 1e-10) pass = false;
    }
    std::printf("  phi closed form vs quadrature at 1e-10: %s\n",
                pass ? "ok" : "violated");

    // ||G_t||_p identity
    for (double t : {0.5, 1.0, 4.0})
        for (double p : {1.0, 2.0, 3.0}) {
            const double direct = std::pow(std::pow(0.5, p) * 2.0 * t, 1.0 / p);
            if (std::abs(wave_kernel_lp_norm(t, p) - direct) > 1e-12 * direct)
                pass = false;
        }

    // Lemma 5.1-type bounds and Young / HLS shapes
    auto gauss = KernelSpec::gaussian();
    for (int i = 0; i < 60; ++i) {
        const double t = rng.uniform(0.2, 2.5);
        const double r = rng.uniform(0.0, t);
        const double R = rng.uniform(0.5, 10.0);
        const double p = rng.uniform(1.0, 3.5);
        if (phi_lp_norm_p_exact(t, R, r, p) >
            2.0 * R * std::pow(t - r, p) * (1.0 + 1e-12))
            pass = false;
        const double lhs =
            std::pow(phi_convolved_lp_norm_p(gauss, t, R, r, p), 1.0 / p);
        const double young =
            std::pow(phi_lp_norm_p_exact(t, R, r, p), 1.0 / p) * gauss.l1_norm;
        if (lhs > young * (1.0 + 1e-6)) pass = false;
    }
    {
        auto spec = KernelSpec::riesz(0.5, 600.0);
        std::vector<double> ratios;
        for (double R : {8.0, 16.0, 32.0, 64.0})
            ratios.push_back(
                std::pow(phi_convolved_lp_norm_p(spec, 1.0, R, 0.0, 2.0), 0.5) /
                std::pow(R, 1.0 / 2.0 + 0.25));
        if (*std::max_element(ratios.begin(), ratios.end()) >
            2.0 * *std::min_element(ratios.begin(), ratios.end()))
            pass = false;
        std::printf("  HLS ratio drift over R in {8..64}: %.3f\n",
                    ratios.back() / ratios.front());
    }
    verdict(9, "kernel analytics", pass);
    CHECK(pass);
}

TEST_CASE("functional CLT statistics", "[c10]") {
    auto nu = LevyMeasureSpec::rademacher();
    auto kernel = KernelSpec::riesz(0.5, 8.0 * (32.0 + 2.0));
    const std::vector<double> t_grid = {1.0 / 3, 2.0 / 3, 1.0, 4.0 / 3, 5.0 / 3, 2.0};
    auto rep = fclt_experiment(kernel, nu, 2.0, 32.0, t_grid, 1.5,
                               mc(10000, 1010, grid_solver(1.0 / 12.0)));
    double mx = 0, med = 0;
    for (const auto& r : rep.rows) {
        if (r.statistic == "incr_ratio_max") mx = r.value;
        if (r.statistic == "incr_ratio_median") med = r.value;
    }
    std::printf("  increment ratio max/median = %.3f (cap 5)\n",
                med > 0 ? mx / med : 0.0);
    const bool pass = rep.status == Status::Pass;
    verdict(10, "functional CLT", pass);
    CHECK(pass);
}

TEST_CASE("ergodic averaging", "[c11]") {
    auto nu = LevyMeasureSpec::rademacher();
    bool pass = true;
    {
        auto rep = ergodic_check(KernelSpec::gaussian(), nu, 1.0, kRScan, 1.0,
                                 mc(10000, 1111, event_solver()), 0.2);
        double slope = 0;
        for (const auto& r : rep.rows)
            if (r.statistic == "loglog_slope") slope = r.value;
        std::printf("  integrable slope %.4f (target %.1f +- 0.2)\n", slope, -1.0);
        pass = pass && rep.status == Status::Pass;
    }
    {
        auto kernel = KernelSpec::riesz(0.5, 8.0 * (64.0 + 1.0));
        auto rep = ergodic_check(kernel, nu, 1.0, kRScan, 1.5,
                                 mc(8000, 1112, grid_solver(1.0 / 32.0)), 0.2);
        double slope = 0;
        for (const auto& r : rep.rows)
            if (r.statistic == "loglog_slope") slope = r.value;
        std::printf("  riesz slope %.4f (target %.1f +- 0.2)\n", slope, -0.5);
        pass = pass && rep.status == Status::Pass;
    }
    verdict(11, "ergodic averaging", pass);
    CHECK(pass);
}

TEST_CASE("determinism and worker independence", "[c12]") {
    const char* cfg_text =
        "kind=qclt\nkernel=gaussian\nnoise=rademacher\np=2\nT=1\nt=1\n"
        "R_list=4,8\nn_replicates=500\nseed=1212\nquad_step=0.125\n"
        "dk_threshold=0.5\nscheme=event\n";
    auto base = parse_config_text(cfg_text);
    validate_config(base);
    auto body = [&](unsigned workers, std::uint64_t seed) {
        ExperimentConfig cfg = base;
        cfg.workers = workers;
        cfg.seed = seed;
        return run_experiment(cfg).csv_body();
    };
    const std::string ref = body(1, 1212);
    const bool same_seed = body(1, 1212) == ref;
    const bool workers_independent = body(2, 1212) == ref && body(3, 1212) == ref;
    const bool seed_sensitive = body(1, 77) != ref;
    std::printf("  byte-equal reruns: %s; worker independence: %s\n",
                same_seed ? "yes" : "no", workers_independent ? "yes" : "no");
    const bool pass = same_seed && workers_independent && seed_sensitive;
    verdict(12, "determinism and worker independence", pass);
    CHECK(pass);
}
