#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "hamlevy/chaos.hpp"
#include "hamlevy/solution.hpp"
#include "hamlevy/stats.hpp"

using namespace hamlevy;

namespace {

SolverConfig event_cfg(double step = 1.0 / 16.0) {
    SolverConfig cfg;
    cfg.quad_step_target = step;
    return cfg;
}

SolverConfig grid_cfg(double dx = 1.0 / 32.0) {
    SolverConfig cfg;
    cfg.scheme = Scheme::Grid;
    cfg.dx = dx;
    cfg.dt = dx;
    return cfg;
}

// Var of the exact half-diamond mass X(D_up): spatial-route oracle
double upper_mass_variance(const CovarianceKernel& f, double dt) {
    return adaptive_simpson(
        [&](double tau) {
            const double w = dt - tau;
            if (!(w > 0.0)) return 0.0;
            return adaptive_simpson(
                [&](double u) { return f.eval(u) * (2.0 * w - std::abs(u)); },
                -2.0 * w, 2.0 * w, 1e-12);
        },
        0.0, dt, 1e-11);
}

}  // namespace

TEST_CASE("empty cloud solves to the constant state", "[solver]") {
    auto kernel = KernelSpec::gaussian();
    AtomCloud cloud;
    cloud.T = 1.0;
    cloud.L = 10.0;
    SECTION("event-driven") {
        EventDrivenField u(cloud, kernel, event_cfg(), -2.0, 2.0);
        for (double t : {0.0, 0.4, 1.0})
            for (double x : {-2.0, 0.0, 1.3}) CHECK(u.eval(t, x) == 1.0);
        CHECK(u.spatial_average_centered(1.0, 2.0) == 0.0);
    }
    SECTION("grid") {
        auto nu = LevyMeasureSpec::rademacher();
        GridSolution u(cloud, kernel, nu, grid_cfg(), -2.0, 2.0);
        for (double t : {0.0, 0.5, 1.0})
            for (double x : {-1.5, 0.0, 2.0}) CHECK(u.eval(t, x) == 1.0);
        CHECK(u.spatial_average_centered(1.0, 2.0) == 0.0);
    }
}

TEST_CASE("single atom: exact influence geometry", "[solver]") {
    auto kernel = KernelSpec::gaussian(3.0);
    AtomCloud cloud;
    cloud.T = 1.0;
    cloud.L = 10.0;
    cloud.atoms = {Atom{0.4, 1.0, 1.0}};
    EventDrivenField u(cloud, kernel, event_cfg(), -6.0, 6.0);
    const double a = kernel.reach();
    // outside {|x - xi| < (t - tau) + a} the state is exactly 1
    for (double t : {0.5, 0.8, 1.0}) {
        const double spread = (t - 0.4) + a;
        CHECK(u.eval(t, 1.0 + spread + 0.01) == 1.0);
        CHECK(u.eval(t, 1.0 - spread - 0.01) == 1.0);
        CHECK(u.eval(t, 1.0 + spread - 0.05) != 1.0);
    }
    // before the atom's time nothing happened
    CHECK(u.eval(0.39, 1.0) == 1.0);
}

TEST_CASE("degenerate t = 0 returns the initial state exactly", "[solver]") {
    auto kernel = KernelSpec::gaussian();
    auto nu = LevyMeasureSpec::rademacher();
    Rng rng(6);
    auto cloud = sample_atoms(nu, 1.0, 9.0, rng);
    EventDrivenField u(cloud, kernel, event_cfg(), -1.0, 1.0);
    CHECK(u.eval(0.0, 0.3) == 1.0);
}

TEST_CASE("mean-one martingale property", "[solver][slow]") {
    auto kernel = KernelSpec::gaussian();
    const double L = 9.0;
    const std::size_t n = 10000;
    SECTION("event-driven, rademacher") {
        auto nu = LevyMeasureSpec::rademacher();
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(21, i);
            auto cloud = sample_atoms(nu, 1.0, L, rng);
            EventDrivenField u(cloud, kernel, nu, event_cfg(), 0.0, 0.0);
            v[i] = u.eval(1.0, 0.0);
        }
        CHECK(std::abs(sample_mean(v) - 1.0) <= 3.0 * mean_stderr(v));
    }
    SECTION("grid with an uncentered law exercises the compensator drift") {
        auto nu = LevyMeasureSpec::two_point(0.5, 2.0, -1.0);  // m1 = 0.5
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(22, i);
            auto cloud = sample_atoms(nu, 1.0, L, rng);
            GridSolution u(cloud, kernel, nu, grid_cfg(), 0.0, 0.0);
            v[i] = u.eval(1.0, 0.0);
        }
        CHECK(std::abs(sample_mean(v) - 1.0) <= 3.0 * mean_stderr(v));
    }
    SECTION("event-driven refuses uncentered noise") {
        auto nu = LevyMeasureSpec::two_point(0.5, 2.0, -1.0);
        AtomCloud cloud;
        cloud.T = 1.0;
        cloud.L = 9.0;
        CHECK_THROWS_AS(EventDrivenField(cloud, kernel, nu, event_cfg(), 0.0, 0.0),
                        ConfigError);
    }
}

TEST_CASE("scheme agreement on shared atoms", "[solver][slow]") {
    auto kernel = KernelSpec::gaussian();
    auto nu = LevyMeasureSpec::rademacher();
    const double dx = 1.0 / 32.0;
    double max_rel = 0.0;
    for (std::size_t rep = 0; rep < 5; ++rep) {
        Rng rng = make_stream(33, rep);
        auto cloud = sample_atoms(nu, 1.0, 12.0, rng);
        EventDrivenField ue(cloud, kernel, nu, event_cfg(1.0 / 32.0), -4.0, 4.0);
        GridSolution ug(cloud, kernel, nu, grid_cfg(dx), -4.0, 4.0);
        for (int i = 0; i < 20; ++i) {
            const double x = -4.0 + 8.0 * i / 19.0;
            const double a = ue.eval(1.0, x);
            const double b = ug.eval(1.0, x);
            max_rel = std::max(max_rel, std::abs(a - b) / std::abs(a));
        }
    }
    CHECK(max_rel <= 5.0 * dx);
}

TEST_CASE("strict stationarity in space", "[solver][slow]") {
    auto kernel = KernelSpec::gaussian();
    auto nu = LevyMeasureSpec::rademacher();
    const double L = 13.0;
    const std::size_t n = 3000;
    std::vector<double> at0(n), at5(n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        Rng rng = make_stream(44, i);
        auto cloud = sample_atoms(nu, 1.0, L, rng);
        if (i < n) {
            EventDrivenField u(cloud, kernel, nu, event_cfg(), 0.0, 0.0);
            at0[i] = u.eval(1.0, 0.0);
        } else {
            EventDrivenField u(cloud, kernel, nu, event_cfg(), 5.0, 5.0);
            at5[i - n] = u.eval(1.0, 5.0);
        }
    }
    const auto ks = ks_two_sample(at0, at5, 0.01);
    CHECK_FALSE(ks.reject);
}

TEST_CASE("light-cone locality is bitwise", "[solver]") {
    auto kernel = KernelSpec::gaussian(3.0);
    auto nu = LevyMeasureSpec::rademacher();
    Rng rng(59);
    auto cloud = sample_atoms(nu, 1.0, 12.0, rng);
    REQUIRE(cloud.atoms.size() > 5);
    const double t = 1.0, x = 0.0;
    EventDrivenField full(cloud, kernel, nu, event_cfg(), x, x);
    const double value = full.eval(t, x);

    AtomCloud pruned;
    pruned.T = cloud.T;
    pruned.L = cloud.L;
    for (const Atom& a : cloud.atoms)
        if (std::abs(a.x - x) < (t - a.t) + kernel.reach())
            pruned.atoms.push_back(a);
    REQUIRE(pruned.atoms.size() < cloud.atoms.size());
    EventDrivenField local(pruned, kernel, nu, event_cfg(), x, x);
    CHECK(local.eval(t, x) == value);
}

TEST_CASE("second moment matches the truncated chaos series", "[solver][slow]") {
    auto kernel = KernelSpec::gaussian();
    auto nu = LevyMeasureSpec::rademacher();
    const auto chaos = truncated_second_moment(kernel, nu.m2(), 1.0, 3, 96, 12);
    const std::size_t n = 8000;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_stream(72, i);
        auto cloud = sample_atoms(nu, 1.0, 9.0, rng);
        EventDrivenField u(cloud, kernel, nu, event_cfg(), 0.0, 0.0);
        const double v = u.eval(1.0, 0.0);
        sq[i] = v * v;
    }
    CHECK(std::abs(sample_mean(sq) - chaos.value) <=
          3.0 * mean_stderr(sq) + chaos.remainder_bound);
}

TEST_CASE("delta-velocity companion", "[solver][slow]") {
    auto kernel = KernelSpec::gaussian(3.0);
    SECTION("no atoms after r: v equals the forcing term") {
        AtomCloud cloud;
        cloud.T = 1.0;
        cloud.L = 8.0;
        auto v = solve_v_delta(cloud, kernel, 0.25, 0.5, 2.0, event_cfg(), -2.0, 2.0);
        CHECK(v.eval(1.0, 0.5) == 1.0);   // 2 G_{0.75}(0)
        CHECK(v.eval(1.0, 1.5) == 0.0);   // outside the cone
        CHECK(v.eval(0.2, 0.5) == 0.0);   // before r
    }
    SECTION("cone support is exact on random realizations") {
        auto nu = LevyMeasureSpec::rademacher();
        const double r = 0.3, y = 0.0, z = 1.0;
        for (std::size_t i = 0; i < 30; ++i) {
            Rng rng = make_stream(81, i);
            auto cloud = sample_atoms(nu, 1.0, 9.0, rng);
            auto v = solve_v_delta(cloud, kernel, r, y, z, event_cfg(), -3.0, 3.0);
            for (double t : {0.5, 1.0}) {
                CHECK(v.eval(t, y + (t - r) + 0.01) == 0.0);
                CHECK(v.eval(t, y - (t - r) - 0.01) == 0.0);
            }
        }
    }
    SECTION("martingale mean: E[v] = z G_{t-r}(x-y)") {
        auto nu = LevyMeasureSpec::rademacher();
        const std::size_t n = 10000;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(82, i);
            auto cloud = sample_atoms(nu, 1.0, 9.0, rng);
            auto f = solve_v_delta(cloud, kernel, 0.25, 0.0, 2.0, event_cfg(), 0.3, 0.3);
            v[i] = f.eval(1.0, 0.3);
        }
        CHECK(std::abs(sample_mean(v) - 1.0) <= 3.0 * mean_stderr(v));
    }
}

TEST_CASE("picard iterates", "[solver][slow]") {
    auto kernel = KernelSpec::gaussian(3.0);
    const double r = 0.2, y = 0.0, z = 1.5;
    SECTION("v0 is the forcing term; without atoms all iterates coincide") {
        AtomCloud cloud;
        cloud.T = 1.0;
        cloud.L = 8.0;
        auto seq = picard_iterates(kernel, cloud, r, y, z, 3, event_cfg(), -2.0, 2.0);
        for (double x : {-1.0, 0.0, 0.4}) {
            const double v0 = seq.eval(0, 1.0, x);
            CHECK(v0 == (std::abs(x - y) < 0.8 ? 0.75 : 0.0));
            for (int nn : {1, 2, 3}) CHECK(seq.eval(nn, 1.0, x) == v0);
        }
        CHECK_THROWS_AS(
            picard_iterates(kernel, cloud, r, y, z, 7, event_cfg(), -2.0, 2.0),
            DomainError);
    }
    SECTION("successive sup-norm differences contract in sample mean") {
        auto nu = LevyMeasureSpec::rademacher();
        KahanSum d21, d32;
        for (std::size_t i = 0; i < 100; ++i) {
            Rng rng = make_stream(93, i);
            auto cloud = sample_atoms(nu, 1.0, 9.0, rng);
            auto seq = picard_iterates(kernel, cloud, r, y, z, 3, event_cfg(), -2.0, 2.0);
            double s21 = 0.0, s32 = 0.0;
            for (int g = 0; g <= 20; ++g) {
                const double x = -2.0 + 4.0 * g / 20.0;
                s21 = std::max(s21,
                               std::abs(seq.eval(2, 1.0, x) - seq.eval(1, 1.0, x)));
                s32 = std::max(s32,
                               std::abs(seq.eval(3, 1.0, x) - seq.eval(2, 1.0, x)));
            }
            d21.add(s21);
            d32.add(s32);
        }
        CHECK(d32.value() < d21.value());
    }
}

TEST_CASE("gaussian comparison model", "[solver][slow]") {
    auto kernel = KernelSpec::gaussian();
    SECTION("zero variance noise keeps U constant") {
        Rng rng(3);
        auto U = solve_U_gaussian(rng, kernel, 0.0, 1.0, grid_cfg(), -1.0, 1.0);
        for (double x : {-1.0, 0.0, 0.7}) CHECK(U.eval(1.0, x) == 1.0);
    }
    SECTION("grid-only precondition") {
        Rng rng(3);
        SolverConfig ed;  // event-driven
        CHECK_THROWS_AS(solve_U_gaussian(rng, kernel, 1.0, 1.0, ed, 0.0, 0.0),
                        ConfigError);
    }
    SECTION("half-diamond noise mass variance matches the covariance oracle") {
        // one time step => u(dt, x) = 1 + A/2, A the exact upper-diamond mass
        const double dx = 1.0 / 8.0;
        const auto f = covariance_kernel(kernel);
        const double oracle = upper_mass_variance(f, dx);
        const std::size_t n = 40000;
        std::vector<double> gauss(n), levy(n);
        auto nu = LevyMeasureSpec::rademacher(16.0);  // dense atoms at small dt
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(64, i);
            GridSolution U(GridSolution::GaussianTag{}, rng, kernel, 1.0, dx,
                           grid_cfg(dx), 0.0, 0.0);
            gauss[i] = 2.0 * (U.eval(dx, 0.0) - 1.0);
            Rng rng2 = make_stream(65, i);
            auto cloud = sample_atoms(nu, dx, 8.0 + 2.0 * dx, rng2);
            GridSolution ul(cloud, kernel, nu, grid_cfg(dx), 0.0, 0.0);
            levy[i] = 2.0 * (ul.eval(dx, 0.0) - 1.0);
        }
        const auto vg = variance_with_se(gauss);
        const auto vl = variance_with_se(levy);
        CHECK(std::abs(vg.value - oracle) <= 3.0 * vg.se + 0.01 * oracle);
        CHECK(std::abs(vl.value - nu.m2() * oracle) <=
              3.0 * vl.se + 0.01 * nu.m2() * oracle);
    }
    SECTION("variance at first order is m2 q_t up to discretization bias") {
        const double m2 = 1.0;
        const double q1 = q_t_spatial(covariance_kernel(kernel), 1.0);
        const std::size_t n = 6000;
        const double dx = 1.0 / 64.0;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(66, i);
            GridSolution U(GridSolution::GaussianTag{}, rng, kernel, m2, 1.0,
                           grid_cfg(dx), 0.0, 0.0);
            v[i] = U.eval(1.0, 0.0) - 1.0;
        }
        const auto est = variance_with_se(v);
        // 3 sigma plus an explicit O(dx) bias allowance
        CHECK(std::abs(est.value - m2 * q1) <=
              3.0 * est.se + 1.0 * dx * m2 * q1 + 0.01 * m2 * q1);
    }
    SECTION("x-shift invariance (two-sample KS at 1%)") {
        const std::size_t n = 3000;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(67, i);
            GridSolution U(GridSolution::GaussianTag{}, rng, kernel, 1.0, 1.0,
                           grid_cfg(), -4.0, 4.0);
            a[i] = U.eval(1.0, 0.0);
            Rng rng2 = make_stream(68, i + n);
            GridSolution U2(GridSolution::GaussianTag{}, rng2, kernel, 1.0, 1.0,
                            grid_cfg(), -4.0, 4.0);
            b[i] = U2.eval(1.0, 3.0);
        }
        CHECK_FALSE(ks_two_sample(a, b, 0.01).reject);
    }
}

TEST_CASE("solver configuration invariants", "[solver]") {
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.dx = 0.05;  // violates dt <= dx
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SolverConfig{};
    cfg.picard_depth = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SolverConfig{};
    cfg.dx = 0.1;
    cfg.dt = 0.05;  // dt < dx passes the type invariant but not the stencil
    auto nu = LevyMeasureSpec::rademacher();
    AtomCloud cloud;
    cloud.T = 1.0;
    cloud.L = 8.0;
    CHECK_THROWS_AS(
        GridSolution(cloud, KernelSpec::gaussian(), nu, cfg, 0.0, 0.0),
        ConfigError);
    // window too small for the evaluation region
    cloud.L = 2.0;
    CHECK_THROWS_AS(EventDrivenField(cloud, KernelSpec::gaussian(), nu,
                                     SolverConfig{}, 0.0, 0.0),
                    DomainError);
}
