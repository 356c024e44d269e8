#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hamlevy/malliavin.hpp"
#include "hamlevy/solution.hpp"

using namespace hamlevy;

namespace {

SolverConfig cfg32() {
    SolverConfig cfg;
    cfg.quad_step_target = 1.0 / 32.0;
    return cfg;
}

AtomCloud two_atom_cloud(double L = 9.0) {
    AtomCloud cloud;
    cloud.T = 1.0;
    cloud.L = L;
    cloud.atoms = {Atom{0.30, 0.4, 1.0}, Atom{0.62, -0.5, -1.0}};
    return cloud;
}

}  // namespace

TEST_CASE("difference operator basics", "[malliavin]") {
    auto kernel = KernelSpec::gaussian(3.0);
    auto cloud = two_atom_cloud();
    SECTION("adaptedness: zero for r > t, exactly") {
        CHECK(difference_D(cloud, kernel, cfg32(), Atom{0.9, 0.0, 1.0}, 0.8, 0.0) ==
              0.0);
    }
    SECTION("zero outside the reach-extended cone, exactly") {
        const double t = 1.0, r = 0.8;
        const double x = 0.0;
        const double y = x + (t - r) + kernel.reach() + 0.02;
        AtomCloud wide = two_atom_cloud(12.0);
        CHECK(difference_D(wide, kernel, cfg32(), Atom{r, y, 1.0}, t, x) == 0.0);
        CHECK(difference_D(wide, kernel, cfg32(), Atom{r, y - 0.1, 1.0}, t, x) !=
              0.0);
    }
    SECTION("empty base cloud: first-order closed form") {
        AtomCloud empty;
        empty.T = 1.0;
        empty.L = 9.0;
        const double r = 0.3, y = 0.4, z = 1.7, t = 1.0, x = 0.0;
        const double got = difference_D(empty, kernel, cfg32(), Atom{r, y, z}, t, x);
        CHECK_THAT(got,
                   Catch::Matchers::WithinRel(key_D_rhs(kernel, t, x, r, y, z), 1e-6));
    }
    SECTION("window violations raise domain errors") {
        CHECK_THROWS_AS(
            difference_D(cloud, kernel, cfg32(), Atom{1.5, 0.0, 1.0}, 1.0, 0.0),
            DomainError);
        CHECK_THROWS_AS(
            difference_D(cloud, kernel, cfg32(), Atom{0.5, 20.0, 1.0}, 1.0, 0.0),
            DomainError);
    }
}

TEST_CASE("representation identity on small instances", "[malliavin][slow]") {
    // D_{r,y,z} u(t,x) = int u(r,y') v^{(r,y',z)}(t,x) k(y-y') dy'
    auto kernel = KernelSpec::gaussian(3.0);
    auto cfg = cfg32();
    const double t = 1.0, x = 0.1;
    for (std::size_t instance = 0; instance < 3; ++instance) {
        AtomCloud cloud;
        cloud.T = 1.0;
        cloud.L = 9.0;
        if (instance >= 1) cloud.atoms.push_back(Atom{0.30, 0.4, 1.0});
        if (instance >= 2) cloud.atoms.push_back(Atom{0.62, -0.5, -1.0});
        const double r = 0.45, y = 0.2, z = 1.0;
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
        INFO("instance with " << cloud.atoms.size() << " atoms");
        CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs.value(), 1e-3));
    }
}

TEST_CASE("second difference operator", "[malliavin]") {
    auto kernel = KernelSpec::gaussian(3.0);
    auto cloud = two_atom_cloud();
    const Atom e1{0.3, 0.2, 1.0}, e2{0.5, -0.1, -1.0};
    const double t = 1.0, x = 0.1;
    SECTION("argument swap is bitwise identical") {
        const double a = difference_D2(cloud, kernel, cfg32(), e1, e2, t, x);
        const double b = difference_D2(cloud, kernel, cfg32(), e2, e1, t, x);
        CHECK(a == b);
        CHECK(a != 0.0);
    }
    SECTION("matches the four-solve bracket") {
        auto sorted_push = [](AtomCloud c, const Atom& e) {
            c.atoms.push_back(e);
            std::sort(c.atoms.begin(), c.atoms.end(),
                      [](const Atom& p, const Atom& q) { return p.t < q.t; });
            return c;
        };
        auto eval = [&](const AtomCloud& c) {
            EventDrivenField f(c, kernel, cfg32(), x, x);
            return f.eval(t, x);
        };
        const AtomCloud c1 = sorted_push(cloud, e1);
        const AtomCloud c2 = sorted_push(cloud, e2);
        const AtomCloud c12 = sorted_push(c1, e2);
        const double brute = eval(c12) - eval(c1) - eval(c2) + eval(cloud);
        CHECK_THAT(difference_D2(cloud, kernel, cfg32(), e1, e2, t, x),
                   Catch::Matchers::WithinAbs(brute, 1e-12));
    }
    SECTION("zero when either added time is after the probe") {
        CHECK(difference_D2(cloud, kernel, cfg32(), Atom{0.9, 0.0, 1.0},
                            Atom{0.95, 0.1, 1.0}, 0.8, 0.0) == 0.0);
    }
    SECTION("zero when both atoms are far outside the cone") {
        AtomCloud wide = two_atom_cloud(14.0);
        const double far = (t - 0.3) + kernel.reach() + 0.05;
        CHECK(difference_D2(wide, kernel, cfg32(), Atom{0.3, x + far, 1.0},
                            Atom{0.5, x - far, 1.0}, t, x) == 0.0);
    }
}

TEST_CASE("key estimate audits on a small grid", "[malliavin][slow]") {
    auto kernel = KernelSpec::gaussian(3.0);
    auto nu = LevyMeasureSpec::rademacher();
    KeyEstimateOptions opt;
    opt.t = 1.0;
    opt.n_samples = 1500;
    opt.seed = 7;
    SECTION("first derivative") {
        auto rep = verify_key_D(kernel, nu, cfg32(), 2.0, opt);
        INFO(rep.csv_body());
        CHECK(rep.status == Status::Pass);
    }
    SECTION("second derivative") {
        opt.n_samples = 800;
        auto rep = verify_key_D2(kernel, nu, cfg32(), 2.0, opt);
        INFO(rep.csv_body());
        CHECK(rep.status == Status::Pass);
    }
}

TEST_CASE("key_D2 RHS is symmetric under the pair swap", "[malliavin]") {
    auto kernel = KernelSpec::gaussian(3.0);
    const double a = key_D2_rhs(kernel, 1.0, 0.0, 0.2, 0.3, 1.0, 0.6, -0.4, 2.0);
    const double b = key_D2_rhs(kernel, 1.0, 0.0, 0.6, -0.4, 2.0, 0.2, 0.3, 1.0);
    CHECK(a == b);
    CHECK(a > 0.0);
}

TEST_CASE("poincare inequality", "[malliavin][slow]") {
    SECTION("constant F trivially passes") {
        std::vector<double> F(64, 3.0), Q(64, 0.5);
        auto rep = poincare_check(F, Q);
        CHECK(rep.status == Status::Pass);
    }
    SECTION("first-chaos functional attains equality") {
        // F = L(phi): Var F = m2 ||phi||^2 and E||DF||^2_H equals it exactly
        auto nu = LevyMeasureSpec::rademacher();
        auto phi = [](double t, double x) {
            return std::exp(-x * x) * (1.0 + t);
        };
        const double norm_sq = adaptive_simpson(
            [&](double t) {
                return adaptive_simpson(
                    [&](double x) { return phi(t, x) * phi(t, x); }, -3.0, 3.0,
                    1e-11);
            },
            0.0, 1.0, 1e-10);
        const std::size_t n = 6000;
        std::vector<double> F(n), Q(n, nu.m2() * norm_sq);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(71, i);
            auto cloud = sample_atoms(nu, 1.0, 3.0, rng);
            F[i] = levy_integral(cloud, nu, phi);
        }
        auto rep = poincare_check(F, Q);
        CHECK(rep.status != Status::Fail);
        const auto varF = variance_with_se(F);
        CHECK(std::abs(varF.value - nu.m2() * norm_sq) <= 3.0 * varF.se);
    }
    SECTION("spatial average at a small radius") {
        auto kernel = KernelSpec::gaussian(3.0);
        auto nu = LevyMeasureSpec::rademacher();
        PoincareOptions opt;
        opt.t = 1.0;
        opt.R = 4.0;
        opt.n_replicates = 120;
        opt.r_nodes = 5;
        opt.y_step = 1.0;
        opt.seed = 8;
        auto rep = run_poincare(kernel, nu, cfg32(), opt);
        INFO(rep.csv_body());
        CHECK(rep.status != Status::Fail);
    }
}
