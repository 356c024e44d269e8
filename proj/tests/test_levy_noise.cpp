#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hamlevy/levy_noise.hpp"
#include "hamlevy/stats.hpp"

using namespace hamlevy;

TEST_CASE("jump law presets", "[levy]") {
    SECTION("rademacher has unit moments of every order") {
        auto nu = LevyMeasureSpec::rademacher();
        for (double p : {0.5, 1.0, 2.0, 3.0, 4.0, 7.5})
            CHECK_THAT(nu.moment(p), Catch::Matchers::WithinRel(1.0, 1e-14));
        CHECK(nu.mean() == 0.0);
    }
    SECTION("uniform moments") {
        auto nu = LevyMeasureSpec::uniform(2.0, 3.0);
        // m_p = lambda a^p/(p+1)
        CHECK_THAT(nu.moment(2.0), Catch::Matchers::WithinRel(3.0 * 4.0 / 3.0, 1e-13));
        CHECK(nu.mean() == 0.0);
    }
    SECTION("centered two-point enforces centering") {
        auto nu = LevyMeasureSpec::centered_two_point(0.25, 3.0, 1.0);
        CHECK_THAT(nu.mean(), Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(nu.moment(2.0),
                   Catch::Matchers::WithinRel(0.25 * 9.0 + 0.75 * 1.0, 1e-13));
        CHECK_THROWS_AS(LevyMeasureSpec::centered_two_point(0.5, 3.0, 1.0),
                        ConfigError);
    }
    SECTION("uncentered two-point reports its drift") {
        auto nu = LevyMeasureSpec::two_point(0.5, 2.0, -1.0);
        CHECK_THAT(nu.mean(), Catch::Matchers::WithinRel(0.5, 1e-13));
    }
    SECTION("nu expectations in closed form") {
        auto nu = LevyMeasureSpec::centered_two_point(0.25, 3.0, 1.0);
        const double got = nu.nu_expectation([](double z) { return z * z; });
        CHECK_THAT(got, Catch::Matchers::WithinRel(nu.moment(2.0), 1e-12));
        auto uni = LevyMeasureSpec::uniform(1.0);
        CHECK_THAT(uni.nu_expectation([](double z) { return z * z; }),
                   Catch::Matchers::WithinRel(uni.moment(2.0), 1e-9));
    }
}

TEST_CASE("atom cloud sampling", "[levy]") {
    SECTION("lambda = 0 gives the empty cloud") {
        auto nu = LevyMeasureSpec::rademacher(0.0);
        Rng rng(1);
        auto cloud = sample_atoms(nu, 1.0, 50.0, rng);
        CHECK(cloud.atoms.empty());
    }
    SECTION("poisson counts: empirical mean within 3 sigma") {
        auto nu = LevyMeasureSpec::rademacher();
        const std::size_t draws = 10000;
        KahanSum total;
        for (std::size_t i = 0; i < draws; ++i) {
            Rng rng = make_stream(77, i);
            total.add(static_cast<double>(sample_atoms(nu, 1.0, 50.0, rng).atoms.size()));
        }
        const double mean = total.value() / draws;
        const double se = std::sqrt(100.0 / draws);
        CHECK(std::abs(mean - 100.0) <= 3.0 * se);
    }
    SECTION("window membership, ordering, rademacher jumps") {
        auto nu = LevyMeasureSpec::rademacher();
        Rng rng(9);
        auto cloud = sample_atoms(nu, 2.0, 10.0, rng);
        REQUIRE(cloud.atoms.size() > 10);
        for (std::size_t i = 0; i < cloud.atoms.size(); ++i) {
            const Atom& a = cloud.atoms[i];
            CHECK(a.t > 0.0);
            CHECK(a.t <= 2.0);
            CHECK(std::abs(a.x) <= 10.0);
            CHECK(std::abs(a.z) == 1.0);
            if (i > 0) CHECK(cloud.atoms[i - 1].t <= a.t);
        }
    }
    SECTION("identical seed gives a bit-identical cloud") {
        auto nu = LevyMeasureSpec::uniform(1.0);
        Rng a = make_stream(123, 7), b = make_stream(123, 7);
        auto ca = sample_atoms(nu, 1.0, 20.0, a);
        auto cb = sample_atoms(nu, 1.0, 20.0, b);
        REQUIRE(ca.atoms.size() == cb.atoms.size());
        for (std::size_t i = 0; i < ca.atoms.size(); ++i) {
            CHECK(ca.atoms[i].t == cb.atoms[i].t);
            CHECK(ca.atoms[i].x == cb.atoms[i].x);
            CHECK(ca.atoms[i].z == cb.atoms[i].z);
        }
    }
    SECTION("atom budget enforced") {
        auto nu = LevyMeasureSpec::rademacher(1e9);
        Rng rng(1);
        CHECK_THROWS_AS(sample_atoms(nu, 1.0, 1e6, rng), ResourceError);
    }
}

TEST_CASE("compensated noise integral", "[levy]") {
    SECTION("empty centered cloud integrates to zero") {
        AtomCloud cloud;
        cloud.T = 1.0;
        cloud.L = 1.0;
        auto nu = LevyMeasureSpec::rademacher();
        CHECK(levy_integral(cloud, nu, [](double, double) { return 1.0; }) == 0.0);
    }
    SECTION("single atom direct sum") {
        AtomCloud cloud;
        cloud.T = 1.0;
        cloud.L = 1.0;
        cloud.atoms = {Atom{0.5, 0.0, 2.0}};
        auto nu = LevyMeasureSpec::rademacher();
        CHECK(levy_integral(cloud, nu, [](double t, double) { return t; }) == 1.0);
    }
    SECTION("isometry: Var L(phi) = m2 ||phi||^2 within 3 sigma") {
        auto nu = LevyMeasureSpec::rademacher();
        struct Phi {
            const char* name;
            std::function<double(double, double)> fn;
            double norm_sq;  // over (0,1)x(-1,1)
        };
        const Phi phis[] = {
            {"indicator", [](double, double) { return 1.0; }, 2.0},
            {"t", [](double t, double) { return t; }, 2.0 / 3.0},
            {"x", [](double, double x) { return x; }, 2.0 / 3.0},
            {"tx", [](double t, double x) { return t * x; }, 2.0 / 9.0},
            {"cos", [](double t, double x) { return std::cos(t + x); },
             adaptive_simpson(
                 [](double t) {
                     return adaptive_simpson(
                         [t](double x) {
                             return std::cos(t + x) * std::cos(t + x);
                         },
                         -1.0, 1.0, 1e-12);
                 },
                 0.0, 1.0, 1e-10)},
        };
        const std::size_t n = 40000;
        for (const auto& phi : phis) {
            std::vector<double> vals(n);
            for (std::size_t i = 0; i < n; ++i) {
                Rng rng = make_stream(131, i);
                auto cloud = sample_atoms(nu, 1.0, 1.0, rng);
                vals[i] = levy_integral(cloud, nu, phi.fn);
            }
            const auto est = variance_with_se(vals);
            INFO(phi.name);
            CHECK(std::abs(est.value - phi.norm_sq) <= 3.0 * est.se);
            const double m = sample_mean(vals);
            CHECK(std::abs(m) <= 3.0 * mean_stderr(vals));
        }
    }
    SECTION("compensator removes the drift of an uncentered law") {
        auto nu = LevyMeasureSpec::two_point(0.5, 2.0, -1.0);  // m1 = 0.5
        const std::size_t n = 20000;
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(57, i);
            auto cloud = sample_atoms(nu, 1.0, 1.0, rng);
            vals[i] = levy_integral(cloud, nu,
                                    [](double t, double x) { return 1.0 + 0.0 * t * x; });
        }
        CHECK(std::abs(sample_mean(vals)) <= 3.0 * mean_stderr(vals));
    }
    SECTION("independence over disjoint time slabs") {
        auto nu = LevyMeasureSpec::rademacher();
        const std::size_t n = 20000;
        std::vector<double> prod(n);
        double m1 = 0, m2v = 0;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(41, i);
            auto cloud = sample_atoms(nu, 1.0, 1.0, rng);
            a[i] = levy_integral(cloud, nu, [](double t, double) {
                return t < 0.5 ? 1.0 : 0.0;
            });
            b[i] = levy_integral(cloud, nu, [](double t, double) {
                return t >= 0.5 ? 1.0 : 0.0;
            });
            prod[i] = a[i] * b[i];
            m1 += a[i];
            m2v += b[i];
        }
        const double cov =
            sample_mean(prod) - (m1 / n) * (m2v / n);
        CHECK(std::abs(cov) <= 3.0 * mean_stderr(prod));
    }
}
