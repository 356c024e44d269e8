#ifndef HAMLEVY_LEVY_NOISE_HPP
#define HAMLEVY_LEVY_NOISE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hamlevy/common.hpp"
#include "hamlevy/quadrature.hpp"
#include "hamlevy/rng.hpp"

namespace hamlevy {

// ---------------------------------------------------------------------------
// Finite-activity jump-size law: nu = lambda * Law(Z)
// ---------------------------------------------------------------------------

enum class JumpLaw { Rademacher, Uniform, TwoPoint };

struct LevyMeasureSpec {
    JumpLaw law = JumpLaw::Rademacher;
    double lambda = 1.0;

    // Uniform: Z ~ U[-a, a]
    double uniform_halfwidth = 1.0;

    // TwoPoint: Z = z1 w.p. prob1, else z2
    double z1 = 1.0, z2 = -1.0, prob1 = 0.5;

    static LevyMeasureSpec rademacher(double lambda = 1.0) {
        LevyMeasureSpec s;
        s.law = JumpLaw::Rademacher;
        s.lambda = lambda;
        return s;
    }

    static LevyMeasureSpec uniform(double a, double lambda = 1.0) {
        if (!(a > 0.0)) throw ConfigError("uniform jump law: need a > 0");
        LevyMeasureSpec s;
        s.law = JumpLaw::Uniform;
        s.lambda = lambda;
        s.uniform_halfwidth = a;
        return s;
    }

    static LevyMeasureSpec two_point(double prob1, double z1, double z2,
                                     double lambda = 1.0) {
        if (!(prob1 > 0.0 && prob1 < 1.0))
            throw ConfigError("two-point jump law: prob must lie in (0,1)");
        if (z1 == 0.0 || z2 == 0.0)
            throw ConfigError("two-point jump law: jump sizes must be nonzero");
        LevyMeasureSpec s;
        s.law = JumpLaw::TwoPoint;
        s.lambda = lambda;
        s.prob1 = prob1;
        s.z1 = z1;
        s.z2 = z2;
        return s;
    }

    // values a w.p. p and -b w.p. 1-p, with p*a = (1-p)*b enforced
    static LevyMeasureSpec centered_two_point(double p, double a, double b,
                                              double lambda = 1.0) {
        if (!(a > 0.0 && b > 0.0))
            throw ConfigError("centered-two-point: need a, b > 0");
        auto s = two_point(p, a, -b, lambda);
        if (std::abs(p * a - (1.0 - p) * b) > 1e-12 * (a + b))
            throw ConfigError("centered-two-point: p*a != (1-p)*b, law is not centered");
        return s;
    }

    // m_1 = lambda E[Z]
    double mean() const {
        switch (law) {
            case JumpLaw::Rademacher: return 0.0;
            case JumpLaw::Uniform: return 0.0;
            case JumpLaw::TwoPoint:
                return lambda * (prob1 * z1 + (1.0 - prob1) * z2);
        }
        return 0.0;
    }

    // m_p = lambda E|Z|^p, closed form for every preset
    double moment(double p) const {
        if (!(p >= 0.0)) throw DomainError("LevyMeasureSpec::moment: p >= 0");
        switch (law) {
            case JumpLaw::Rademacher:
                return lambda;
            case JumpLaw::Uniform:
                return lambda * std::pow(uniform_halfwidth, p) / (p + 1.0);
            case JumpLaw::TwoPoint:
                return lambda * (prob1 * std::pow(std::abs(z1), p) +
                                 (1.0 - prob1) * std::pow(std::abs(z2), p));
        }
        return 0.0;
    }

    double m2() const { return moment(2.0); }

    bool centered() const { return mean() == 0.0; }

    double sample_jump(Rng& rng) const {
        switch (law) {
            case JumpLaw::Rademacher:
                return rng.uniform_01() <= 0.5 ? 1.0 : -1.0;
            case JumpLaw::Uniform: {
                double z = rng.uniform(-uniform_halfwidth, uniform_halfwidth);
                while (z == 0.0) z = rng.uniform(-uniform_halfwidth, uniform_halfwidth);
                return z;
            }
            case JumpLaw::TwoPoint:
                return rng.uniform_01() <= prob1 ? z1 : z2;
        }
        return 0.0;
    }

    // E_nu[g(z)] = lambda E[g(Z)]; exact for the two-point laws, Gauss-Legendre
    // against the uniform density otherwise.
    template <typename G>
    double nu_expectation(G&& g) const {
        switch (law) {
            case JumpLaw::Rademacher:
                return lambda * 0.5 * (g(1.0) + g(-1.0));
            case JumpLaw::TwoPoint:
                return lambda * (prob1 * g(z1) + (1.0 - prob1) * g(z2));
            case JumpLaw::Uniform: {
                static const GaussRule rule = gauss_legendre(32);
                const double a = uniform_halfwidth;
                return lambda *
                       gauss_integrate(rule, -a, a, [&](double z) { return g(z); }) /
                       (2.0 * a);
            }
        }
        return 0.0;
    }

    std::string name() const {
        switch (law) {
            case JumpLaw::Rademacher: return "rademacher";
            case JumpLaw::Uniform:
                return "uniform(" + std::to_string(uniform_halfwidth) + ")";
            case JumpLaw::TwoPoint:
                return "two-point(" + std::to_string(prob1) + "," +
                       std::to_string(z1) + "," + std::to_string(z2) + ")";
        }
        return "?";
    }
};

// ---------------------------------------------------------------------------
// One realization of the Poisson random measure on (0,T] x [-L,L] x R_0
// ---------------------------------------------------------------------------

struct Atom {
    double t;  // in (0, T]
    double x;  // in [-L, L]
    double z;  // jump size, nonzero
};

struct AtomCloud {
    double T = 0.0;
    double L = 0.0;
    std::vector<Atom> atoms;  // sorted by (t, x, z)
};

inline AtomCloud sample_atoms(const LevyMeasureSpec& spec, double T, double L,
                              Rng& rng, std::uint64_t atom_budget = 20000000ull) {
    if (!(T > 0.0) || !(L > 0.0))
        throw DomainError("sample_atoms: need T > 0 and L > 0");
    if (spec.lambda < 0.0) throw DomainError("sample_atoms: lambda >= 0");
    const double mean = spec.lambda * T * 2.0 * L;
    if (mean > static_cast<double>(atom_budget))
        throw ResourceError("sample_atoms: expected atom count " +
                            std::to_string(mean) + " exceeds budget " +
                            std::to_string(atom_budget));
    AtomCloud cloud;
    cloud.T = T;
    cloud.L = L;
    const std::uint64_t n = rng.poisson(mean);
    if (n > atom_budget)
        throw ResourceError("sample_atoms: sampled atom count exceeds budget");
    cloud.atoms.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Atom a;
        a.t = T * rng.uniform_01();  // in (0, T]
        a.x = rng.uniform(-L, L);
        a.z = spec.sample_jump(rng);
        cloud.atoms.push_back(a);
    }
    std::sort(cloud.atoms.begin(), cloud.atoms.end(),
              [](const Atom& a, const Atom& b) {
                  if (a.t != b.t) return a.t < b.t;
                  if (a.x != b.x) return a.x < b.x;
                  return a.z < b.z;
              });
    return cloud;
}

// ---------------------------------------------------------------------------
// Compensated noise integral  L(phi) = sum phi(tau_i, xi_i) z_i - m1 int phi
// ---------------------------------------------------------------------------

template <typename Phi>
double levy_integral(const AtomCloud& cloud, const LevyMeasureSpec& spec,
                     Phi&& phi, std::size_t nt = 256, std::size_t nx = 1024) {
    KahanSum acc;
    for (const Atom& a : cloud.atoms) acc.add(phi(a.t, a.x) * a.z);
    const double m1 = spec.mean();
    if (m1 != 0.0) {
        // midpoint compensator over the window
        KahanSum comp;
        const double dt = cloud.T / static_cast<double>(nt);
        const double dx = 2.0 * cloud.L / static_cast<double>(nx);
        for (std::size_t i = 0; i < nt; ++i) {
            const double t = (static_cast<double>(i) + 0.5) * dt;
            for (std::size_t j = 0; j < nx; ++j) {
                const double x = -cloud.L + (static_cast<double>(j) + 0.5) * dx;
                comp.add(phi(t, x));
            }
        }
        acc.add(-m1 * comp.value() * dt * dx);
    }
    return acc.value();
}

}  // namespace hamlevy

#endif
