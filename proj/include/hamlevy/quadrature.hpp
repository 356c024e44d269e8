#ifndef HAMLEVY_QUADRATURE_HPP
#define HAMLEVY_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hamlevy {

// Neumaier compensated accumulator; reductions elsewhere rely on it so that
// merge order only matters at the level of the compensation term.
class KahanSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct GaussRule {
    std::vector<double> nodes;    // on (-1,1)
    std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n.
inline GaussRule gauss_legendre(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

template <typename F>
double gauss_integrate(const GaussRule& rule, double a, double b, F&& f) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    KahanSum acc;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
    return half * acc.value();
}

namespace detail {
template <typename F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-10,
                        int max_depth = 40) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Uniform sample grid x_i = lo + i*step, i in [0, n)
struct SampledFunction {
    double lo = 0.0;
    double step = 0.0;
    std::vector<double> values;

    double hi() const { return lo + step * (values.empty() ? 0 : values.size() - 1); }

    double interp(double x) const {
        if (values.empty()) return 0.0;
        const double u = (x - lo) / step;
        if (u <= 0.0) return values.front();
        const auto n = values.size();
        if (u >= static_cast<double>(n - 1)) return values.back();
        const auto i = static_cast<std::size_t>(u);
        const double frac = u - static_cast<double>(i);
        return values[i] * (1.0 - frac) + values[i + 1] * frac;
    }

    // trapezoid over the whole grid
    double integral() const {
        if (values.size() < 2) return 0.0;
        KahanSum acc;
        acc.add(0.5 * values.front());
        for (std::size_t i = 1; i + 1 < values.size(); ++i) acc.add(values[i]);
        acc.add(0.5 * values.back());
        return acc.value() * step;
    }
};

}  // namespace hamlevy

#endif
