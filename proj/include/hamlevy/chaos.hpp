#ifndef HAMLEVY_CHAOS_HPP
#define HAMLEVY_CHAOS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "hamlevy/common.hpp"
#include "hamlevy/kernels.hpp"
#include "hamlevy/levy_noise.hpp"
#include "hamlevy/quadrature.hpp"
#include "hamlevy/rng.hpp"

namespace hamlevy {

// ---------------------------------------------------------------------------
// Finite measure space with positive cell masses; tensors are dense arrays
// over cell tuples.  Caps: rank <= 6, cells <= 8.
// ---------------------------------------------------------------------------

struct DiscreteSpace {
    std::vector<double> mass;

    explicit DiscreteSpace(std::vector<double> m) : mass(std::move(m)) {
        if (mass.empty() || mass.size() > 8)
            throw DomainError("DiscreteSpace: need 1..8 cells");
        for (double v : mass)
            if (!(v > 0.0) || !std::isfinite(v))
                throw DomainError("DiscreteSpace: masses must be positive and finite");
    }

    std::size_t cells() const { return mass.size(); }

    std::vector<std::size_t> sample_counts(Rng& rng) const {
        std::vector<std::size_t> counts(mass.size());
        for (std::size_t c = 0; c < mass.size(); ++c)
            counts[c] = rng.poisson(mass[c]);
        return counts;
    }
};

class Tensor {
  public:
    Tensor(std::size_t rank, std::size_t cells)
        : rank_(rank), cells_(cells) {
        if (rank > 6) throw DomainError("Tensor: rank capped at 6");
        std::size_t n = 1;
        for (std::size_t i = 0; i < rank; ++i) n *= cells;
        v_.assign(std::max<std::size_t>(n, 1), 0.0);
    }

    std::size_t rank() const { return rank_; }
    std::size_t cells() const { return cells_; }
    std::size_t size() const { return v_.size(); }

    double& operator[](std::size_t flat) { return v_[flat]; }
    double operator[](std::size_t flat) const { return v_[flat]; }

    double& at(const std::vector<std::size_t>& idx) { return v_[flatten(idx)]; }
    double at(const std::vector<std::size_t>& idx) const { return v_[flatten(idx)]; }

    std::size_t flatten(const std::vector<std::size_t>& idx) const {
        std::size_t f = 0;
        for (std::size_t i = 0; i < rank_; ++i) f = f * cells_ + idx[i];
        return f;
    }

    void unflatten(std::size_t f, std::vector<std::size_t>& idx) const {
        idx.resize(rank_);
        for (std::size_t i = rank_; i-- > 0;) {
            idx[i] = f % cells_;
            f /= cells_;
        }
    }

    bool vanishes_on_diagonals(double tol = 0.0) const {
        if (rank_ < 2) return true;
        std::vector<std::size_t> idx;
        for (std::size_t f = 0; f < v_.size(); ++f) {
            if (v_[f] == 0.0) continue;
            unflatten(f, idx);
            for (std::size_t i = 0; i < rank_; ++i)
                for (std::size_t j = i + 1; j < rank_; ++j)
                    if (idx[i] == idx[j] && std::abs(v_[f]) > tol) return false;
        }
        return true;
    }

    // zero out entries with any repeated index
    Tensor masked_offdiagonal() const {
        Tensor out = *this;
        if (rank_ < 2) return out;
        std::vector<std::size_t> idx;
        for (std::size_t f = 0; f < v_.size(); ++f) {
            out.unflatten(f, idx);
            for (std::size_t i = 0; i < rank_ && out[f] != 0.0; ++i)
                for (std::size_t j = i + 1; j < rank_; ++j)
                    if (idx[i] == idx[j]) {
                        out[f] = 0.0;
                        break;
                    }
        }
        return out;
    }

    // ||f||^2_{H^{otimes n}} = sum f^2 prod m(c_i)
    double norm_sq(const DiscreteSpace& space) const {
        std::vector<std::size_t> idx;
        KahanSum acc;
        for (std::size_t f = 0; f < v_.size(); ++f) {
            if (v_[f] == 0.0) continue;
            unflatten(f, idx);
            double w = v_[f] * v_[f];
            for (std::size_t i = 0; i < rank_; ++i) w *= space.mass[idx[i]];
            acc.add(w);
        }
        return acc.value();
    }

    double inner(const DiscreteSpace& space, const Tensor& other) const {
        if (other.rank_ != rank_ || other.cells_ != cells_)
            throw DomainError("Tensor::inner: shape mismatch");
        std::vector<std::size_t> idx;
        KahanSum acc;
        for (std::size_t f = 0; f < v_.size(); ++f) {
            const double p = v_[f] * other.v_[f];
            if (p == 0.0) continue;
            unflatten(f, idx);
            double w = p;
            for (std::size_t i = 0; i < rank_; ++i) w *= space.mass[idx[i]];
            acc.add(w);
        }
        return acc.value();
    }

    double max_abs_diff(const Tensor& other) const {
        double m = 0.0;
        for (std::size_t f = 0; f < v_.size(); ++f)
            m = std::max(m, std::abs(v_[f] - other.v_[f]));
        return m;
    }

  private:
    std::size_t rank_, cells_;
    std::vector<double> v_;
};

// average over all argument permutations
inline Tensor symmetrize(const Tensor& f) {
    const std::size_t n = f.rank();
    if (n <= 1) return f;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Tensor out(n, f.cells());
    std::vector<std::size_t> idx, pidx(n);
    double nfact = 1.0;
    for (std::size_t i = 2; i <= n; ++i) nfact *= static_cast<double>(i);
    do {
        for (std::size_t fl = 0; fl < f.size(); ++fl) {
            out.unflatten(fl, idx);
            for (std::size_t i = 0; i < n; ++i) pidx[i] = idx[perm[i]];
            out[fl] += f.at(pidx);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (std::size_t fl = 0; fl < out.size(); ++fl) out[fl] /= nfact;
    return out;
}

// Modified contraction f *_k^l g: l shared arguments integrated against the
// measure, k-l shared arguments identified, the rest free.  Output argument
// order: (gamma_1..gamma_{k-l}, x_1..x_{n-k}, x'_1..x'_{m-k}).
inline Tensor contraction(const DiscreteSpace& space, const Tensor& f,
                          const Tensor& g, std::size_t k, std::size_t l) {
    const std::size_t n = f.rank(), m = g.rank();
    if (f.cells() != g.cells() || f.cells() != space.cells())
        throw DomainError("contraction: cell mismatch");
    if (!(l <= k && k <= std::min(n, m)))
        throw DomainError("contraction: need 0 <= l <= k <= min(n,m)");
    const std::size_t out_rank = n + m - k - l;
    Tensor out(out_rank, space.cells());
    const std::size_t cells = space.cells();

    std::vector<std::size_t> oidx, fidx(n), gidx(m), z(l);
    for (std::size_t fl = 0; fl < out.size(); ++fl) {
        out.unflatten(fl, oidx);
        // shared identified args
        for (std::size_t i = 0; i < k - l; ++i) {
            fidx[l + i] = oidx[i];
            gidx[l + i] = oidx[i];
        }
        for (std::size_t i = 0; i < n - k; ++i) fidx[k + i] = oidx[(k - l) + i];
        for (std::size_t i = 0; i < m - k; ++i)
            gidx[k + i] = oidx[(k - l) + (n - k) + i];
        // integrate the first l shared slots
        KahanSum acc;
        std::fill(z.begin(), z.end(), 0);
        while (true) {
            double w = 1.0;
            for (std::size_t i = 0; i < l; ++i) {
                fidx[i] = z[i];
                gidx[i] = z[i];
                w *= space.mass[z[i]];
            }
            acc.add(w * f.at(fidx) * g.at(gidx));
            // advance the multi-index
            std::size_t pos = 0;
            for (; pos < l; ++pos) {
                if (++z[pos] < cells) break;
                z[pos] = 0;
            }
            if (pos == l) break;
            if (l == 0) break;
        }
        out[fl] = acc.value();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multiple Poisson integral on the finite space via the factorial-measure
// expansion:
//   I_n(f) = sum_{k=0}^n (-1)^{n-k} C(n,k) int f(x, y) N^{(k)}(dx) m^{n-k}(dy)
// with N^{(k)} the factorial measure (falling factorials of the cell counts).
// The measure marginals are precomputed so a draw costs O(cells^n).
// ---------------------------------------------------------------------------

class MultipleIntegral {
  public:
    MultipleIntegral(const DiscreteSpace& space, const Tensor& f,
                     bool require_offdiagonal = true)
        : space_(space), n_(f.rank()) {
        if (require_offdiagonal && !f.vanishes_on_diagonals())
            throw DomainError(
                "multiple_integral: kernel must vanish on diagonals "
                "(mask it first)");
        const Tensor fs = symmetrize(f);
        // marg_[k](c_1..c_k) = sum_d fs(c, d) prod m(d_j)
        marg_.reserve(n_ + 1);
        for (std::size_t k = 0; k <= n_; ++k) {
            Tensor mk(k, space.cells());
            std::vector<std::size_t> oidx, fidx(n_);
            for (std::size_t fl = 0; fl < mk.size(); ++fl) {
                mk.unflatten(fl, oidx);
                for (std::size_t i = 0; i < k; ++i) fidx[i] = oidx[i];
                mk[fl] = integrate_tail(fs, fidx, k);
            }
            marg_.push_back(std::move(mk));
        }
    }

    std::size_t rank() const { return n_; }

    double operator()(const std::vector<std::size_t>& counts) const {
        if (counts.size() != space_.cells())
            throw DomainError("MultipleIntegral: counts size mismatch");
        double total = 0.0;
        double binom = 1.0;  // C(n, k)
        for (std::size_t k = 0; k <= n_; ++k) {
            if (k > 0)
                binom = binom * static_cast<double>(n_ - k + 1) /
                        static_cast<double>(k);
            const double sign = ((n_ - k) % 2 == 0) ? 1.0 : -1.0;
            total += sign * binom * factorial_sum(k, counts);
        }
        return total;
    }

  private:
    double integrate_tail(const Tensor& fs, std::vector<std::size_t>& fidx,
                          std::size_t k) const {
        const std::size_t tail = n_ - k;
        const std::size_t cells = space_.cells();
        std::vector<std::size_t> d(tail, 0);
        KahanSum acc;
        while (true) {
            double w = 1.0;
            for (std::size_t i = 0; i < tail; ++i) {
                fidx[k + i] = d[i];
                w *= space_.mass[d[i]];
            }
            acc.add(w * fs.at(fidx));
            std::size_t pos = 0;
            for (; pos < tail; ++pos) {
                if (++d[pos] < cells) break;
                d[pos] = 0;
            }
            if (pos == tail || tail == 0) break;
        }
        return acc.value();
    }

    // sum over ordered k-tuples of distinct atoms, i.e. falling factorials of
    // the counts grouped by repeated cells
    double factorial_sum(std::size_t k, const std::vector<std::size_t>& counts) const {
        const Tensor& mk = marg_[k];
        if (k == 0) return mk[0];
        const std::size_t cells = space_.cells();
        std::vector<std::size_t> idx(k, 0);
        std::vector<std::size_t> used(cells);
        KahanSum acc;
        while (true) {
            const double val = mk.at(idx);
            if (val != 0.0) {
                std::fill(used.begin(), used.end(), 0);
                double w = 1.0;
                for (std::size_t i = 0; i < k; ++i) {
                    const std::size_t c = idx[i];
                    w *= static_cast<double>(counts[c]) - static_cast<double>(used[c]);
                    ++used[c];
                }
                if (w != 0.0) acc.add(val * w);
            }
            std::size_t pos = 0;
            for (; pos < k; ++pos) {
                if (++idx[pos] < cells) break;
                idx[pos] = 0;
            }
            if (pos == k) break;
        }
        return acc.value();
    }

    DiscreteSpace space_;
    std::size_t n_;
    std::vector<Tensor> marg_;
};

// one-shot evaluation (public path: rejects diagonal-supported kernels)
inline double multiple_integral(const DiscreteSpace& space,
                                const std::vector<std::size_t>& counts,
                                const Tensor& f) {
    return MultipleIntegral(space, f)(counts);
}

// ---------------------------------------------------------------------------
// Product formula check: I_n(f) I_m(g) against the contraction expansion,
// realization by realization.
// ---------------------------------------------------------------------------

struct ProductFormulaReport {
    double max_abs_discrepancy = 0.0;
    double max_scale = 0.0;  // largest |LHS| seen, for relative judgement
    std::size_t draws = 0;
};

inline ProductFormulaReport product_formula_check(const DiscreteSpace& space,
                                                  const Tensor& f, const Tensor& g,
                                                  std::size_t draws, Rng& rng) {
    const std::size_t n = f.rank(), m = g.rank();
    const Tensor fs = symmetrize(f), gs = symmetrize(g);
    MultipleIntegral If(space, fs, false), Ig(space, gs, false);

    struct Term {
        double coeff;
        MultipleIntegral integral;
    };
    std::vector<Term> rhs;
    auto binom = [](std::size_t a, std::size_t b) {
        double r = 1.0;
        for (std::size_t i = 0; i < b; ++i)
            r = r * static_cast<double>(a - i) / static_cast<double>(i + 1);
        return r;
    };
    for (std::size_t k = 0; k <= std::min(n, m); ++k) {
        double kfact = 1.0;
        for (std::size_t i = 2; i <= k; ++i) kfact *= static_cast<double>(i);
        const double base = kfact * binom(n, k) * binom(m, k);
        for (std::size_t l = 0; l <= k; ++l) {
            Tensor c = contraction(space, fs, gs, k, l);
            rhs.push_back(Term{base * binom(k, l), MultipleIntegral(space, c, false)});
        }
    }

    ProductFormulaReport rep;
    rep.draws = draws;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto counts = space.sample_counts(rng);
        const double lhs = If(counts) * Ig(counts);
        double r = 0.0;
        for (const auto& term : rhs) r += term.coeff * term.integral(counts);
        rep.max_abs_discrepancy = std::max(rep.max_abs_discrepancy, std::abs(lhs - r));
        rep.max_scale = std::max(rep.max_scale, std::abs(lhs));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// q_t = int_0^t || G_s * k ||_{H_0}^2-type integral, three routes
// ---------------------------------------------------------------------------

// spatial route: q_t = 1/4 int_0^t int f(w) (2s - |w|)_+ dw ds
inline double q_t_spatial(const CovarianceKernel& f, double t) {
    return adaptive_simpson(
        [&](double s) {
            if (!(s > 0.0)) return 0.0;
            // int_{-2s}^{2s} f(w)(2s-|w|) dw = 2 int_0^{2s} f(w)(2s-w) dw,
            // exact in f through its antiderivatives
            const double a = 2.0 * s;
            const std::size_t cells = 256;
            const double h = a / static_cast<double>(cells);
            KahanSum acc;
            for (std::size_t i = 0; i < cells; ++i) {
                const double lo = static_cast<double>(i) * h;
                const double hi = lo + h;
                const double mass = f.segment_mass(lo, hi);
                acc.add(mass * (a - 0.5 * (lo + hi)));
            }
            return 0.5 * acc.value();
        },
        0.0, t, 1e-11);
}

// spectral route: q_t = int_R (t/2 - sin(2 t xi)/(4 xi)) / xi^2 mu(dxi)
inline double q_t_spectral(const KernelSpec& kernel, double t) {
    auto time_factor = [t](double xi) {
        const double u = t * xi;
        if (std::abs(u) < 1e-4) {
            // series: t^3/3 - t^5 xi^2 /  7.5 ...
            return t * t * t * (1.0 / 3.0 - u * u / 7.5);
        }
        return (0.5 * t - std::sin(2.0 * t * xi) / (4.0 * xi)) / (xi * xi);
    };
    const CovarianceKernel f = covariance_kernel(kernel);
    auto integrand = [&](double xi) { return time_factor(xi) * f.mu_density(xi); };
    if (kernel.is_riesz()) {
        const double a = kernel.alpha;
        const double e = 1.0 / (1.0 - a);
        double v = 2.0 * adaptive_simpson(
                           [&](double u) {
                               if (!(u > 0.0)) return 0.0;
                               const double xi = std::pow(u, e);
                               return integrand(xi) * e * std::pow(u, e - 1.0);
                           },
                           0.0, 1.0, 1e-11);
        v += 2.0 * adaptive_simpson(integrand, 1.0, 1e4, 1e-11);
        return v;
    }
    return 2.0 * adaptive_simpson(integrand, 1e-12, 80.0, 1e-12);
}

// closed form in the Riesz case: q_t = C_{1,alpha} 2^{alpha+1} t^{alpha+2} /
// (2 alpha (alpha+1) (alpha+2))
inline double q_t_riesz_closed(double alpha, double t) {
    return riesz_constant(alpha) * std::pow(2.0, alpha + 1.0) *
           std::pow(t, alpha + 2.0) /
           (2.0 * alpha * (alpha + 1.0) * (alpha + 2.0));
}

// ---------------------------------------------------------------------------
// Deterministic truncated second moment of u(t,x):
//   E|u(t,x)|^2 ~ 1 + sum_{n=1}^{n_max} m2^n ||f_n(.,t,x)||^2_{H_0^{otimes n}}
// evaluated by nested Gauss-Legendre over the time simplex with a 2-D
// box-filter chain for the paired spatial integrals.
// ---------------------------------------------------------------------------

struct ChaosMoment {
    double value = 0.0;
    double remainder_bound = 0.0;
    std::vector<double> terms;  // term n at index n (term 0 = 1)
};

// int_0^u int_0^v f(w) dw dv, closed form where available; F2'' = f
inline double covariance_second_antiderivative(const CovarianceKernel& f, double u) {
    const double au = std::abs(u);
    if (f.source.is_riesz()) {
        const double a = f.source.alpha;
        return riesz_constant(a) * std::pow(au, a + 1.0) / (a * (a + 1.0));
    }
    if (f.source.shape == IntegrableShape::Gaussian)
        return 0.5 * au * std::erf(0.5 * au) +
               (std::exp(-0.25 * au * au) - 1.0) / std::sqrt(M_PI);
    return adaptive_simpson([&](double s) { return f.antiderivative(s); }, 0.0, au,
                            1e-12);
}

class TruncatedSecondMoment {
  public:
    TruncatedSecondMoment(const KernelSpec& kernel, double m2, double t,
                          std::size_t n_max, std::size_t grid_cells = 128,
                          std::size_t gauss_nodes = 16)
        : f_(covariance_kernel(kernel)), m2_(m2), t_(t), n_max_(n_max),
          ng_(grid_cells), h_(2.0 * t / static_cast<double>(grid_cells)) {
        if (n_max > 4)
            throw DomainError("truncated_second_moment: n_max capped at 4");
        rule_ = gauss_legendre(gauss_nodes);
        // cell-average of f in the pair difference w = y - y~ against the
        // triangular cell-overlap window, exact through the Riesz singularity
        fbar_.resize(2 * ng_ - 1);
        for (std::size_t d = 0; d < fbar_.size(); ++d) {
            const double w =
                (static_cast<double>(d) - static_cast<double>(ng_) + 1.0) * h_;
            const double f2p = covariance_second_antiderivative(f_, w + h_);
            const double f2m = covariance_second_antiderivative(f_, w - h_);
            const double f20 = covariance_second_antiderivative(f_, w);
            fbar_[d] = (f2p - 2.0 * f20 + f2m) / (h_ * h_);
        }
    }

    ChaosMoment compute() const {
        ChaosMoment out;
        out.terms.assign(n_max_ + 1, 0.0);
        out.terms[0] = 1.0;
        for (std::size_t n = 1; n <= n_max_; ++n)
            out.terms[n] = std::pow(m2_, static_cast<double>(n)) * chain_term(n);
        out.value = 0.0;
        for (double v : out.terms) out.value += v;
        if (n_max_ >= 1) {
            const double last = out.terms[n_max_];
            const double prev = n_max_ >= 2 ? out.terms[n_max_ - 1] : 1.0;
            const double rho = prev > 0.0 ? std::min(last / prev, 0.9) : 0.5;
            out.remainder_bound = last * rho / (1.0 - rho);
        }
        return out;
    }

  private:
    using Grid = std::vector<double>;  // ng x ng cell-centered

    // int over the ordered simplex 0 < s_1 < ... < s_n < t of the box chain
    double chain_term(std::size_t n) const {
        Grid state(ng_ * ng_);
        return layer(1, n, 0.0, state);
    }

    double center(std::size_t i) const {
        return -t_ + (static_cast<double>(i) + 0.5) * h_;
    }

    double fbar_at(std::size_t i, std::size_t j2) const {
        return fbar_[i + ng_ - 1 - j2];
    }

    double layer(std::size_t j, std::size_t n, double s_prev, Grid& state) const {
        KahanSum acc;
        const double mid = 0.5 * (s_prev + t_);
        const double half = 0.5 * (t_ - s_prev);
        Grid next(ng_ * ng_);
        for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
            const double s = mid + half * rule_.nodes[q];
            if (j == 1)
                init_state(s, next);
            else
                advance_state(state, s - s_prev, next);
            double value;
            if (j == n) {
                KahanSum tot;
                for (double v : next) tot.add(v);
                value = tot.value() * h_ * h_;
            } else {
                value = layer(j + 1, n, s, next);
            }
            acc.add(rule_.weights[q] * value);
        }
        return half * acc.value();
    }

    // Phi_1(y,y~|s) = 1/4 1{|y|<s} 1{|y~|<s} fbar(y-y~), cones clipped per cell
    void init_state(double s, Grid& out) const {
        for (std::size_t i = 0; i < ng_; ++i) {
            const double yi = center(i);
            const double ci = overlap(yi - 0.5 * h_, yi + 0.5 * h_, s) / h_;
            for (std::size_t j2 = 0; j2 < ng_; ++j2) {
                const double yj = center(j2);
                const double cj = overlap(yj - 0.5 * h_, yj + 0.5 * h_, s) / h_;
                out[i * ng_ + j2] = 0.25 * ci * cj * fbar_at(i, j2);
            }
        }
    }

    // Phi_{j+1} = 1/4 fbar . Box_c[Phi_j], the double interval integral via
    // 2-D prefix sums with bilinear fractional edges
    void advance_state(const Grid& in, double c, Grid& out) const {
        const auto n = ng_;
        prefix_.assign((n + 1) * (n + 1), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j2 = 0; j2 < n; ++j2) {
                row += in[i * n + j2];
                prefix_[(i + 1) * (n + 1) + (j2 + 1)] =
                    prefix_[i * (n + 1) + (j2 + 1)] + row;
            }
        }
        auto P = [&](double a, double b) {
            const double ua = std::clamp((a + t_) / h_, 0.0, static_cast<double>(n));
            const double ub = std::clamp((b + t_) / h_, 0.0, static_cast<double>(n));
            const auto ia = static_cast<std::size_t>(ua);
            const auto ib = static_cast<std::size_t>(ub);
            const double fa = ua - static_cast<double>(ia);
            const double fb = ub - static_cast<double>(ib);
            auto pf = [&](std::size_t i, std::size_t j2) {
                return prefix_[std::min(i, n) * (n + 1) + std::min(j2, n)];
            };
            return pf(ia, ib) * (1 - fa) * (1 - fb) + pf(ia + 1, ib) * fa * (1 - fb) +
                   pf(ia, ib + 1) * (1 - fa) * fb + pf(ia + 1, ib + 1) * fa * fb;
        };
        for (std::size_t i = 0; i < n; ++i) {
            const double yi = center(i);
            for (std::size_t j2 = 0; j2 < n; ++j2) {
                const double yj = center(j2);
                const double b = (P(yi + c, yj + c) - P(yi - c, yj + c) -
                                  P(yi + c, yj - c) + P(yi - c, yj - c)) *
                                 h_ * h_;
                out[i * n + j2] = 0.25 * b * fbar_at(i, j2);
            }
        }
    }

    static double overlap(double lo, double hi, double s) {
        const double a = std::max(lo, -s);
        const double b = std::min(hi, s);
        return b > a ? b - a : 0.0;
    }

    CovarianceKernel f_;
    double m2_, t_;
    std::size_t n_max_, ng_;
    double h_;
    GaussRule rule_;
    std::vector<double> fbar_;
    mutable Grid prefix_;
};

inline ChaosMoment truncated_second_moment(const KernelSpec& kernel, double m2,
                                           double t, std::size_t n_max,
                                           std::size_t grid_cells = 128,
                                           std::size_t gauss_nodes = 16) {
    return TruncatedSecondMoment(kernel, m2, t, n_max, grid_cells, gauss_nodes)
        .compute();
}

// The Gaussian comparison model shares the quadrature by construction: the
// truncation for sqrt(m2)-scaled Gaussian noise is the same code path.
inline ChaosMoment gaussian_truncated_second_moment(const KernelSpec& kernel,
                                                    double m2, double t,
                                                    std::size_t n_max,
                                                    std::size_t grid_cells = 128,
                                                    std::size_t gauss_nodes = 16) {
    return truncated_second_moment(kernel, m2, t, n_max, grid_cells, gauss_nodes);
}

}  // namespace hamlevy

#endif
