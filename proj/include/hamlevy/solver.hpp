#ifndef HAMLEVY_SOLVER_HPP
#define HAMLEVY_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include "hamlevy/common.hpp"
#include "hamlevy/kernels.hpp"
#include "hamlevy/levy_noise.hpp"
#include "hamlevy/quadrature.hpp"
#include "hamlevy/rng.hpp"

namespace hamlevy {

enum class Scheme { EventDriven, Grid };

struct SolverConfig {
    Scheme scheme = Scheme::EventDriven;

    // grid scheme; the leapfrog stencil requires dt == dx
    double dx = 1.0 / 32.0;
    double dt = 1.0 / 32.0;

    // event-driven quadrature target; actual step is
    // min(target, a/8) for integrable kernels, min(target, trunc/2048) for Riesz
    double quad_step_target = 1.0 / 32.0;

    int picard_depth = 4;

    void validate() const {
        if (!(dx > 0.0 && dt > 0.0))
            throw ConfigError("SolverConfig: dt, dx must be positive");
        if (dt > dx + 1e-15)
            throw ConfigError("SolverConfig: grid scheme needs dt <= dx");
        if (!(quad_step_target > 0.0))
            throw ConfigError("SolverConfig: quadrature step must be positive");
        if (picard_depth < 1)
            throw ConfigError("SolverConfig: picard depth must be >= 1");
    }

    double event_step(const KernelSpec& kernel) const {
        if (kernel.is_riesz())
            return std::min(quad_step_target, kernel.truncation_radius / 2048.0);
        return std::min(quad_step_target, kernel.support_halfwidth / 8.0);
    }
};

// Deterministic forcing: constant 1 for u, z G_{t-r}(x-y) for the delta-velocity
// companion v.
struct SourceTerm {
    enum class Kind { Unit, Delta } kind = Kind::Unit;
    double r = 0.0, y = 0.0, z = 0.0;

    static SourceTerm unit() { return SourceTerm{}; }
    static SourceTerm delta(double r, double y, double z) {
        SourceTerm s;
        s.kind = Kind::Delta;
        s.r = r;
        s.y = y;
        s.z = z;
        return s;
    }

    double operator()(double t, double x) const {
        if (kind == Kind::Unit) return 1.0;
        if (!(t > r)) return 0.0;
        return std::abs(x - y) < t - r ? 0.5 * z : 0.0;
    }

    // atoms at or before this time are inert
    double start_time() const { return kind == Kind::Unit ? 0.0 : r; }
};

// ---------------------------------------------------------------------------
// Weight table against a kernel centered at `center`: node values plus exact
// per-cell kernel masses and their prefix sums, so a cone integral costs O(1)
// beyond its two partial end cells.
// ---------------------------------------------------------------------------

struct ConvTable {
    double lo = 0.0;
    double step = 0.0;
    double center = 0.0;
    std::vector<double> w;        // node values, size n+1 (n cells); empty = zero table
    std::vector<double> knode;    // K(node - center), kernel antiderivative per node
    std::vector<double> prefix;   // prefix[q] = sum_{<q} cellmass*wmid

    bool empty() const { return w.size() < 2; }
    double hi() const { return lo + step * (static_cast<double>(w.size()) - 1.0); }

    double node(std::size_t q) const { return lo + step * static_cast<double>(q); }

    double interp(double x) const {
        const double u = (x - lo) / step;
        if (u <= 0.0) return w.front();
        const auto n = w.size();
        if (u >= static_cast<double>(n - 1)) return w.back();
        const auto i = static_cast<std::size_t>(u);
        const double f = u - static_cast<double>(i);
        return w[i] * (1.0 - f) + w[i + 1] * f;
    }

    void build_prefix(const KernelSpec& kernel) {
        if (empty()) return;
        const std::size_t cells = w.size() - 1;
        knode.resize(cells + 1);
        for (std::size_t q = 0; q <= cells; ++q)
            knode[q] = kernel.antiderivative(node(q) - center);
        prefix.assign(cells + 1, 0.0);
        double run = 0.0;
        for (std::size_t q = 0; q < cells; ++q) {
            run += (knode[q + 1] - knode[q]) * 0.5 * (w[q] + w[q + 1]);
            prefix[q + 1] = run;
        }
    }

    // int G_c(x-y) k(y-center) w(y) dy
    //   = (1/2) int_{max(lo, x-c)}^{min(hi, x+c)} k(y-center) w(y) dy.
    // Returns exact 0 whenever the cone misses the table or the kernel reach.
    double cone_integral(const KernelSpec& kernel, double x, double c) const {
        if (empty() || !(c > 0.0)) return 0.0;
        if (std::abs(x - center) >= c + kernel.reach()) return 0.0;
        const double A = std::max(lo, x - c);
        const double B = std::min(hi(), x + c);
        if (!(B > A)) return 0.0;
        const std::size_t cells = w.size() - 1;
        auto cell_of = [&](double v) {
            double u = (v - lo) / step;
            if (u < 0.0) u = 0.0;
            auto q = static_cast<std::size_t>(u);
            return std::min(q, cells - 1);
        };
        const std::size_t qa = cell_of(A);
        const std::size_t qb = cell_of(B);
        // K at an off-node point: interpolate the cached node values except
        // near the Riesz singularity, where the exact form is used
        const bool riesz = kernel.is_riesz();
        auto K_at = [&](double v) {
            if (riesz && std::abs(v - center) < 2.0 * step)
                return kernel.antiderivative(v - center);
            const double u = (v - lo) / step;
            const auto q = std::min(static_cast<std::size_t>(std::max(u, 0.0)),
                                    cells - 1);
            const double f = u - static_cast<double>(q);
            return knode[q] * (1.0 - f) + knode[q + 1] * f;
        };
        auto partial = [&](double a, double b) {
            if (!(b > a)) return 0.0;
            return (K_at(b) - K_at(a)) * interp(0.5 * (a + b));
        };
        if (qa == qb) return 0.5 * partial(A, B);
        double total = partial(A, node(qa + 1)) + partial(node(qb), B);
        if (qb > qa + 1) total += prefix[qb] - prefix[qa + 1];
        return 0.5 * total;
    }

    // int phi_{t,R}(tau, y) k(y-center) w(y) dy over the table; per-cell
    // midpoint in phi*w against the exact cell kernel mass
    double phi_weighted_integral(const KernelSpec&, double t, double R,
                                 double tau) const {
        if (empty() || !(t > tau)) return 0.0;
        const double c = t - tau;
        const double A = std::max(lo, -R - c);
        const double B = std::min(hi(), R + c);
        if (!(B > A)) return 0.0;
        const std::size_t cells = w.size() - 1;
        auto clampq = [&](double v) {
            double u = (v - lo) / step;
            if (u < 0.0) u = 0.0;
            auto q = static_cast<std::size_t>(u);
            return std::min(q, cells - 1);
        };
        KahanSum acc;
        const std::size_t q1 = clampq(B) + 1;
        for (std::size_t q = clampq(A); q < q1; ++q) {
            const double mid = node(q) + 0.5 * step;
            const double p = phi_tR(t, R, tau, mid);
            if (p == 0.0) continue;
            acc.add((knode[q + 1] - knode[q]) * p * 0.5 * (w[q] + w[q + 1]));
        }
        return acc.value();
    }
};

// ---------------------------------------------------------------------------
// Event-driven solver: exact in time, quadrature-limited in space.  Atom i
// carries the memo table w_i(y) = u(tau_i^-, y) over the part of its kernel
// reach the evaluation window can see.
// ---------------------------------------------------------------------------

class EventDrivenField {
  public:
    EventDrivenField(const AtomCloud& cloud, const KernelSpec& kernel,
                     const LevyMeasureSpec& noise, const SolverConfig& cfg,
                     double eval_lo, double eval_hi,
                     SourceTerm source = SourceTerm::unit())
        : EventDrivenField(cloud, kernel, cfg, eval_lo, eval_hi, source,
                           noise.mean()) {}

    // delta companion / tests construct without a noise spec (centered assumed)
    EventDrivenField(const AtomCloud& cloud, const KernelSpec& kernel,
                     const SolverConfig& cfg, double eval_lo, double eval_hi,
                     SourceTerm source = SourceTerm::unit(), double noise_mean = 0.0)
        : cloud_(&cloud), kernel_(kernel), source_(source) {
        cfg.validate();
        if (noise_mean != 0.0)
            throw ConfigError(
                "EventDriven scheme supports centered noise only (m1 = 0); "
                "use the Grid scheme for a compensator drift");
        if (!(eval_hi >= eval_lo))
            throw DomainError("EventDrivenField: empty evaluation window");
        T_ = cloud.T;
        const double need = std::max(std::abs(eval_lo), std::abs(eval_hi)) + T_ +
                            kernel.reach();
        if (cloud.L + 1e-9 < need)
            throw DomainError(
                "EventDrivenField: cloud half-width " + std::to_string(cloud.L) +
                " does not cover evaluation window plus cone and kernel reach (" +
                std::to_string(need) + ")");
        eval_lo_ = eval_lo;
        eval_hi_ = eval_hi;
        h_ = cfg.event_step(kernel);
        build();
    }

    const KernelSpec& kernel() const { return kernel_; }
    const AtomCloud& cloud() const { return *cloud_; }
    double horizon() const { return T_; }
    double step() const { return h_; }
    double eval_lo() const { return eval_lo_; }
    double eval_hi() const { return eval_hi_; }
    const SourceTerm& source() const { return source_; }
    const std::vector<ConvTable>& tables() const { return tables_; }

    // u(t,x)
    double eval(double t, double x) const {
        if (t < 0.0) throw DomainError("EventDrivenField::eval: t >= 0 required");
        if (t > T_ + 1e-12)
            throw DomainError("EventDrivenField::eval: t beyond the solver horizon");
        double total = source_(t, x);
        if (source_.kind == SourceTerm::Kind::Unit && t == 0.0) return 1.0;
        const auto& atoms = cloud_->atoms;
        for (std::size_t i = 0; i < atoms.size() && atoms[i].t < t; ++i) {
            if (tables_[i].empty()) continue;
            total += atoms[i].z * tables_[i].cone_integral(kernel_, x, t - atoms[i].t);
        }
        return total;
    }

    // F_R(t) = int_{-R}^{R} (u(t,x) - source(t,x)) dx via the phi representation
    double spatial_average_centered(double t, double R) const {
        const auto& atoms = cloud_->atoms;
        KahanSum acc;
        for (std::size_t i = 0; i < atoms.size() && atoms[i].t < t; ++i) {
            if (tables_[i].empty()) continue;
            acc.add(atoms[i].z *
                    tables_[i].phi_weighted_integral(kernel_, t, R, atoms[i].t));
        }
        return acc.value();
    }

  private:
    friend class DifferenceField;
    friend class SecondDifferenceField;

    void build() {
        const auto& atoms = cloud_->atoms;
        tables_.resize(atoms.size());
        const double reach = kernel_.reach();
        const double t0 = source_.start_time();
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const Atom& a = atoms[i];
            if (a.t <= t0) continue;  // inert atom, empty table
            const double margin = T_ - a.t;
            const double lo = std::max(a.x - reach, eval_lo_ - margin - h_);
            const double hi = std::min(a.x + reach, eval_hi_ + margin + h_);
            if (!(hi > lo)) continue;
            ConvTable& tab = tables_[i];
            tab.center = a.x;
            tab.step = h_;
            tab.lo = lo;
            const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h_)) + 1;
            tab.w.resize(n + 1);
            for (std::size_t q = 0; q <= n; ++q) {
                const double y = tab.node(q);
                double value = source_(a.t, y);
                for (std::size_t j = 0; j < i; ++j) {
                    if (tables_[j].empty()) continue;
                    value += atoms[j].z *
                             tables_[j].cone_integral(kernel_, y, a.t - atoms[j].t);
                }
                tab.w[q] = value;
            }
            tab.build_prefix(kernel_);
        }
    }

    const AtomCloud* cloud_;
    KernelSpec kernel_;
    SourceTerm source_;
    double T_ = 0.0;
    double eval_lo_ = 0.0, eval_hi_ = 0.0;
    double h_ = 0.0;
    std::vector<ConvTable> tables_;
};

// ---------------------------------------------------------------------------
// Add-one-point difference field D_{(r,y,z)} u, computed by propagating the
// coupled difference through the atom tables.  Zero outside the reach-extended
// cone of the added atom, exactly, on every realization.
// ---------------------------------------------------------------------------

class DifferenceField {
  public:
    DifferenceField(const EventDrivenField& base, const Atom& extra)
        : base_(&base), extra_(extra) {
        if (extra.t <= 0.0 || extra.t > base.horizon())
            throw DomainError("DifferenceField: extra atom outside the time window");
        if (std::abs(extra.x) > base.cloud().L)
            throw DomainError("DifferenceField: extra atom outside the spatial window");
        build();
    }

    const Atom& extra() const { return extra_; }

    // D u(t, x); exact zero when r > t or the atom's reach-extended cone
    // misses (t,x)
    double eval(double t, double x) const {
        const KernelSpec& k = base_->kernel_;
        if (!(t > extra_.t)) return 0.0;
        double total = extra_.z * self_.cone_integral(k, x, t - extra_.t);
        const auto& atoms = base_->cloud_->atoms;
        for (std::size_t i = 0; i < atoms.size() && atoms[i].t < t; ++i) {
            if (deltas_[i].empty()) continue;
            total += atoms[i].z * deltas_[i].cone_integral(k, x, t - atoms[i].t);
        }
        return total;
    }

    // D F_R(t)
    double spatial_average_centered(double t, double R) const {
        if (!(t > extra_.t)) return 0.0;
        const KernelSpec& k = base_->kernel_;
        KahanSum acc;
        acc.add(extra_.z * self_.phi_weighted_integral(k, t, R, extra_.t));
        const auto& atoms = base_->cloud_->atoms;
        for (std::size_t i = 0; i < atoms.size() && atoms[i].t < t; ++i) {
            if (deltas_[i].empty()) continue;
            acc.add(atoms[i].z *
                    deltas_[i].phi_weighted_integral(k, t, R, atoms[i].t));
        }
        return acc.value();
    }

    const ConvTable& self_table() const { return self_; }
    const std::vector<ConvTable>& delta_tables() const { return deltas_; }

  private:
    friend class SecondDifferenceField;

    void build() {
        const KernelSpec& kernel = base_->kernel_;
        const double reach = kernel.reach();
        const double h = base_->h_;
        const double T = base_->T_;

        // w_e: base solution at the added atom's time over its kernel reach
        {
            const double margin = T - extra_.t;
            const double lo =
                std::max(extra_.x - reach, base_->eval_lo_ - margin - h);
            const double hi =
                std::min(extra_.x + reach, base_->eval_hi_ + margin + h);
            if (hi > lo) {
                self_.center = extra_.x;
                self_.step = h;
                self_.lo = lo;
                const auto n =
                    static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
                self_.w.resize(n + 1);
                for (std::size_t q = 0; q <= n; ++q)
                    self_.w[q] = base_->eval(extra_.t, self_.node(q));
                self_.build_prefix(kernel);
            }
        }

        const auto& atoms = base_->cloud_->atoms;
        deltas_.resize(atoms.size());
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const Atom& a = atoms[i];
            if (a.t <= extra_.t || base_->tables_[i].empty()) continue;
            // support window of the difference at this atom's time
            const double spread = (a.t - extra_.t) + reach;
            const ConvTable& btab = base_->tables_[i];
            const double lo = std::max(btab.lo, extra_.x - spread);
            const double hi = std::min(btab.hi(), extra_.x + spread);
            if (!(hi > lo)) continue;
            ConvTable& tab = deltas_[i];
            tab.center = a.x;
            tab.step = h;
            tab.lo = lo;
            const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
            tab.w.resize(n + 1);
            for (std::size_t q = 0; q <= n; ++q)
                tab.w[q] = eval_partial(i, a.t, tab.node(q));
            tab.build_prefix(kernel);
        }
    }

    // difference at (t, x) using only deltas of atoms before index `upto`
    double eval_partial(std::size_t upto, double t, double x) const {
        const KernelSpec& k = base_->kernel_;
        double total = extra_.z * self_.cone_integral(k, x, t - extra_.t);
        const auto& atoms = base_->cloud_->atoms;
        for (std::size_t j = 0; j < upto; ++j) {
            if (deltas_[j].empty()) continue;
            total += atoms[j].z * deltas_[j].cone_integral(k, x, t - atoms[j].t);
        }
        return total;
    }

    const EventDrivenField* base_;
    Atom extra_;
    ConvTable self_;                 // u(r^-, .) near the added atom
    std::vector<ConvTable> deltas_;  // difference at each later atom's time
};

// ---------------------------------------------------------------------------
// Second difference D^2_{e1,e2} u.  Extras are canonicalized by (t,x,z) so the
// swap symmetry is bitwise.  The only source term of the recursion is the
// first difference of the earlier atom evaluated at the later atom's time.
// ---------------------------------------------------------------------------

class SecondDifferenceField {
  public:
    SecondDifferenceField(const EventDrivenField& base, Atom e1, Atom e2)
        : base_(&base) {
        if (e2.t < e1.t || (e2.t == e1.t && (e2.x < e1.x ||
                                             (e2.x == e1.x && e2.z < e1.z))))
            std::swap(e1, e2);
        if (e1.t == e2.t && e1.x == e2.x && e1.z == e2.z)
            throw DomainError("SecondDifferenceField: the two added atoms coincide");
        first_ = e1;
        second_ = e2;
        d1_ = std::make_unique<DifferenceField>(base, first_);
        build();
    }

    double eval(double t, double x) const {
        const KernelSpec& k = base_->kernel_;
        if (!(t > second_.t)) return 0.0;
        double total = second_.z * direct_.cone_integral(k, x, t - second_.t);
        const auto& atoms = base_->cloud_->atoms;
        for (std::size_t i = 0; i < atoms.size() && atoms[i].t < t; ++i) {
            if (dd_[i].empty()) continue;
            total += atoms[i].z * dd_[i].cone_integral(k, x, t - atoms[i].t);
        }
        return total;
    }

  private:
    void build() {
        const KernelSpec& kernel = base_->kernel_;
        const double reach = kernel.reach();
        const double h = base_->h_;
        const double T = base_->T_;

        // direct term: D_{e1} u evaluated at e2's time over e2's kernel reach
        {
            const double margin = T - second_.t;
            const double spread1 = (second_.t - first_.t) + reach;
            const double lo = std::max({second_.x - reach, first_.x - spread1,
                                        base_->eval_lo_ - margin - h});
            const double hi = std::min({second_.x + reach, first_.x + spread1,
                                        base_->eval_hi_ + margin + h});
            if (hi > lo) {
                direct_.center = second_.x;
                direct_.step = h;
                direct_.lo = lo;
                const auto n =
                    static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
                direct_.w.resize(n + 1);
                for (std::size_t q = 0; q <= n; ++q)
                    direct_.w[q] = d1_->eval(second_.t, direct_.node(q));
                direct_.build_prefix(kernel);
            }
        }

        const auto& atoms = base_->cloud_->atoms;
        dd_.resize(atoms.size());
        if (direct_.empty()) return;  // no interaction: dd vanishes identically
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const Atom& a = atoms[i];
            if (a.t <= second_.t || base_->tables_[i].empty()) continue;
            const double s1 = (a.t - first_.t) + reach;
            const double s2 = (a.t - second_.t) + reach;
            const ConvTable& btab = base_->tables_[i];
            const double lo =
                std::max({btab.lo, first_.x - s1, second_.x - s2});
            const double hi =
                std::min({btab.hi(), first_.x + s1, second_.x + s2});
            if (!(hi > lo)) continue;
            ConvTable& tab = dd_[i];
            tab.center = a.x;
            tab.step = h;
            tab.lo = lo;
            const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
            tab.w.resize(n + 1);
            for (std::size_t q = 0; q <= n; ++q)
                tab.w[q] = eval_partial(i, a.t, tab.node(q));
            tab.build_prefix(kernel);
        }
    }

    double eval_partial(std::size_t upto, double t, double x) const {
        const KernelSpec& k = base_->kernel_;
        double total = second_.z * direct_.cone_integral(k, x, t - second_.t);
        const auto& atoms = base_->cloud_->atoms;
        for (std::size_t j = 0; j < upto; ++j) {
            if (dd_[j].empty()) continue;
            total += atoms[j].z * dd_[j].cone_integral(k, x, t - atoms[j].t);
        }
        return total;
    }

    const EventDrivenField* base_;
    Atom first_{}, second_{};
    std::unique_ptr<DifferenceField> d1_;
    ConvTable direct_;
    std::vector<ConvTable> dd_;
};

// ---------------------------------------------------------------------------
// Picard iterates of the delta-velocity equation
// ---------------------------------------------------------------------------

class PicardSequence {
  public:
    PicardSequence(const AtomCloud& cloud, const KernelSpec& kernel,
                   const SolverConfig& cfg, double eval_lo, double eval_hi,
                   SourceTerm source, int n_max)
        : cloud_(&cloud), kernel_(kernel), source_(source), n_max_(n_max) {
        if (n_max < 0 || n_max > 6)
            throw DomainError("PicardSequence: n_max must lie in [0, 6]");
        cfg.validate();
        T_ = cloud.T;
        h_ = cfg.event_step(kernel);
        eval_lo_ = eval_lo;
        eval_hi_ = eval_hi;
        build();
    }

    int depth() const { return n_max_; }

    // v_n(t, x)
    double eval(int n, double t, double x) const {
        if (n < 0 || n > n_max_) throw DomainError("PicardSequence: iterate index");
        double total = source_(t, x);
        if (n == 0) return total;
        const auto& atoms = cloud_->atoms;
        const auto& prev = tables_[static_cast<std::size_t>(n - 1)];
        for (std::size_t i = 0; i < atoms.size() && atoms[i].t < t; ++i) {
            if (prev[i].empty()) continue;
            total += atoms[i].z * prev[i].cone_integral(kernel_, x, t - atoms[i].t);
        }
        return total;
    }

  private:
    void build() {
        const auto& atoms = cloud_->atoms;
        const double reach = kernel_.reach();
        const double t0 = source_.start_time();
        tables_.assign(static_cast<std::size_t>(n_max_) + 1,
                       std::vector<ConvTable>(atoms.size()));
        for (int n = 0; n <= n_max_; ++n) {
            auto& layer = tables_[static_cast<std::size_t>(n)];
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                const Atom& a = atoms[i];
                if (a.t <= t0) continue;
                const double margin = T_ - a.t;
                const double lo = std::max(a.x - reach, eval_lo_ - margin - h_);
                const double hi = std::min(a.x + reach, eval_hi_ + margin + h_);
                if (!(hi > lo)) continue;
                ConvTable& tab = layer[i];
                tab.center = a.x;
                tab.step = h_;
                tab.lo = lo;
                const auto m = static_cast<std::size_t>(std::ceil((hi - lo) / h_)) + 1;
                tab.w.resize(m + 1);
                // layer n holds v_n(tau_i^-, .), from which eval(n+1, ...) integrates
                for (std::size_t q = 0; q <= m; ++q)
                    tab.w[q] = n == 0 ? source_(a.t, tab.node(q))
                                      : eval(n, a.t, tab.node(q));
                tab.build_prefix(kernel_);
            }
        }
    }

    const AtomCloud* cloud_;
    KernelSpec kernel_;
    SourceTerm source_;
    int n_max_;
    double T_ = 0.0, h_ = 0.0;
    double eval_lo_ = 0.0, eval_hi_ = 0.0;
    std::vector<std::vector<ConvTable>> tables_;  // [iterate][atom]
};

}  // namespace hamlevy

#endif
