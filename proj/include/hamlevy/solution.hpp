#ifndef HAMLEVY_SOLUTION_HPP
#define HAMLEVY_SOLUTION_HPP

#include <memory>
#include <variant>

#include "hamlevy/grid.hpp"
#include "hamlevy/solver.hpp"

namespace hamlevy {

// Evaluator of one realization of u (or v, or the Gaussian model U).
class SolutionField {
  public:
    explicit SolutionField(EventDrivenField&& f)
        : field_(std::make_shared<EventDrivenField>(std::move(f))) {}
    explicit SolutionField(GridSolution&& f)
        : field_(std::make_shared<GridSolution>(std::move(f))) {}

    double eval(double t, double x) const {
        if (auto* ed = std::get_if<std::shared_ptr<EventDrivenField>>(&field_))
            return (*ed)->eval(t, x);
        return std::get<std::shared_ptr<GridSolution>>(field_)->eval(t, x);
    }

    // int_{-R}^{R} (u(t,x) - E[u]) dx on this realization
    double spatial_average_centered(double t, double R) const {
        if (auto* ed = std::get_if<std::shared_ptr<EventDrivenField>>(&field_))
            return (*ed)->spatial_average_centered(t, R);
        return std::get<std::shared_ptr<GridSolution>>(field_)
            ->spatial_average_centered(t, R);
    }

    const EventDrivenField* event_driven() const {
        if (auto* ed = std::get_if<std::shared_ptr<EventDrivenField>>(&field_))
            return ed->get();
        return nullptr;
    }

  private:
    std::variant<std::shared_ptr<EventDrivenField>, std::shared_ptr<GridSolution>>
        field_;
};

inline SolutionField solve_u(const AtomCloud& cloud, const KernelSpec& kernel,
                             const LevyMeasureSpec& noise, const SolverConfig& cfg,
                             double eval_lo, double eval_hi,
                             const KernelMassTable* mass_table = nullptr) {
    if (cfg.scheme == Scheme::EventDriven)
        return SolutionField(
            EventDrivenField(cloud, kernel, noise, cfg, eval_lo, eval_hi));
    return SolutionField(
        GridSolution(cloud, kernel, noise, cfg, eval_lo, eval_hi, mass_table));
}

// delta-velocity companion v^{(r,y,z)}; event-driven, centered noise
inline SolutionField solve_v_delta(const AtomCloud& cloud, const KernelSpec& kernel,
                                   double r, double y, double z,
                                   const SolverConfig& cfg, double eval_lo,
                                   double eval_hi) {
    if (r < 0.0 || r >= cloud.T)
        throw DomainError("solve_v_delta: need 0 <= r < T");
    return SolutionField(EventDrivenField(cloud, kernel, cfg, eval_lo, eval_hi,
                                          SourceTerm::delta(r, y, z)));
}

inline SolutionField solve_U_gaussian(Rng& rng, const KernelSpec& kernel, double m2,
                                      double T, const SolverConfig& cfg,
                                      double eval_lo, double eval_hi) {
    if (cfg.scheme != Scheme::Grid)
        throw ConfigError("solve_U_gaussian: Grid scheme only");
    return SolutionField(GridSolution(GridSolution::GaussianTag{}, rng, kernel, m2,
                                      T, cfg, eval_lo, eval_hi));
}

inline PicardSequence picard_iterates(const KernelSpec& kernel,
                                      const AtomCloud& cloud, double r, double y,
                                      double z, int n_max, const SolverConfig& cfg,
                                      double eval_lo, double eval_hi) {
    return PicardSequence(cloud, kernel, cfg, eval_lo, eval_hi,
                          SourceTerm::delta(r, y, z), n_max);
}

}  // namespace hamlevy

#endif
