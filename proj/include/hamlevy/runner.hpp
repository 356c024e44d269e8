#ifndef HAMLEVY_RUNNER_HPP
#define HAMLEVY_RUNNER_HPP

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>

#include "hamlevy/chaos.hpp"
#include "hamlevy/config.hpp"
#include "hamlevy/experiments.hpp"
#include "hamlevy/gamma_audit.hpp"
#include "hamlevy/malliavin.hpp"
#include "hamlevy/report.hpp"

namespace hamlevy {

// ---------------------------------------------------------------------------
// chaos-verify: product formula suite, orthogonality/isometry, and the
// Poisson <-> Gaussian second-moment identity
// ---------------------------------------------------------------------------

inline ExperimentReport run_chaos_verify(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    rep.experiment = "chaos-verify";
    rep.kernel = cfg.kernel.name();
    rep.nu = cfg.noise.name();
    bool pass = true;

    // --- product formula, exact per realization on a 3-cell space ---
    DiscreteSpace sp({0.5, 1.0, 1.5});
    Tensor f1(1, 3), g1(1, 3);
    f1[0] = 1.0; f1[1] = -2.0; f1[2] = 0.5;
    g1[0] = 0.3; g1[1] = 1.1; g1[2] = -0.7;
    Tensor f2(2, 3), g2(2, 3);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            if (a == b) continue;
            f2[a * 3 + b] = 0.3 * static_cast<double>(a) -
                            0.1 * static_cast<double>(b * b) + 0.4;
            g2[a * 3 + b] = 1.0 - 0.4 * static_cast<double>(b) +
                            0.2 * static_cast<double>(a);
        }
    Rng rng(cfg.seed);
    const struct {
        const Tensor *f, *g;
        const char* label;
    } cases[] = {{&f1, &g1, "product_formula_11"},
                 {&f1, &g2, "product_formula_12"},
                 {&f2, &g2, "product_formula_22"}};
    for (const auto& c : cases) {
        const auto pf = product_formula_check(sp, *c.f, *c.g, 400, rng);
        const double tol = 1e-9 * std::max(pf.max_scale, 1.0);
        rep.add(c.label, pf.max_abs_discrepancy, std::nan(""), std::nan(""),
                std::nan(""), std::nan(""),
                pf.max_abs_discrepancy <= tol ? "PASS" : "FAIL");
        if (pf.max_abs_discrepancy > tol) pass = false;
    }

    // --- disjoint time-ordered supports: only the k=0 term survives ---
    {
        Tensor fa(1, 3), gb(1, 3);
        fa[0] = 0.8;             // "before r" cell
        gb[2] = -1.3;            // "after r" cell
        MultipleIntegral Ia(sp, fa), Ib(sp, gb);
        Tensor prod = contraction(sp, fa, gb, 0, 0);
        MultipleIntegral Iab(sp, prod, false);
        double worst = 0.0;
        for (int d = 0; d < 400; ++d) {
            const auto counts = sp.sample_counts(rng);
            worst = std::max(worst,
                             std::abs(Ia(counts) * Ib(counts) - Iab(counts)));
        }
        rep.add("disjoint_support_product", worst, std::nan(""), std::nan(""),
                std::nan(""), std::nan(""), worst <= 1e-12 ? "PASS" : "FAIL");
        if (worst > 1e-12) pass = false;
    }

    // --- orthogonality and isometry at scale ---
    {
        const std::size_t draws = 100000;
        Tensor f2m = symmetrize(f2).masked_offdiagonal();
        MultipleIntegral I1(sp, f1), I2(sp, f2m);
        std::vector<double> v1(draws), v2(draws);
        Rng rng2(cfg.seed ^ 0xABCDEFull);
        for (std::size_t i = 0; i < draws; ++i) {
            const auto counts = sp.sample_counts(rng2);
            v1[i] = I1(counts);
            v2[i] = I2(counts);
        }
        const double m1 = sample_mean(v1), m2v = sample_mean(v2);
        const double se1 = mean_stderr(v1), se2 = mean_stderr(v2);
        rep.add("mean_I1", m1, se1);
        rep.add("mean_I2", m2v, se2);
        if (std::abs(m1) > 3.0 * se1 || std::abs(m2v) > 3.0 * se2) pass = false;
        // covariance of I1, I2 -> 0
        std::vector<double> prod(draws);
        for (std::size_t i = 0; i < draws; ++i) prod[i] = v1[i] * v2[i];
        const double cov = sample_mean(prod) - m1 * m2v;
        const double se_cov = mean_stderr(prod);
        rep.add("cov_I1_I2", cov, se_cov, std::nan(""), std::nan(""), std::nan(""),
                std::abs(cov) <= 3.0 * se_cov ? "PASS" : "FAIL");
        if (std::abs(cov) > 3.0 * se_cov) pass = false;
        // isometry: E[I2^2] = 2 ||f~||^2
        std::vector<double> sq(draws);
        for (std::size_t i = 0; i < draws; ++i) sq[i] = v2[i] * v2[i];
        const double target = 2.0 * f2m.norm_sq(sp);
        const double got = sample_mean(sq);
        const double se_sq = mean_stderr(sq);
        rep.add("isometry_I2", got, se_sq);
        rep.add("isometry_target", target);
        if (std::abs(got - target) > 3.0 * se_sq) pass = false;
    }

    // --- Levy <-> Gaussian second-moment identity at (t, 0) ---
    {
        const double t = cfg.t;
        const auto chaos = truncated_second_moment(cfg.kernel, cfg.noise.m2(), t, 3);
        rep.add("chaos_moment", chaos.value, chaos.remainder_bound, std::nan(""), t);

        McOptions opt;
        opt.n_replicates = cfg.n_replicates;
        opt.seed = cfg.seed;
        opt.workers = cfg.workers;
        opt.solver = cfg.solver;
        const double L = t + cfg.kernel.reach() + 1.0;
        std::vector<double> usq(opt.n_replicates), Usq(opt.n_replicates);
        parallel_for(opt.n_replicates, opt.resolved_workers(), [&](std::size_t i) {
            Rng r1 = make_stream(cfg.seed, i);
            const AtomCloud cloud = sample_atoms(cfg.noise, t, L, r1);
            EventDrivenField u(cloud, cfg.kernel, cfg.noise, opt.solver, 0.0, 0.0);
            const double v = u.eval(t, 0.0);
            usq[i] = v * v;
            Rng r2 = make_stream(cfg.seed ^ 0x5157ull, i);
            SolverConfig gcfg = opt.solver;
            gcfg.scheme = Scheme::Grid;
            GridSolution U(GridSolution::GaussianTag{}, r2, cfg.kernel,
                           cfg.noise.m2(), t, gcfg, 0.0, 0.0);
            const double w = U.eval(t, 0.0);
            Usq[i] = w * w;
        });
        const double mu = sample_mean(usq), su = mean_stderr(usq);
        const double mU = sample_mean(Usq), sU = mean_stderr(Usq);
        rep.add("levy_second_moment", mu, su, std::nan(""), t);
        rep.add("gaussian_second_moment", mU, sU, std::nan(""), t);
        const double se_cross = std::sqrt(su * su + sU * sU);
        if (std::abs(mu - mU) > 3.0 * se_cross) pass = false;
        if (std::abs(mu - chaos.value) >
            3.0 * su + chaos.remainder_bound)
            pass = false;
        if (std::abs(mU - chaos.value) >
            3.0 * sU + chaos.remainder_bound)
            pass = false;
    }

    rep.status = pass ? Status::Pass : Status::Fail;
    return rep;
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

inline ExperimentReport run_experiment(ExperimentConfig cfg) {
    validate_config(cfg);
    McOptions opt;
    opt.n_replicates = cfg.n_replicates;
    opt.seed = cfg.seed;
    opt.workers = cfg.workers;
    opt.solver = cfg.solver;
    const double beta = config_beta(cfg);

    ExperimentReport rep;
    switch (cfg.kind) {
        case ExperimentKind::VarianceScan:
            rep = variance_scan(cfg.kernel, cfg.noise, cfg.t, cfg.R_list, beta, opt)
                      .report;
            break;
        case ExperimentKind::Ergodic:
            rep = ergodic_check(cfg.kernel, cfg.noise, cfg.t, cfg.R_list, beta, opt);
            break;
        case ExperimentKind::Qclt:
            rep = qclt_experiment(cfg.kernel, cfg.noise, cfg.p, cfg.t, cfg.R_list,
                                  opt, cfg.dk_threshold);
            break;
        case ExperimentKind::Covariance: {
            std::vector<CovariancePair> pairs;
            for (const auto& pr : cfg.pairs)
                pairs.push_back(CovariancePair{pr.first, pr.second});
            rep = covariance_limit(
                cfg.kernel, cfg.noise, pairs,
                *std::max_element(cfg.R_list.begin(), cfg.R_list.end()), beta, opt);
            break;
        }
        case ExperimentKind::Fclt:
            rep = fclt_experiment(cfg.kernel, cfg.noise, 2.0,
                                  *std::max_element(cfg.R_list.begin(),
                                                    cfg.R_list.end()),
                                  cfg.t_grid, beta, opt);
            break;
        case ExperimentKind::MalliavinVerify: {
            KeyEstimateOptions ko;
            ko.t = cfg.t;
            ko.n_samples = cfg.n_replicates;
            ko.seed = cfg.seed;
            ko.workers = cfg.workers;
            ExperimentReport d1 =
                verify_key_D(cfg.kernel, cfg.noise, cfg.solver, cfg.p, ko);
            ko.n_samples = std::max<std::size_t>(cfg.n_replicates / 2, 1000);
            ExperimentReport d2 =
                verify_key_D2(cfg.kernel, cfg.noise, cfg.solver, cfg.p, ko);
            PoincareOptions po;
            po.t = cfg.t;
            po.R = cfg.R_list.front();
            po.n_replicates = std::min<std::size_t>(cfg.n_replicates, 500);
            po.seed = cfg.seed;
            po.workers = cfg.workers;
            ExperimentReport pc =
                run_poincare(cfg.kernel, cfg.noise, cfg.solver, po);
            rep = d1;
            rep.experiment = "malliavin-verify";
            for (auto& r : d2.rows) {
                r.statistic = "d2." + r.statistic;
                rep.rows.push_back(r);
            }
            for (auto& r : pc.rows) {
                r.statistic = "poincare." + r.statistic;
                rep.rows.push_back(r);
            }
            rep.status = combine_status(combine_status(d1.status, d2.status),
                                        pc.status);
            break;
        }
        case ExperimentKind::ChaosVerify:
            rep = run_chaos_verify(cfg);
            break;
        case ExperimentKind::GammaAudit:
            rep = audit_gamma_rates(cfg.kernel, cfg.noise, cfg.p, cfg.R_list,
                                    cfg.t);
            break;
    }
    rep.p = cfg.p;
    rep.config = cfg.raw;
    rep.config["kind"] = kind_name(cfg.kind);
    return rep;
}

// ---------------------------------------------------------------------------
// artifact writing
// ---------------------------------------------------------------------------

enum class OutputFormat { Csv, Json, Both };

struct RunArtifacts {
    Status status = Status::Inconclusive;
    std::string csv_path, json_path, summary_path;
};

inline RunArtifacts write_artifacts(const ExperimentReport& rep,
                                    const std::string& out_dir,
                                    OutputFormat format) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunArtifacts art;
    art.status = rep.status;
    const std::string base = out_dir + "/" + rep.experiment;
    if (format == OutputFormat::Csv || format == OutputFormat::Both) {
        const auto now = std::chrono::system_clock::to_time_t(
            std::chrono::system_clock::now());
        char stamp[64];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ",
                      std::gmtime(&now));
        std::ofstream csv(base + ".csv");
        csv << rep.csv(stamp);
        art.csv_path = base + ".csv";
    }
    if (format == OutputFormat::Json || format == OutputFormat::Both) {
        std::ofstream json(base + ".json");
        json << rep.to_json().dump(2) << "\n";
        art.json_path = base + ".json";
    }
    std::ofstream summary(base + ".summary");
    summary << rep.experiment << " " << status_name(rep.status) << "\n";
    art.summary_path = base + ".summary";
    return art;
}

inline int status_exit_code(Status s) {
    switch (s) {
        case Status::Pass: return 0;
        case Status::Fail: return 2;
        default: return 3;
    }
}

}  // namespace hamlevy

#endif
