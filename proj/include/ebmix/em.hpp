#pragma once

#include <optional>

#include "ebmix/types.hpp"

namespace ebmix {

/// Which posterior summary of sigma^2_eps | m is plugged into the working
/// densities. Mean reproduces the published estimation behavior (and is the
/// default); Mode is the literal Laplace expansion point.
enum class VariancePlugin { Mean, Mode };

struct EmConfig {
    int max_iters = 2000;
    double tol = 1e-8;            // relative change of the approx marginal loglik
    double posterior_tol = 1e-6;  // max per-gene posterior change
    int components = 2;           // 2 or 3 mixture components
    VariancePlugin plugin = VariancePlugin::Mean;
    std::optional<MixtureParams> init;  // nullopt = data-driven start
};

struct EmIterate {
    MixtureParams params;
    double loglik = 0.0;
    double max_posterior_change = 0.0;
};

struct EmTrace {
    std::vector<EmIterate> iterations;
};

/// Per-gene component posteriors; each row sums to 1.
struct Posteriors {
    std::vector<double> p0, p1, p2;
    std::size_t size() const { return p0.size(); }
};

struct FitResult {
    MixtureParams params;
    VariancePrior prior;
    ModelKind model = ModelKind::RR;
    int components = 2;
    std::vector<double> posterior_p1;
    std::vector<double> posterior_p2;   // zeros in two-component mode
    std::vector<double> sigma2_eps;     // per-gene error-variance estimate used
    std::vector<double> sigma2_d;       // per-gene null variance of d_g
    VariancePlugin plugin = VariancePlugin::Mean;
    EmTrace trace;
    bool converged = false;
    double loglik = 0.0;
    bool m_step_bracket_failed = false;  // variance-root bracket never changed sign

    double posterior_null(std::size_t g) const {
        const double p0 = 1.0 - posterior_p1[g] - posterior_p2[g];
        return p0 < 0.0 ? 0.0 : (p0 > 1.0 ? 1.0 : p0);
    }
};

/// Per-gene error-variance estimates for a model kind: RR/RG use the
/// posterior mode, RF uses m_g, RH/FH the pooled estimate, FF m_g, FR the
/// posterior mode.
std::vector<double> resolve_sigma2_eps(const GeneSummaries& summaries,
                                       const VariancePrior& prior, ModelKind kind,
                                       VariancePlugin plugin = VariancePlugin::Mean);

/// Observed-data approximate marginal log-likelihood
/// sum_g log[p0 f0(d_g) + p1 f1(d_g) (+ p2 f2(d_g))]; the variance-
/// marginalization normalization factors are parameter-free and omitted.
double laplace_complete_loglik(const GeneSummaries& summaries, const VariancePrior& prior,
                               const MixtureParams& params, ModelKind kind = ModelKind::RR,
                               int components = 2,
                               VariancePlugin plugin = VariancePlugin::Mean);

/// Component posteriors given current parameters (log-space, NaN-free).
Posteriors e_step(const GeneSummaries& summaries, const VariancePrior& prior,
                  const MixtureParams& params, ModelKind kind = ModelKind::RR,
                  int components = 2, VariancePlugin plugin = VariancePlugin::Mean);

/// One maximization step given posteriors; the variance component solves its
/// stationarity equation by bracketed root-finding.
MixtureParams m_step(const GeneSummaries& summaries, const VariancePrior& prior,
                     const Posteriors& post, const MixtureParams& prev,
                     ModelKind kind = ModelKind::RR, int components = 2,
                     VariancePlugin plugin = VariancePlugin::Mean);

/// Full EM fit for the random-mean kinds (RR/RG/RF/RH). Fixed-mean kinds
/// throw NonIdentifiableError (their p1 iteration diverges to 1); see
/// fit_fixed_diagnostic and fixed_effect_stats.
FitResult fit(const GeneSummaries& summaries, const VariancePrior& prior, ModelKind kind,
              const EmConfig& config = EmConfig{});

/// p1 iteration under a fixed-mean kind (FR/FF/FH), exposed to demonstrate
/// the divergence to 1.
struct FixedDiagnostic {
    std::vector<double> p1_sequence;
    double tau = 0.0;
};
FixedDiagnostic fit_fixed_diagnostic(const GeneSummaries& summaries,
                                     const VariancePrior& prior, ModelKind kind,
                                     double p1_init = 0.05, int max_iters = 500,
                                     VariancePlugin plugin = VariancePlugin::Mean);

/// Fixed-mean test statistics t_g = (d_g - tau_hat)/sigma_g with the kind's
/// variance plumbing; tau_hat is the precision-weighted mean of d.
struct FixedEffectStats {
    double tau = 0.0;
    std::vector<double> t;
    std::vector<double> sigma2_d;
};
FixedEffectStats fixed_effect_stats(const GeneSummaries& summaries, const VariancePrior& prior,
                                    ModelKind kind,
                                    VariancePlugin plugin = VariancePlugin::Mean);

}  // namespace ebmix
