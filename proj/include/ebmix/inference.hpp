#pragma once

#include "ebmix/em.hpp"
#include "ebmix/types.hpp"

namespace ebmix {

/// Per-gene decision table.
struct GeneInference {
    std::vector<std::string> gene_ids;
    std::vector<double> lr;          // L_{0,g}/L_{1,g}
    std::vector<double> t_post;      // posterior t-statistic
    std::vector<double> lambda;      // shrinkage coefficient in [0,1]
    std::vector<double> local_fdr;   // posterior null probability
    std::vector<double> p_value;     // two-sided theoretical-null p-value
    std::vector<double> bh_adjusted;
    std::vector<bool> call_local;
    std::vector<bool> call_fdr;
};

struct DecisionConfig {
    double local_fdr_threshold = 0.2;
    double fdr_level = 0.05;        // q*
    double min_abs_effect = 0.0;    // optional |d_g - tau_hat| filter

    void validate() const {
        if (!(local_fdr_threshold >= 0.0 && local_fdr_threshold < 1.0))
            throw std::domain_error("DecisionConfig: local_fdr_threshold must be in [0,1)");
        if (!(fdr_level > 0.0 && fdr_level < 1.0))
            throw std::domain_error("DecisionConfig: fdr_level must be in (0,1)");
        if (!(min_abs_effect >= 0.0))
            throw std::domain_error("DecisionConfig: min_abs_effect must be >= 0");
    }
};

struct LikelihoodRatios {
    std::vector<double> lr;
    std::vector<double> t_post;
    std::vector<double> lambda;
};

/// Likelihood ratios L0/L1, posterior t-statistics and shrinkage
/// coefficients for a fitted random-mean model. A zero variance component
/// falls back to the moderated form t = (d - tau)/sigma_tilde.
LikelihoodRatios likelihood_ratio(const GeneSummaries& summaries, const FitResult& fit);

/// Posterior-null-probability calls: called when 1 - p1g (- p2g) < threshold.
std::vector<bool> classify_local_fdr(const FitResult& fit, const DecisionConfig& config);

/// Two-sided p-values under the theoretical null d_g ~ N(tau_hat, sigma2_d).
std::vector<double> theoretical_null_pvalues(const GeneSummaries& summaries,
                                             const FitResult& fit);

struct BhResult {
    std::vector<bool> call;
    std::vector<double> adjusted;
};

/// Benjamini-Hochberg step-up at level q_star, plus monotone adjusted
/// p-values.
BhResult bh_procedure(const std::vector<double>& p_values, double q_star);

/// Full per-gene decision table; the optional effect-size filter applies
/// conjunctively to both call types.
GeneInference decide(const GeneSummaries& summaries, const FitResult& fit,
                     const DecisionConfig& config);

}  // namespace ebmix
