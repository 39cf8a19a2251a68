#pragma once

#include "ebmix/types.hpp"

namespace ebmix {

struct SummarizeResult {
    GeneSummaries summaries;
    std::vector<RejectedGene> rejected;  // f_g = 0 (or n < 2 when paired)
};

/// Reduce a two-group matrix to per-gene (d, s, m, f). Genes with f_g = 0
/// are dropped into `rejected`; a group with zero samples is structural.
SummarizeResult summarize(const ExpressionMatrix& data);

/// Single-group paired differences: d = mean, m = sample variance, f = n-1.
SummarizeResult paired_summarize(const ExpressionMatrix& data);

/// N(tau, var) density at d.
double null_density(double d, double tau, double var);

/// N(tau + psi, var_total) density at d.
double nonnull_density(double d, double tau, double psi, double var_total);

}  // namespace ebmix
