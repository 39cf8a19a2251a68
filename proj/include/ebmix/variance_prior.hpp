#pragma once

#include "ebmix/types.hpp"

namespace ebmix {

/// Log marginal density of m_g under the inverse-gamma variance prior
/// (scaled-F form). Returns -inf at m=0 when f>=3, +inf when f=1.
double marginal_log_density_m(double m, int f, const VariancePrior& prior);

/// Maximum-likelihood (alpha, beta) from {m_g} via BFGS on (log a, log b).
/// Requires >= 10 genes with m_g > 0.
VariancePrior fit_variance_prior(const GeneSummaries& summaries);

/// Method-of-moments (alpha, beta); errors when the dispersion of {m_g} is
/// no larger than a homogeneous model implies (no alpha > 2 solution).
VariancePrior fit_variance_prior_moments(const GeneSummaries& summaries);

/// Posterior mode of sigma^2_eps given m: convex blend of m and the prior
/// mode 1/((alpha+1) beta).
double posterior_mode_variance(double m, int f, const VariancePrior& prior);

/// Posterior mean of sigma^2_eps given m; requires f/2 + alpha > 1.
double posterior_mean_variance(double m, int f, const VariancePrior& prior);

/// Pooled homogeneous estimate sum(m_g f_g)/sum(f_g).
double pooled_variance(const GeneSummaries& summaries);

}  // namespace ebmix
