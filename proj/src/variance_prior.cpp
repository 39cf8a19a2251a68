#include "ebmix/variance_prior.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ebmix/math.hpp"
#include "ebmix/optim.hpp"

namespace ebmix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double marginal_log_density_m(double m, int f, const VariancePrior& prior) {
    if (!(prior.alpha > 0.0) || !(prior.beta > 0.0))
        throw std::domain_error("marginal_log_density_m: alpha, beta must be positive");
    if (m < 0.0) throw std::domain_error("marginal_log_density_m: m must be >= 0");
    if (f < 1) throw std::domain_error("marginal_log_density_m: f must be >= 1");
    const double fh = 0.5 * f;
    double lead;
    if (m == 0.0) {
        if (f == 2) lead = 0.0;           // coefficient (f/2 - 1) is exactly zero
        else if (f == 1) return kInf;     // m^{-1/2} pole
        else return -kInf;
    } else {
        lead = (fh - 1.0) * std::log(m);
    }
    return lead + fh * std::log(fh) - std::lgamma(fh) - std::lgamma(prior.alpha) -
           prior.alpha * std::log(prior.beta) + std::lgamma(fh + prior.alpha) -
           (fh + prior.alpha) * std::log(m * fh + 1.0 / prior.beta);
}

namespace {

// Retained genes for hyperparameter estimation: m > 0.
struct MlData {
    std::vector<double> m;
    std::vector<double> fh;  // f/2 as double
    std::size_t excluded = 0;
};

MlData ml_data(const GeneSummaries& s) {
    MlData d;
    for (std::size_t g = 0; g < s.size(); ++g) {
        if (s.m[g] > 0.0) {
            d.m.push_back(s.m[g]);
            d.fh.push_back(0.5 * s.f[g]);
        } else {
            ++d.excluded;
        }
    }
    return d;
}

// Negative marginal log-likelihood and gradient in x = (log alpha, log beta).
double neg_loglik(const MlData& dat, const std::vector<double>& x, std::vector<double>& grad) {
    const double alpha = std::exp(x[0]), beta = std::exp(x[1]);
    const double lg_alpha = std::lgamma(alpha), dg_alpha = digamma(alpha);
    const double log_beta = std::log(beta);
    double ll = 0.0, dl_da = 0.0, dl_db = 0.0;
    for (std::size_t g = 0; g < dat.m.size(); ++g) {
        const double fh = dat.fh[g], m = dat.m[g];
        const double r = m * fh + 1.0 / beta;
        ll += (fh - 1.0) * std::log(m) + fh * std::log(fh) - std::lgamma(fh) - lg_alpha -
              alpha * log_beta + std::lgamma(fh + alpha) - (fh + alpha) * std::log(r);
        dl_da += -dg_alpha - log_beta + digamma(fh + alpha) - std::log(r);
        dl_db += -alpha / beta + (fh + alpha) / (beta * beta * r);
    }
    grad[0] = -dl_da * alpha;  // chain rule to log scale
    grad[1] = -dl_db * beta;
    return -ll;
}

// Moment estimates or alpha <= 0 on failure.
std::pair<double, double> moment_solution(const GeneSummaries& s) {
    std::vector<double> m;
    double k = 0.0;
    for (std::size_t g = 0; g < s.size(); ++g) {
        m.push_back(s.m[g]);
        k += (s.f[g] + 2.0) / s.f[g];
    }
    if (m.size() < 2) return {-1.0, 0.0};
    k /= static_cast<double>(m.size());
    const double mu = mean(m);
    const double var = sample_variance(m);
    if (!(mu > 0.0) || !(var > 0.0)) return {-1.0, 0.0};
    // E[m] = 1/((a-1)b); Var[m] = mu^2 [ k(a-1)/(a-2) - 1 ] with
    // k = E[(f+2)/f] from the scaled-F second moment.
    const double r = (var / (mu * mu) + 1.0) / k;
    if (!(r > 1.0)) return {-1.0, 0.0};
    const double alpha = (2.0 * r - 1.0) / (r - 1.0);
    const double beta = 1.0 / (mu * (alpha - 1.0));
    return {alpha, beta};
}

}  // namespace

VariancePrior fit_variance_prior(const GeneSummaries& summaries) {
    MlData dat = ml_data(summaries);
    if (dat.m.size() < 10)
        throw ValidationError("fit_variance_prior: need >= 10 genes with m_g > 0, got " +
                              std::to_string(dat.m.size()));
    auto [a0, b0] = moment_solution(summaries);
    if (!(a0 > 2.0) || !(b0 > 0.0)) {
        a0 = 2.5;
        b0 = 1.0 / (1.5 * mean(dat.m));
    }
    std::vector<double> x0 = {std::log(a0), std::log(b0)};
    auto obj = [&dat](const std::vector<double>& x, std::vector<double>& g) {
        return neg_loglik(dat, x, g);
    };
    // Box keeps the search where the likelihood is numerically meaningful;
    // the upper alpha edge is effectively the homogeneous-variance limit.
    const std::vector<double> lo = {std::log(1e-2), std::log(1e-9)};
    const std::vector<double> hi = {std::log(1e4), std::log(1e6)};
    OptimResult res = bfgs_minimize(obj, x0, 500, 1e-8, lo, hi);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "fit_variance_prior: no convergence after " << res.iterations
            << " iterations; best (alpha, beta) = (" << std::exp(res.x[0]) << ", "
            << std::exp(res.x[1]) << "), |grad| = " << res.grad_norm;
        throw NumericalError(msg.str());
    }
    VariancePrior prior;
    prior.alpha = std::exp(res.x[0]);
    prior.beta = std::exp(res.x[1]);
    prior.method = VariancePrior::Method::MaxLikelihood;
    prior.zero_m_excluded = dat.excluded;
    return prior;
}

VariancePrior fit_variance_prior_moments(const GeneSummaries& summaries) {
    auto [alpha, beta] = moment_solution(summaries);
    if (!(alpha > 2.0))
        throw NumericalError(
            "fit_variance_prior_moments: dispersion of {m_g} admits no alpha > 2 "
            "solution; use the maximum-likelihood method");
    VariancePrior prior;
    prior.alpha = alpha;
    prior.beta = beta;
    prior.method = VariancePrior::Method::Moments;
    return prior;
}

double posterior_mode_variance(double m, int f, const VariancePrior& prior) {
    if (!(prior.alpha > 0.0) || !(prior.beta > 0.0))
        throw std::domain_error("posterior_mode_variance: invalid prior");
    const double fh = 0.5 * f;
    const double w = fh / (fh + prior.alpha + 1.0);
    return w * m + (1.0 - w) / ((prior.alpha + 1.0) * prior.beta);
}

double posterior_mean_variance(double m, int f, const VariancePrior& prior) {
    if (!(prior.alpha > 0.0) || !(prior.beta > 0.0))
        throw std::domain_error("posterior_mean_variance: invalid prior");
    const double fh = 0.5 * f;
    if (!(fh + prior.alpha > 1.0))
        throw std::domain_error("posterior_mean_variance: requires f/2 + alpha > 1");
    return (fh * m + 1.0 / prior.beta) / (fh + prior.alpha - 1.0);
}

double pooled_variance(const GeneSummaries& summaries) {
    double num = 0.0, den = 0.0;
    for (std::size_t g = 0; g < summaries.size(); ++g) {
        num += summaries.m[g] * summaries.f[g];
        den += summaries.f[g];
    }
    if (!(den > 0.0)) throw ValidationError("pooled_variance: no degrees of freedom");
    return num / den;
}

}  // namespace ebmix
