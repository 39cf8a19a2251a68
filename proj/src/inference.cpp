#include "ebmix/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ebmix/math.hpp"

namespace ebmix {

LikelihoodRatios likelihood_ratio(const GeneSummaries& summaries, const FitResult& fit) {
    if (!is_random_mean(fit.model))
        throw std::domain_error("likelihood_ratio: requires a random-mean fit");
    const std::size_t G = summaries.size();
    if (fit.sigma2_d.size() != G)
        throw ValidationError("likelihood_ratio: fit does not match summaries");
    const MixtureParams& p = fit.params;
    LikelihoodRatios out;
    out.lr.resize(G);
    out.t_post.resize(G);
    out.lambda.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        const double v0g = fit.sigma2_d[g];
        const double v1g = (fit.model == ModelKind::RG)
                               ? (p.v0 + summaries.var_multiplier(g)) * fit.sigma2_eps[g]
                               : p.sigma_psi2 + v0g;
        const double lam = 1.0 - v0g / v1g;  // sigma_psi^2/(sigma_psi^2 + sigma_g^2)
        out.lambda[g] = lam;
        const double x = summaries.d[g] - p.tau;
        if (lam > 0.0) {
            out.t_post[g] = (lam * x + (1.0 - lam) * p.psi) / std::sqrt(lam * v0g);
        } else {
            out.t_post[g] = x / std::sqrt(v0g);  // moderated-t limit
        }
        out.lr[g] = std::exp(log_normal_pdf(summaries.d[g], p.tau, v0g) -
                             log_normal_pdf(summaries.d[g], p.tau + p.psi, v1g));
    }
    return out;
}

std::vector<bool> classify_local_fdr(const FitResult& fit, const DecisionConfig& config) {
    config.validate();
    std::vector<bool> call(fit.posterior_p1.size());
    for (std::size_t g = 0; g < call.size(); ++g)
        call[g] = fit.posterior_null(g) < config.local_fdr_threshold;
    return call;
}

std::vector<double> theoretical_null_pvalues(const GeneSummaries& summaries,
                                             const FitResult& fit) {
    const std::size_t G = summaries.size();
    if (fit.sigma2_d.size() != G)
        throw ValidationError("theoretical_null_pvalues: fit does not match summaries");
    std::vector<double> p(G);
    for (std::size_t g = 0; g < G; ++g) {
        const double z = std::fabs(summaries.d[g] - fit.params.tau) /
                         std::sqrt(fit.sigma2_d[g]);
        p[g] = std::min(1.0, 2.0 * normal_sf(z));
    }
    return p;
}

BhResult bh_procedure(const std::vector<double>& p_values, double q_star) {
    if (!(q_star > 0.0 && q_star < 1.0))
        throw std::domain_error("bh_procedure: q_star must be in (0,1)");
    const std::size_t G = p_values.size();
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("bh_procedure: p-values must be in [0,1]");
    std::vector<std::size_t> order(G);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    BhResult res;
    res.call.assign(G, false);
    res.adjusted.assign(G, 1.0);
    if (G == 0) return res;

    // Monotone adjustment: cumulative minimum of G*p_(k)/k from the top.
    double running = 1.0;
    std::vector<double> adj_sorted(G);
    for (std::size_t k = G; k-- > 0;) {
        const double v = p_values[order[k]] * static_cast<double>(G) /
                         static_cast<double>(k + 1);
        running = std::min(running, v);
        adj_sorted[k] = running;
    }
    for (std::size_t k = 0; k < G; ++k) res.adjusted[order[k]] = adj_sorted[k];

    // Step-up: largest k with p_(k) <= q* k/G; call everything at or below.
    std::size_t cutoff = 0;
    for (std::size_t k = 0; k < G; ++k)
        if (p_values[order[k]] <= q_star * static_cast<double>(k + 1) / static_cast<double>(G))
            cutoff = k + 1;
    for (std::size_t k = 0; k < cutoff; ++k) res.call[order[k]] = true;
    return res;
}

GeneInference decide(const GeneSummaries& summaries, const FitResult& fit,
                     const DecisionConfig& config) {
    config.validate();
    const std::size_t G = summaries.size();
    GeneInference out;
    out.gene_ids = summaries.gene_ids;
    const LikelihoodRatios lrs = likelihood_ratio(summaries, fit);
    out.lr = lrs.lr;
    out.t_post = lrs.t_post;
    out.lambda = lrs.lambda;
    out.local_fdr.resize(G);
    for (std::size_t g = 0; g < G; ++g) out.local_fdr[g] = fit.posterior_null(g);
    out.p_value = theoretical_null_pvalues(summaries, fit);
    const BhResult bh = bh_procedure(out.p_value, config.fdr_level);
    out.bh_adjusted = bh.adjusted;
    const std::vector<bool> local = classify_local_fdr(fit, config);
    out.call_local.resize(G);
    out.call_fdr.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        const bool effect_ok =
            std::fabs(summaries.d[g] - fit.params.tau) >= config.min_abs_effect;
        out.call_local[g] = local[g] && effect_ok;
        out.call_fdr[g] = bh.call[g] && effect_ok;
    }
    return out;
}

}  // namespace ebmix
