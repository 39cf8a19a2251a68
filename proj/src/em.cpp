#include "ebmix/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ebmix/brent.hpp"
#include "ebmix/math.hpp"
#include "ebmix/variance_prior.hpp"

namespace ebmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

/// Non-null variance of d_g for the current parameters.
inline double nonnull_var(const GeneSummaries& s, const std::vector<double>& s2eps,
                          const std::vector<double>& s2d, const MixtureParams& p,
                          ModelKind kind, std::size_t g) {
    if (kind == ModelKind::RG) return (p.v0 + s.var_multiplier(g)) * s2eps[g];
    return p.sigma_psi2 + s2d[g];
}

struct LogTerms {
    double l0, l1, l2;  // log(p_k f_k(d_g)); l2 = -inf in two-component mode
};

LogTerms gene_log_terms(const GeneSummaries& s, const std::vector<double>& s2eps,
                        const std::vector<double>& s2d, const MixtureParams& p,
                        ModelKind kind, int components, std::size_t g) {
    const double p0 = 1.0 - p.p1 - p.p2;
    LogTerms t;
    t.l0 = safe_log(p0) + log_normal_pdf(s.d[g], p.tau, s2d[g]);
    const double v1 = nonnull_var(s, s2eps, s2d, p, kind, g);
    t.l1 = safe_log(p.p1) + log_normal_pdf(s.d[g], p.tau + p.psi, v1);
    t.l2 = (components == 3) ? safe_log(p.p2) + log_normal_pdf(s.d[g], p.tau - p.psi, v1)
                             : kNegInf;
    return t;
}

std::vector<double> null_variances(const GeneSummaries& s, const std::vector<double>& s2eps) {
    std::vector<double> s2d(s.size());
    for (std::size_t g = 0; g < s.size(); ++g) s2d[g] = s2eps[g] * s.var_multiplier(g);
    return s2d;
}

double variance_of_d(const GeneSummaries& s) {
    if (s.size() < 2) return 1.0;
    std::vector<double> d = s.d;
    return sample_variance(d);
}

/// Q-function slice in the variance component (sigma_psi^2 for the RR family,
/// v0 for RG), holding posteriors and means fixed.
struct VarianceSlice {
    const GeneSummaries& s;
    const std::vector<double>& s2eps;
    const std::vector<double>& s2d;
    const Posteriors& post;
    double tau, psi;
    ModelKind kind;

    double component_var(double v, std::size_t g) const {
        if (kind == ModelKind::RG) return (v + s.var_multiplier(g)) * s2eps[g];
        return v + s2d[g];
    }

    double q(double v) const {
        double total = 0.0;
        for (std::size_t g = 0; g < s.size(); ++g) {
            const double w = post.p1[g] + post.p2[g];
            if (w == 0.0) continue;
            const double var = component_var(v, g);
            if (post.p1[g] > 0.0)
                total += post.p1[g] * log_normal_pdf(s.d[g], tau + psi, var);
            if (post.p2[g] > 0.0)
                total += post.p2[g] * log_normal_pdf(s.d[g], tau - psi, var);
        }
        return total;
    }

    /// Stationarity residual; proportional to -dQ/dv. For the RR family this
    /// is sum p (1/(v+s2d) - r^2/(v+s2d)^2); for RG the v0 analog.
    double residual(double v) const {
        double total = 0.0;
        for (std::size_t g = 0; g < s.size(); ++g) {
            const double p1g = post.p1[g], p2g = post.p2[g];
            if (p1g == 0.0 && p2g == 0.0) continue;
            const double r1 = s.d[g] - tau - psi;
            const double r2 = s.d[g] - tau + psi;
            if (kind == ModelKind::RG) {
                const double vg = v + s.var_multiplier(g);
                total += (p1g + p2g) / vg -
                         (p1g * r1 * r1 + p2g * r2 * r2) / (vg * vg * s2eps[g]);
            } else {
                const double vg = v + s2d[g];
                total += (p1g + p2g) / vg - (p1g * r1 * r1 + p2g * r2 * r2) / (vg * vg);
            }
        }
        return total;
    }
};

/// Solve the variance-component update: Brent on the bracket when the
/// residual changes sign, then keep whichever candidate (0, root, previous)
/// maximizes the Q slice. `bracket_failed` reports a residual that never
/// changed sign on [0, hi].
double update_variance_component(const VarianceSlice& slice, double prev, double hi,
                                 bool* bracket_failed) {
    double total_w = 0.0;
    for (std::size_t g = 0; g < slice.post.size(); ++g)
        total_w += slice.post.p1[g] + slice.post.p2[g];
    if (total_w <= 0.0) return 0.0;  // sigma_psi^2 = 0 if p_{1,g} = 0 for all genes

    std::vector<double> candidates = {0.0, std::min(prev, hi)};
    const double r0 = slice.residual(0.0);
    const double rhi = slice.residual(hi);
    if (r0 < 0.0 && rhi > 0.0) {
        candidates.push_back(
            brent_root([&slice](double v) { return slice.residual(v); }, 0.0, hi, 1e-14));
    } else if (r0 < 0.0 && rhi <= 0.0) {
        if (bracket_failed) *bracket_failed = true;
    }
    double best = candidates[0], best_q = slice.q(candidates[0]);
    for (double c : candidates) {
        const double qc = slice.q(c);
        if (qc > best_q) {
            best_q = qc;
            best = c;
        }
    }
    return best;
}

}  // namespace

std::vector<double> resolve_sigma2_eps(const GeneSummaries& summaries,
                                       const VariancePrior& prior, ModelKind kind,
                                       VariancePlugin plugin) {
    const std::size_t G = summaries.size();
    std::vector<double> out(G);
    switch (kind) {
        case ModelKind::RR:
        case ModelKind::RG:
        case ModelKind::FR:
            for (std::size_t g = 0; g < G; ++g) {
                // Posterior mean needs f/2 + alpha > 1; fall back to the mode
                // for degenerate corners.
                const bool mean_ok = 0.5 * summaries.f[g] + prior.alpha > 1.05;
                out[g] = (plugin == VariancePlugin::Mean && mean_ok)
                             ? posterior_mean_variance(summaries.m[g], summaries.f[g], prior)
                             : posterior_mode_variance(summaries.m[g], summaries.f[g], prior);
            }
            break;
        case ModelKind::RF:
        case ModelKind::FF: {
            const double pooled = pooled_variance(summaries);
            if (!(pooled > 0.0))
                throw ValidationError("resolve_sigma2_eps: all m_g are zero");
            const double floor = 1e-8 * pooled;  // keeps zero-MSE genes finite
            for (std::size_t g = 0; g < G; ++g) out[g] = std::max(summaries.m[g], floor);
            break;
        }
        case ModelKind::RH:
        case ModelKind::FH: {
            const double pooled = pooled_variance(summaries);
            if (!(pooled > 0.0))
                throw ValidationError("resolve_sigma2_eps: all m_g are zero");
            std::fill(out.begin(), out.end(), pooled);
            break;
        }
    }
    return out;
}

double laplace_complete_loglik(const GeneSummaries& summaries, const VariancePrior& prior,
                               const MixtureParams& params, ModelKind kind, int components,
                               VariancePlugin plugin) {
    params.validate();
    const auto s2eps = resolve_sigma2_eps(summaries, prior, kind, plugin);
    const auto s2d = null_variances(summaries, s2eps);
    double total = 0.0;
    for (std::size_t g = 0; g < summaries.size(); ++g) {
        const LogTerms t = gene_log_terms(summaries, s2eps, s2d, params, kind, components, g);
        total += log_sum_exp(t.l0, t.l1, t.l2);
    }
    return total;
}

namespace {

Posteriors e_step_resolved(const GeneSummaries& summaries, const std::vector<double>& s2eps,
                           const std::vector<double>& s2d, const MixtureParams& params,
                           ModelKind kind, int components) {
    const std::size_t G = summaries.size();
    Posteriors post;
    post.p0.resize(G);
    post.p1.resize(G);
    post.p2.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        const LogTerms t = gene_log_terms(summaries, s2eps, s2d, params, kind, components, g);
        const double lse = log_sum_exp(t.l0, t.l1, t.l2);
        post.p0[g] = std::exp(t.l0 - lse);
        post.p1[g] = std::exp(t.l1 - lse);
        post.p2[g] = (components == 3) ? std::exp(t.l2 - lse) : 0.0;
    }
    return post;
}

MixtureParams m_step_resolved(const GeneSummaries& s, const std::vector<double>& s2eps,
                              const std::vector<double>& s2d, const Posteriors& post,
                              const MixtureParams& prev, ModelKind kind, int components,
                              bool* bracket_failed) {
    const std::size_t G = s.size();
    const double Gd = static_cast<double>(G);
    MixtureParams next = prev;
    next.p1 = std::accumulate(post.p1.begin(), post.p1.end(), 0.0) / Gd;
    next.p2 = (components == 3)
                  ? std::accumulate(post.p2.begin(), post.p2.end(), 0.0) / Gd
                  : 0.0;

    // Precision weights under the previous variance component.
    std::vector<double> w1(G);
    for (std::size_t g = 0; g < G; ++g)
        w1[g] = 1.0 / nonnull_var(s, s2eps, s2d, prev, kind, g);

    if (components == 2) {
        double s0 = 0.0, s0d = 0.0, s1 = 0.0, s1d = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const double w0 = post.p0[g] / s2d[g];
            s0 += w0;
            s0d += w0 * s.d[g];
            s1 += post.p1[g] * w1[g];
            s1d += post.p1[g] * w1[g] * s.d[g];
        }
        next.tau = (s0 > 0.0) ? s0d / s0 : prev.tau;
        next.psi = (s1 > 0.0) ? (s1d / s1 - next.tau) : 0.0;
    } else {
        // Joint stationarity of Q in (tau, psi): a 2x2 linear system that
        // reduces to the two-component updates when p2 == 0.
        double A = 0.0, B = 0.0, E = 0.0, C = 0.0, D = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const double w0 = post.p0[g] / s2d[g];
            const double wp = (post.p1[g] + post.p2[g]) * w1[g];
            const double wm = (post.p1[g] - post.p2[g]) * w1[g];
            A += w0 + wp;
            B += wm;
            E += wp;
            C += (w0 + wp) * s.d[g];
            D += wm * s.d[g];
        }
        const double det = A * E - B * B;
        if (E <= 0.0) {
            next.psi = 0.0;
            next.tau = (A > 0.0) ? C / A : prev.tau;
        } else if (det > 0.0) {
            next.tau = (C * E - B * D) / det;
            next.psi = (A * D - B * C) / det;
        }
    }

    VarianceSlice slice{s, s2eps, s2d, post, next.tau, next.psi, kind};
    const double var_d = variance_of_d(s);
    if (kind == ModelKind::RG) {
        double min_eps = std::numeric_limits<double>::infinity();
        for (double v : s2eps) min_eps = std::min(min_eps, v);
        const double hi = 10.0 * var_d / std::max(min_eps, 1e-300);
        next.v0 = update_variance_component(slice, prev.v0, hi, bracket_failed);
        next.sigma_psi2 = 0.0;
    } else {
        next.sigma_psi2 = update_variance_component(slice, prev.sigma_psi2, 10.0 * var_d,
                                                    bracket_failed);
        next.v0 = 0.0;
    }
    if (next.psi != 0.0 || next.sigma_psi2 != 0.0 || next.v0 != 0.0) {
        double total_w = 0.0;
        for (std::size_t g = 0; g < G; ++g) total_w += post.p1[g] + post.p2[g];
        if (total_w <= 0.0) {
            next.psi = 0.0;
            next.sigma_psi2 = 0.0;
            next.v0 = 0.0;
        }
    }
    return next;
}

/// Canonical gene order (sorted by values, not identity) so that EM
/// reductions accumulate identically under any input permutation; this is
/// what makes fitted parameters bit-reproducible across reorderings.
std::vector<std::size_t> canonical_order(const GeneSummaries& s) {
    std::vector<std::size_t> perm(s.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&s](std::size_t a, std::size_t b) {
        if (s.d[a] != s.d[b]) return s.d[a] < s.d[b];
        if (s.m[a] != s.m[b]) return s.m[a] < s.m[b];
        if (s.f[a] != s.f[b]) return s.f[a] < s.f[b];
        if (s.n1[a] != s.n1[b]) return s.n1[a] < s.n1[b];
        return s.n2[a] < s.n2[b];
    });
    return perm;
}

GeneSummaries reorder(const GeneSummaries& s, const std::vector<std::size_t>& perm) {
    GeneSummaries out;
    out.paired = s.paired;
    const std::size_t G = s.size();
    out.gene_ids.resize(G);
    out.d.resize(G);
    out.s.resize(G);
    out.m.resize(G);
    out.f.resize(G);
    out.n1.resize(G);
    out.n2.resize(G);
    for (std::size_t i = 0; i < G; ++i) {
        const std::size_t j = perm[i];
        out.gene_ids[i] = s.gene_ids[j];
        out.d[i] = s.d[j];
        out.s[i] = s.s[j];
        out.m[i] = s.m[j];
        out.f[i] = s.f[j];
        out.n1[i] = s.n1[j];
        out.n2[i] = s.n2[j];
    }
    return out;
}

MixtureParams auto_init(const GeneSummaries& s, const std::vector<double>& s2eps,
                        const std::vector<double>& s2d, ModelKind kind, int components) {
    MixtureParams p;
    p.p1 = 0.05;
    p.p2 = (components == 3) ? 0.05 : 0.0;
    std::vector<double> d = s.d;
    p.tau = median(d);

    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(s.d[a] - p.tau) > std::fabs(s.d[b] - p.tau);
    });
    const std::size_t k =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * s.size())));
    std::vector<double> top_d;
    double top_s2d = 0.0, top_abs = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        top_d.push_back(s.d[order[i]]);
        top_s2d += s2d[order[i]];
        top_abs += std::fabs(s.d[order[i]] - p.tau);
    }
    top_s2d /= static_cast<double>(k);
    // Two components: signed offset of the extreme genes. Three components:
    // their magnitude (the sign settles through p1/p2 during EM).
    p.psi = (components == 3) ? top_abs / static_cast<double>(k) : mean(top_d) - p.tau;
    const double spread = (top_d.size() >= 2) ? sample_variance(top_d) : 0.0;
    const double s2psi0 = std::max(spread - top_s2d, 0.01);
    if (kind == ModelKind::RG) {
        double eps_bar = 0.0;
        for (double v : s2eps) eps_bar += v;
        eps_bar /= static_cast<double>(s2eps.size());
        p.v0 = std::max(s2psi0 / eps_bar, 0.01);
    } else {
        p.sigma_psi2 = s2psi0;
    }
    return p;
}

double loglik_resolved(const GeneSummaries& s, const std::vector<double>& s2eps,
                       const std::vector<double>& s2d, const MixtureParams& p, ModelKind kind,
                       int components) {
    double total = 0.0;
    for (std::size_t g = 0; g < s.size(); ++g) {
        const LogTerms t = gene_log_terms(s, s2eps, s2d, p, kind, components, g);
        total += log_sum_exp(t.l0, t.l1, t.l2);
    }
    return total;
}

}  // namespace

Posteriors e_step(const GeneSummaries& summaries, const VariancePrior& prior,
                  const MixtureParams& params, ModelKind kind, int components,
                  VariancePlugin plugin) {
    params.validate();
    const auto s2eps = resolve_sigma2_eps(summaries, prior, kind, plugin);
    const auto s2d = null_variances(summaries, s2eps);
    return e_step_resolved(summaries, s2eps, s2d, params, kind, components);
}

MixtureParams m_step(const GeneSummaries& summaries, const VariancePrior& prior,
                     const Posteriors& post, const MixtureParams& prev, ModelKind kind,
                     int components, VariancePlugin plugin) {
    const auto s2eps = resolve_sigma2_eps(summaries, prior, kind, plugin);
    const auto s2d = null_variances(summaries, s2eps);
    return m_step_resolved(summaries, s2eps, s2d, post, prev, kind, components, nullptr);
}

FitResult fit(const GeneSummaries& summaries, const VariancePrior& prior, ModelKind kind,
              const EmConfig& config) {
    summaries.validate();
    if (!is_random_mean(kind))
        throw NonIdentifiableError(
            std::string("fit: p1 is non-identifiable under the fixed-mean kind ") +
            to_string(kind) +
            " (its EM sequence converges to 1); use fixed_effect_stats or "
            "fit_fixed_diagnostic");
    if (config.components != 2 && config.components != 3)
        throw std::domain_error("fit: components must be 2 or 3");
    if (config.components == 3 && kind != ModelKind::RR && kind != ModelKind::RG)
        throw std::domain_error("fit: three-group mode is limited to RR and RG");
    if (summaries.size() == 0) throw ValidationError("fit: no genes");

    // Work in canonical gene order; per-gene outputs are mapped back below.
    const std::vector<std::size_t> perm = canonical_order(summaries);
    const GeneSummaries canon = reorder(summaries, perm);
    const auto s2eps = resolve_sigma2_eps(canon, prior, kind, config.plugin);
    const auto s2d = null_variances(canon, s2eps);

    FitResult res;
    res.prior = prior;
    res.model = kind;
    res.components = config.components;
    res.plugin = config.plugin;

    MixtureParams params = config.init
                               ? *config.init
                               : auto_init(canon, s2eps, s2d, kind, config.components);
    params.validate();

    Posteriors post = e_step_resolved(canon, s2eps, s2d, params, kind, config.components);
    double loglik = loglik_resolved(canon, s2eps, s2d, params, kind, config.components);
    res.trace.iterations.push_back({params, loglik, 1.0});

    for (int iter = 0; iter < config.max_iters; ++iter) {
        bool bracket_failed = false;
        MixtureParams next = m_step_resolved(canon, s2eps, s2d, post, params, kind,
                                             config.components, &bracket_failed);
        if (bracket_failed) res.m_step_bracket_failed = true;
        Posteriors next_post =
            e_step_resolved(canon, s2eps, s2d, next, kind, config.components);
        const double next_loglik =
            loglik_resolved(canon, s2eps, s2d, next, kind, config.components);
        double dpost = 0.0;
        for (std::size_t g = 0; g < canon.size(); ++g) {
            dpost = std::max(dpost, std::fabs(next_post.p1[g] - post.p1[g]));
            dpost = std::max(dpost, std::fabs(next_post.p2[g] - post.p2[g]));
        }
        const double rel =
            std::fabs(next_loglik - loglik) / std::max(1.0, std::fabs(loglik));
        params = next;
        post = std::move(next_post);
        loglik = next_loglik;
        res.trace.iterations.push_back({params, loglik, dpost});
        if (rel < config.tol && dpost < config.posterior_tol) {
            res.converged = true;
            break;
        }
    }
    res.params = params;
    res.loglik = loglik;
    const std::size_t G = canon.size();
    res.posterior_p1.resize(G);
    res.posterior_p2.resize(G);
    res.sigma2_eps.resize(G);
    res.sigma2_d.resize(G);
    for (std::size_t i = 0; i < G; ++i) {
        res.posterior_p1[perm[i]] = post.p1[i];
        res.posterior_p2[perm[i]] = post.p2[i];
        res.sigma2_eps[perm[i]] = s2eps[i];
        res.sigma2_d[perm[i]] = s2d[i];
    }
    return res;
}

FixedDiagnostic fit_fixed_diagnostic(const GeneSummaries& summaries,
                                     const VariancePrior& prior, ModelKind kind,
                                     double p1_init, int max_iters, VariancePlugin plugin) {
    if (is_random_mean(kind))
        throw std::domain_error("fit_fixed_diagnostic: pass a fixed-mean kind (fr/ff/fh)");
    const auto s2eps = resolve_sigma2_eps(summaries, prior, kind, plugin);
    const auto s2d = null_variances(summaries, s2eps);
    const std::size_t G = summaries.size();

    // Precision-weighted tau start (the p1 = 0 limit of the tau update).
    double tw = 0.0, twd = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
        tw += 1.0 / s2d[g];
        twd += summaries.d[g] / s2d[g];
    }
    double tau = twd / tw;

    FixedDiagnostic diag;
    double p1 = p1_init;
    diag.p1_sequence.push_back(p1);
    std::vector<double> p1g(G);
    for (int it = 0; it < max_iters; ++it) {
        // With the fitted gene effect absorbing d_g - tau exactly, the
        // non-null density reduces to its normalizing constant.
        double acc = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const double z2 = (summaries.d[g] - tau) * (summaries.d[g] - tau) / s2d[g];
            p1g[g] = p1 / ((1.0 - p1) * std::exp(-0.5 * z2) + p1);
            acc += p1g[g];
        }
        p1 = acc / static_cast<double>(G);
        double s0 = 0.0, s0d = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const double w = (1.0 - p1g[g]) / s2d[g];
            s0 += w;
            s0d += w * summaries.d[g];
        }
        if (s0 > 0.0) tau = s0d / s0;
        diag.p1_sequence.push_back(p1);
        if (p1 > 1.0 - 1e-9) break;
    }
    diag.tau = tau;
    return diag;
}

FixedEffectStats fixed_effect_stats(const GeneSummaries& summaries, const VariancePrior& prior,
                                    ModelKind kind, VariancePlugin plugin) {
    const auto s2eps = resolve_sigma2_eps(summaries, prior, kind, plugin);
    FixedEffectStats out;
    out.sigma2_d = null_variances(summaries, s2eps);
    double tw = 0.0, twd = 0.0;
    for (std::size_t g = 0; g < summaries.size(); ++g) {
        tw += 1.0 / out.sigma2_d[g];
        twd += summaries.d[g] / out.sigma2_d[g];
    }
    out.tau = twd / tw;
    out.t.resize(summaries.size());
    for (std::size_t g = 0; g < summaries.size(); ++g)
        out.t[g] = (summaries.d[g] - out.tau) / std::sqrt(out.sigma2_d[g]);
    return out;
}

}  // namespace ebmix
