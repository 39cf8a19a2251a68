#include "ebmix/multi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ebmix/brent.hpp"
#include "ebmix/math.hpp"
#include "ebmix/variance_prior.hpp"

namespace ebmix {

void ContrastMatrix::validate(double tol) const {
    if (t < 2 || h.rows() != t - 1 || h.cols() != t)
        throw std::domain_error("ContrastMatrix: shape must be (t-1) x t with t >= 2");
    for (int r = 0; r < h.rows(); ++r)
        if (std::fabs(h.row(r).sum()) > tol)
            throw std::domain_error("ContrastMatrix: rows must sum to zero");
    const Eigen::MatrixXd gram = h * h.transpose();
    if ((gram - Eigen::MatrixXd::Identity(t - 1, t - 1)).cwiseAbs().maxCoeff() > tol)
        throw std::domain_error("ContrastMatrix: rows must be orthonormal");
}

ContrastMatrix helmert(int t) {
    if (t < 2) throw std::domain_error("helmert: t must be >= 2");
    ContrastMatrix c;
    c.t = t;
    c.h = Eigen::MatrixXd::Zero(t - 1, t);
    for (int k = 1; k < t; ++k) {
        const double v = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
        for (int j = 0; j < k; ++j) c.h(k - 1, j) = v;
        c.h(k - 1, k) = -static_cast<double>(k) * v;
    }
    return c;
}

GeneSummaries VectorSummaries::scalar_view() const {
    GeneSummaries s;
    s.gene_ids = gene_ids;
    const std::size_t G = size();
    s.d.assign(G, 0.0);
    s.s.assign(G, 0.0);
    s.m = m;
    s.f = f;
    s.n1.resize(G);
    s.n2.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        s.n1[g] = n[g][0];
        s.n2[g] = std::accumulate(n[g].begin() + 1, n[g].end(), 0);
    }
    return s;
}

VectorSummaries summarize_multi(const ExpressionMatrix& data, const ContrastMatrix& contrast) {
    data.validate();
    contrast.validate();
    const int t = data.n_groups();
    if (t != contrast.t)
        throw ValidationError("summarize_multi: contrast is for t = " +
                              std::to_string(contrast.t) + " but data has " +
                              std::to_string(t) + " groups");
    std::vector<std::vector<std::size_t>> idx(static_cast<std::size_t>(t));
    for (std::size_t j = 0; j < data.group_of_sample.size(); ++j)
        idx[static_cast<std::size_t>(data.group_of_sample[j] - 1)].push_back(j);

    VectorSummaries out;
    out.t = t;
    out.contrast = contrast;
    const std::size_t G = data.n_genes();
    std::vector<Eigen::VectorXd> dvecs;
    for (std::size_t g = 0; g < G; ++g) {
        const auto& row = data.values[g];
        int total = 0;
        for (int i = 0; i < t; ++i) total += static_cast<int>(idx[i].size());
        const int f = total - t;
        if (f < 1) continue;  // mirrors the scalar f_g = 0 rejection
        Eigen::VectorXd means(t);
        double sse = 0.0;
        std::vector<int> sizes(static_cast<std::size_t>(t));
        for (int i = 0; i < t; ++i) {
            double mu = 0.0;
            for (std::size_t j : idx[i]) mu += row[j];
            mu /= static_cast<double>(idx[i].size());
            means(i) = mu;
            for (std::size_t j : idx[i]) sse += (row[j] - mu) * (row[j] - mu);
            sizes[static_cast<std::size_t>(i)] = static_cast<int>(idx[i].size());
        }
        out.gene_ids.push_back(data.gene_ids[g]);
        dvecs.push_back(contrast.h * means);
        out.m.push_back(sse / f);
        out.f.push_back(f);
        out.n.push_back(sizes);
    }
    out.d.resize(static_cast<Eigen::Index>(dvecs.size()), t - 1);
    for (std::size_t g = 0; g < dvecs.size(); ++g)
        out.d.row(static_cast<Eigen::Index>(g)) = dvecs[g].transpose();
    return out;
}

namespace {

double mvn_logpdf_diag(const Eigen::VectorXd& centered_rot, const Eigen::VectorXd& eigvals,
                       double add) {
    // Density in the eigenbasis of L0g; `add` is the sigma_psi^2 I shift.
    const int k = static_cast<int>(centered_rot.size());
    double logdet = 0.0, quad = 0.0;
    for (int i = 0; i < k; ++i) {
        const double v = eigvals(i) + add;
        logdet += std::log(v);
        quad += centered_rot(i) * centered_rot(i) / v;
    }
    return -0.5 * (k * kLog2Pi + logdet + quad);
}

struct GeneGeometry {
    Eigen::MatrixXd u;        // eigenvectors of M_g = H diag(1/n) H'
    Eigen::VectorXd lam0;     // eigenvalues of L0g = s2eps * M_g
    Eigen::MatrixXd l0_inv;   // L0g^{-1}
};

}  // namespace

MultiFitResult fit_multi(const VectorSummaries& vs, const VariancePrior& prior,
                         const EmConfig& config) {
    const std::size_t G = vs.size();
    if (G == 0) throw ValidationError("fit_multi: no genes");
    if (config.components != 2)
        throw std::domain_error("fit_multi: only the two-group mixture is supported");
    const int k = vs.t - 1;

    MultiFitResult res;
    res.prior = prior;
    res.sigma2_eps.resize(G);
    std::vector<GeneGeometry> geo(G);
    vs.contrast.validate();
    for (std::size_t g = 0; g < G; ++g) {
        const bool mean_ok = 0.5 * vs.f[g] + prior.alpha > 1.05;
        res.sigma2_eps[g] = (config.plugin == VariancePlugin::Mean && mean_ok)
                                ? posterior_mean_variance(vs.m[g], vs.f[g], prior)
                                : posterior_mode_variance(vs.m[g], vs.f[g], prior);
        Eigen::VectorXd inv_n(vs.t);
        for (int i = 0; i < vs.t; ++i) inv_n(i) = 1.0 / vs.n[g][static_cast<std::size_t>(i)];
        const Eigen::MatrixXd m_g =
            vs.contrast.h * inv_n.asDiagonal() * vs.contrast.h.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_g);
        geo[g].u = es.eigenvectors();
        geo[g].lam0 = res.sigma2_eps[g] * es.eigenvalues();
        geo[g].l0_inv = geo[g].u *
                        geo[g].lam0.cwiseInverse().asDiagonal() *
                        geo[g].u.transpose();
        if (!(geo[g].lam0.minCoeff() > 0.0))
            throw ValidationError("fit_multi: singular null covariance for gene " +
                                  vs.gene_ids[g]);
    }

    // Data-driven start, mirroring the scalar auto-init.
    double p1 = 0.05;
    double sigma_psi2 = 0.25;
    Eigen::VectorXd h_tau(k), h_psi(k);
    for (int j = 0; j < k; ++j) {
        std::vector<double> col(G);
        for (std::size_t g = 0; g < G; ++g) col[g] = vs.d(static_cast<Eigen::Index>(g), j);
        h_tau(j) = median(col);
    }
    {
        std::vector<std::size_t> order(G);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return (vs.d.row(static_cast<Eigen::Index>(a)).transpose() - h_tau).norm() >
                   (vs.d.row(static_cast<Eigen::Index>(b)).transpose() - h_tau).norm();
        });
        const std::size_t top =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * G)));
        h_psi = Eigen::VectorXd::Zero(k);
        for (std::size_t i = 0; i < top; ++i)
            h_psi += vs.d.row(static_cast<Eigen::Index>(order[i])).transpose() - h_tau;
        h_psi /= static_cast<double>(top);
        // Spread of the extreme genes net of their average null variance,
        // mirroring the scalar auto-init.
        double spread = 0.0, lam0_bar = 0.0;
        for (int j = 0; j < k; ++j) {
            std::vector<double> col;
            for (std::size_t i = 0; i < top; ++i)
                col.push_back(vs.d(static_cast<Eigen::Index>(order[i]), j));
            if (col.size() >= 2) spread += sample_variance(col);
        }
        spread /= static_cast<double>(k);
        for (std::size_t i = 0; i < top; ++i)
            lam0_bar += geo[order[i]].lam0.mean();
        lam0_bar /= static_cast<double>(top);
        sigma_psi2 = std::max(spread - lam0_bar, 0.01);
    }

    std::vector<double> p1g(G, 0.0);
    std::vector<double> log_f0(G), log_f1(G);
    double loglik = 0.0;

    auto compute_posteriors = [&]() {
        loglik = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const Eigen::VectorXd d_g = vs.d.row(static_cast<Eigen::Index>(g)).transpose();
            const Eigen::VectorXd r0 = geo[g].u.transpose() * (d_g - h_tau);
            const Eigen::VectorXd r1 = geo[g].u.transpose() * (d_g - h_tau - h_psi);
            log_f0[g] = mvn_logpdf_diag(r0, geo[g].lam0, 0.0);
            log_f1[g] = mvn_logpdf_diag(r1, geo[g].lam0, sigma_psi2);
            const double l0 = (p1 < 1.0 ? std::log(1.0 - p1) : -1e308) + log_f0[g];
            const double l1 = (p1 > 0.0 ? std::log(p1) : -1e308) + log_f1[g];
            const double lse = log_sum_exp(l0, l1);
            p1g[g] = std::exp(l1 - lse);
            loglik += lse;
        }
    };

    compute_posteriors();
    res.trace.iterations.push_back({MixtureParams{}, loglik, 1.0});

    for (int iter = 0; iter < config.max_iters; ++iter) {
        // M-step.
        const double p1_new =
            std::accumulate(p1g.begin(), p1g.end(), 0.0) / static_cast<double>(G);

        Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd b0 = Eigen::VectorXd::Zero(k);
        for (std::size_t g = 0; g < G; ++g) {
            const Eigen::VectorXd d_g = vs.d.row(static_cast<Eigen::Index>(g)).transpose();
            a0 += (1.0 - p1g[g]) * geo[g].l0_inv;
            b0 += (1.0 - p1g[g]) * (geo[g].l0_inv * d_g);
        }
        const Eigen::VectorXd h_tau_new =
            (a0.norm() > 0.0) ? a0.ldlt().solve(b0).eval() : h_tau;

        double wsum = 0.0;
        for (double w : p1g) wsum += w;
        Eigen::VectorXd h_psi_new = Eigen::VectorXd::Zero(k);
        double sigma_psi2_new = 0.0;
        if (wsum > 0.0) {
            Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(k, k);
            Eigen::VectorXd b1 = Eigen::VectorXd::Zero(k);
            for (std::size_t g = 0; g < G; ++g) {
                if (p1g[g] == 0.0) continue;
                const Eigen::VectorXd d_g =
                    vs.d.row(static_cast<Eigen::Index>(g)).transpose();
                const Eigen::MatrixXd w1 =
                    geo[g].u *
                    (geo[g].lam0.array() + sigma_psi2).inverse().matrix().asDiagonal() *
                    geo[g].u.transpose();
                a1 += p1g[g] * w1;
                b1 += p1g[g] * (w1 * (d_g - h_tau_new));
            }
            h_psi_new = a1.ldlt().solve(b1);

            // Variance-component stationarity in the shared eigenbasis.
            const Eigen::VectorXd h_xi = h_tau_new + h_psi_new;
            std::vector<Eigen::VectorXd> rot(G);
            for (std::size_t g = 0; g < G; ++g)
                rot[g] = geo[g].u.transpose() *
                         (vs.d.row(static_cast<Eigen::Index>(g)).transpose() - h_xi);
            auto residual = [&](double sv) {
                double total = 0.0;
                for (std::size_t g = 0; g < G; ++g) {
                    if (p1g[g] == 0.0) continue;
                    double tr = 0.0, quad = 0.0;
                    for (int i = 0; i < k; ++i) {
                        const double v = geo[g].lam0(i) + sv;
                        tr += 1.0 / v;
                        quad += rot[g](i) * rot[g](i) / (v * v);
                    }
                    total += p1g[g] * (tr - quad);
                }
                return total;
            };
            auto q_slice = [&](double sv) {
                double total = 0.0;
                for (std::size_t g = 0; g < G; ++g) {
                    if (p1g[g] == 0.0) continue;
                    total += p1g[g] * mvn_logpdf_diag(rot[g], geo[g].lam0, sv);
                }
                return total;
            };
            double var_d = 0.0;
            for (int j = 0; j < k; ++j) {
                std::vector<double> col(G);
                for (std::size_t g = 0; g < G; ++g)
                    col[g] = vs.d(static_cast<Eigen::Index>(g), j);
                if (G >= 2) var_d = std::max(var_d, sample_variance(col));
            }
            const double hi = std::max(10.0 * var_d, 1e-6);
            std::vector<double> candidates = {0.0, std::min(sigma_psi2, hi)};
            if (residual(0.0) < 0.0 && residual(hi) > 0.0)
                candidates.push_back(brent_root(residual, 0.0, hi, 1e-14));
            sigma_psi2_new = candidates[0];
            double best_q = q_slice(candidates[0]);
            for (double cand : candidates) {
                const double qc = q_slice(cand);
                if (qc > best_q) {
                    best_q = qc;
                    sigma_psi2_new = cand;
                }
            }
        }

        p1 = p1_new;
        h_tau = h_tau_new;
        h_psi = h_psi_new;
        sigma_psi2 = sigma_psi2_new;

        const std::vector<double> prev_p1g = p1g;
        const double prev_loglik = loglik;
        compute_posteriors();
        double dpost = 0.0;
        for (std::size_t g = 0; g < G; ++g)
            dpost = std::max(dpost, std::fabs(p1g[g] - prev_p1g[g]));
        MixtureParams tp;
        tp.p1 = p1;
        tp.sigma_psi2 = sigma_psi2;
        res.trace.iterations.push_back({tp, loglik, dpost});
        const double rel =
            std::fabs(loglik - prev_loglik) / std::max(1.0, std::fabs(prev_loglik));
        if (rel < config.tol && dpost < config.posterior_tol) {
            res.converged = true;
            break;
        }
    }

    res.p1 = p1;
    res.h_tau = h_tau;
    res.h_psi = h_psi;
    res.sigma_psi2 = sigma_psi2;
    res.posterior_p1 = p1g;
    res.loglik = loglik;
    return res;
}

MultiLrt lrt_multi(const VectorSummaries& vs, const MultiFitResult& fit) {
    const std::size_t G = vs.size();
    const int k = vs.t - 1;
    MultiLrt out;
    out.lr.resize(G);
    out.posterior_p1.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        Eigen::VectorXd inv_n(vs.t);
        for (int i = 0; i < vs.t; ++i) inv_n(i) = 1.0 / vs.n[g][static_cast<std::size_t>(i)];
        const Eigen::MatrixXd l0 =
            fit.sigma2_eps[g] *
            (vs.contrast.h * inv_n.asDiagonal() * vs.contrast.h.transpose());
        const Eigen::VectorXd d_g = vs.d.row(static_cast<Eigen::Index>(g)).transpose();
        const Eigen::VectorXd x = d_g - fit.h_tau;
        double log_lr;
        if (fit.sigma_psi2 > 0.0) {
            const Eigen::MatrixXd la =
                fit.sigma_psi2 * Eigen::MatrixXd::Identity(k, k);
            const Eigen::MatrixXd sum_inv = (la + l0).inverse();
            const Eigen::MatrixXd lam_g = sum_inv * la;
            const Eigen::MatrixXd i_minus = sum_inv * l0;
            const Eigen::VectorXd gamma = lam_g * x + i_minus * fit.h_psi;
            // Gamma' (L0^{-1} Lg^{-1}) Gamma with L0^{-1} Lg^{-1} = L0^{-1} + LA^{-1}
            // since LA is a multiple of the identity.
            const Eigen::MatrixXd mid = l0.inverse() + la.inverse();
            log_lr = -0.5 * std::log(i_minus.determinant()) -
                     0.5 * gamma.dot(mid * gamma) +
                     0.5 * fit.h_psi.squaredNorm() / fit.sigma_psi2;
        } else {
            Eigen::LLT<Eigen::MatrixXd> llt(l0);
            const Eigen::VectorXd r1 = x - fit.h_psi;
            const double q0 = x.dot(llt.solve(x));
            const double q1 = r1.dot(llt.solve(r1));
            log_lr = -0.5 * q0 + 0.5 * q1;
        }
        out.lr[g] = std::exp(log_lr);
        // posterior odds: p1 f1 / (p0 f0) = (p1/p0) / LR
        const double l0term = (fit.p1 < 1.0 ? std::log(1.0 - fit.p1) : -1e308) + log_lr;
        const double l1term = fit.p1 > 0.0 ? std::log(fit.p1) : -1e308;
        out.posterior_p1[g] = std::exp(l1term - log_sum_exp(l0term, l1term));
    }
    return out;
}

}  // namespace ebmix
