#pragma once

#include <Eigen/Dense>

#include "ebmix/em.hpp"
#include "ebmix/types.hpp"

namespace ebmix {

/// (t-1) x t orthonormal contrast matrix; rows sum to zero, H H' = I.
struct ContrastMatrix {
    Eigen::MatrixXd h;
    int t = 0;

    void validate(double tol = 1e-12) const;
};

/// Helmert contrasts: row k has k entries 1/sqrt(k(k+1)), one -k/sqrt(k(k+1)).
ContrastMatrix helmert(int t);

/// Per-gene contrast-space summaries d_g = H Ybar_g with pooled m_g and
/// f_g = sum_i n_ig - t.
struct VectorSummaries {
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd d;                    // G x (t-1)
    std::vector<double> m;
    std::vector<int> f;
    std::vector<std::vector<int>> n;      // per-gene group sizes, each of size t
    ContrastMatrix contrast;              // the H that produced d
    int t = 0;

    std::size_t size() const { return m.size(); }

    GeneSummaries scalar_view() const;    // for the shared variance-prior fit
};

VectorSummaries summarize_multi(const ExpressionMatrix& data, const ContrastMatrix& contrast);

struct MultiFitResult {
    double p1 = 0.0;
    Eigen::VectorXd h_tau;   // H tau, length t-1
    Eigen::VectorXd h_psi;   // H psi
    double sigma_psi2 = 0.0;
    VariancePrior prior;
    std::vector<double> posterior_p1;
    std::vector<double> sigma2_eps;
    EmTrace trace;           // scalar loglik per iteration (params unused)
    bool converged = false;
    double loglik = 0.0;
};

/// EM fit of the multivariate two-groups model with null N(H tau, L0g) and
/// non-null N(H tau + H psi, L0g + sigma_psi^2 I).
MultiFitResult fit_multi(const VectorSummaries& vsummaries, const VariancePrior& prior,
                         const EmConfig& config = EmConfig{});

struct MultiLrt {
    std::vector<double> lr;
    std::vector<double> posterior_p1;
};

/// Multivariate likelihood ratios and the mixture posteriors they imply.
MultiLrt lrt_multi(const VectorSummaries& vsummaries, const MultiFitResult& fit);

}  // namespace ebmix
