#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebmix {

/// Input data failed structural validation (bad file, bad shape, bad cell).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed (non-convergence, impossible estimate, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mixture fit requested for a model family whose p1 is non-identifiable.
class NonIdentifiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model families: first letter = gene-specific mean effects fixed/random,
/// second = error variances fixed-heterogeneous/homogeneous/random.
/// RG is the random-mean variant with effect variance proportional to the
/// gene's error variance (v0 * sigma^2_eps).
enum class ModelKind { RR, RG, RF, RH, FR, FF, FH };

inline bool is_random_mean(ModelKind k) {
    return k == ModelKind::RR || k == ModelKind::RG || k == ModelKind::RF ||
           k == ModelKind::RH;
}

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::RR: return "rr";
        case ModelKind::RG: return "rg";
        case ModelKind::RF: return "rf";
        case ModelKind::RH: return "rh";
        case ModelKind::FR: return "fr";
        case ModelKind::FF: return "ff";
        case ModelKind::FH: return "fh";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s);

/// Raw responses: genes x samples, each sample assigned to one group (1..t).
struct ExpressionMatrix {
    std::vector<std::string> gene_ids;             // size G
    std::vector<std::vector<double>> values;       // G rows, each of size N
    std::vector<int> group_of_sample;              // size N, labels in 1..t

    std::size_t n_genes() const { return gene_ids.size(); }
    std::size_t n_samples() const { return group_of_sample.size(); }
    int n_groups() const;

    /// Shape, label and finiteness invariants; throws ValidationError.
    void validate() const;
};

/// Per-gene sufficient statistics. For two-group data d/s are the difference
/// and sum of group means, m the pooled MSE with f = n1+n2-2. For paired
/// data d is the mean difference, m its sample variance, f = n-1, and the
/// variance multiplier becomes 1/n (the `paired` flag).
struct GeneSummaries {
    std::vector<std::string> gene_ids;
    std::vector<double> d;
    std::vector<double> s;
    std::vector<double> m;
    std::vector<int> f;
    std::vector<int> n1;
    std::vector<int> n2;
    bool paired = false;

    std::size_t size() const { return d.size(); }

    /// Sampling-variance multiplier for d_g: 1/n1+1/n2, or 1/n when paired.
    double var_multiplier(std::size_t g) const {
        if (paired) return 1.0 / static_cast<double>(n1[g]);
        return 1.0 / static_cast<double>(n1[g]) + 1.0 / static_cast<double>(n2[g]);
    }

    void validate() const;
};

/// A gene dropped during summarization, with the reason.
struct RejectedGene {
    std::size_t index;
    std::string gene_id;
    std::string reason;
};

/// Inverse-gamma hyperparameters for the error-variance prior
/// (sigma^-2 ~ Gamma(alpha, scale beta)).
struct VariancePrior {
    double alpha = 0.0;
    double beta = 0.0;
    enum class Method { MaxLikelihood, Moments } method = Method::MaxLikelihood;
    std::size_t zero_m_excluded = 0;  // genes with m=0 left out of the fit
};

/// Mixture parameters phi. Exactly one of sigma_psi2 / v0 is active,
/// selected by the model kind (RG uses v0).
struct MixtureParams {
    double p1 = 0.0;
    double p2 = 0.0;  // zero in two-component mode
    double tau = 0.0;
    double psi = 0.0;
    double sigma_psi2 = 0.0;
    double v0 = 0.0;

    void validate() const {
        if (!(p1 >= 0.0 && p2 >= 0.0 && p1 + p2 <= 1.0 + 1e-12))
            throw std::domain_error("MixtureParams: invalid mixture probabilities");
        if (sigma_psi2 < 0.0 || v0 < 0.0)
            throw std::domain_error("MixtureParams: negative variance component");
    }
};

}  // namespace ebmix
