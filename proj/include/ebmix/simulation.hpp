#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "ebmix/em.hpp"
#include "ebmix/types.hpp"

namespace ebmix {

/// Which family's generative law produces the non-null effects:
/// rr draws psi_g ~ N(psi, sigma_psi2), rg draws psi_g ~ N(psi, v0 sigma2_eps_g).
enum class Generator { RR, RG };

enum class VarianceLaw { InverseGamma, LogNormal };

struct SimScenario {
    std::string name = "scenario";
    Generator generator = Generator::RR;
    std::size_t n_genes = 2000;
    int n_replicates = 25;
    double p1 = 0.05;
    double p2 = 0.0;
    double psi = 3.0;
    double sigma_psi2 = 1.0;  // rr generator
    double v0 = 1.0;          // rg generator
    double tau = 0.0;
    int n1 = 6;
    int n2 = 6;
    double alpha = 5.0;
    double beta = 1.0 / 12.0;
    VarianceLaw variance_law = VarianceLaw::InverseGamma;
    std::uint64_t seed = 1;

    void validate() const;
    int components() const { return p2 > 0.0 ? 3 : 2; }
};

struct SimData {
    ExpressionMatrix data;
    std::vector<int> truth;               // 0 null, 1 +psi component, 2 -psi component
    std::vector<double> sigma2_eps_true;  // latent error variances
};

/// One replicate under the scenario; fixed non-null count round(p1 G)
/// (and round(p2 G)), labels shuffled by the replicate-derived stream.
SimData generate(const SimScenario& scenario, int replicate);

/// Oracle posteriors: the E-step evaluated at the true generative
/// parameters (and true alpha/beta). Requires the scenario, so it cannot be
/// invoked outside a simulation.
Posteriors optimal_rule(const GeneSummaries& summaries, const SimScenario& scenario);

/// Empirical-quantile power: T_c is the (1-size) quantile of the pooled
/// null statistics; power is the fraction of non-null statistics above T_c.
double empirical_power(const std::vector<double>& statistics, const std::vector<int>& truth,
                       double size = 0.05);

struct CurvePoint {
    double threshold = 0.0;
    double accuracy = 0.0;
    double fdr = 0.0;
    std::size_t detections = 0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Accuracy (TP+TN)/(P+N) and FDR = FP/(FP+TP) (0 at zero detections) as the
/// null-posterior threshold sweeps `thresholds`; a gene is declared non-null
/// when its posterior null probability is strictly below the threshold.
std::vector<CurvePoint> accuracy_fdr_curves(const std::vector<double>& posterior_null,
                                            const std::vector<int>& truth,
                                            const std::vector<double>& thresholds);

enum class Method { RR, RG, RF, RH, FR, FF, FH, OR };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct StudyRow {
    std::string scenario;
    std::string method;
    double threshold = std::numeric_limits<double>::quiet_NaN();  // NaN = not applicable
    std::string metric;
    double value = 0.0;
};

struct StudyReport {
    std::vector<StudyRow> rows;
    std::vector<SimScenario> scenarios;
    std::vector<std::string> errors;  // per-cell failures, study continues
};

/// Full method grid over the scenarios: power (empirical-quantile),
/// accuracy/FDR curves averaged over replicates for the posterior methods,
/// and per-replicate parameter estimates.
StudyReport run_study(const std::vector<SimScenario>& scenarios,
                      const std::vector<Method>& methods, int threads = 1);

}  // namespace ebmix
