#include "ebmix/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>

#include "ebmix/math.hpp"
#include "ebmix/rng.hpp"
#include "ebmix/summarize.hpp"
#include "ebmix/variance_prior.hpp"

namespace ebmix {

void SimScenario::validate() const {
    if (n_genes < 2) throw std::domain_error("SimScenario: n_genes must be >= 2");
    if (n_replicates < 1) throw std::domain_error("SimScenario: n_replicates must be >= 1");
    if (!(p1 >= 0.0 && p2 >= 0.0 && p1 + p2 <= 1.0))
        throw std::domain_error("SimScenario: invalid mixture probabilities");
    if (n1 < 2 || n2 < 2) throw std::domain_error("SimScenario: group sizes must be >= 2");
    if (!(alpha > 0.0 && beta > 0.0))
        throw std::domain_error("SimScenario: alpha, beta must be positive");
    if (sigma_psi2 < 0.0 || v0 < 0.0)
        throw std::domain_error("SimScenario: negative variance component");
    if (variance_law == VarianceLaw::LogNormal && !(alpha > 2.0))
        throw std::domain_error(
            "SimScenario: log-normal law matches inverse-gamma moments and needs alpha > 2");
}

SimData generate(const SimScenario& scn, int replicate) {
    scn.validate();
    Rng rng(scn.seed, static_cast<std::uint64_t>(replicate));
    const std::size_t G = scn.n_genes;

    SimData out;
    out.sigma2_eps_true.resize(G);
    if (scn.variance_law == VarianceLaw::InverseGamma) {
        for (std::size_t g = 0; g < G; ++g)
            out.sigma2_eps_true[g] = 1.0 / rng.gamma(scn.alpha, scn.beta);
    } else {
        // Log-normal matched to the inverse-gamma mean and variance.
        const double mu = 1.0 / (scn.beta * (scn.alpha - 1.0));
        const double var = mu * mu / (scn.alpha - 2.0);
        const double s2 = std::log(1.0 + var / (mu * mu));
        const double mlog = std::log(mu) - 0.5 * s2;
        for (std::size_t g = 0; g < G; ++g)
            out.sigma2_eps_true[g] = std::exp(mlog + std::sqrt(s2) * rng.normal());
    }

    // Fixed non-null counts: first k1 genes labeled 1, next k2 labeled 2,
    // then shuffled.
    const std::size_t k1 = static_cast<std::size_t>(std::lround(scn.p1 * G));
    const std::size_t k2 = static_cast<std::size_t>(std::lround(scn.p2 * G));
    out.truth.assign(G, 0);
    for (std::size_t g = 0; g < k1; ++g) out.truth[g] = 1;
    for (std::size_t g = k1; g < k1 + k2; ++g) out.truth[g] = 2;
    rng.shuffle(out.truth);

    std::vector<double> psi_g(G, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
        if (out.truth[g] == 0) continue;
        const double center = (out.truth[g] == 1) ? scn.psi : -scn.psi;
        const double var = (scn.generator == Generator::RR)
                               ? scn.sigma_psi2
                               : scn.v0 * out.sigma2_eps_true[g];
        psi_g[g] = rng.normal(center, std::sqrt(var));
    }

    ExpressionMatrix& mat = out.data;
    const int n = scn.n1 + scn.n2;
    mat.group_of_sample.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        mat.group_of_sample[static_cast<std::size_t>(j)] = j < scn.n1 ? 1 : 2;
    mat.gene_ids.resize(G);
    mat.values.assign(G, std::vector<double>(static_cast<std::size_t>(n)));
    for (std::size_t g = 0; g < G; ++g) {
        mat.gene_ids[g] = "g" + std::to_string(g + 1);
        const double sd = std::sqrt(out.sigma2_eps_true[g]);
        // Sum-to-zero parameterization: group means are +/-(tau + psi_g)/2.
        const double half = 0.5 * (scn.tau + psi_g[g]);
        for (int j = 0; j < n; ++j) {
            const double mean_ij = (j < scn.n1) ? half : -half;
            mat.values[g][static_cast<std::size_t>(j)] = mean_ij + rng.normal(0.0, sd);
        }
    }
    return out;
}

Posteriors optimal_rule(const GeneSummaries& summaries, const SimScenario& scn) {
    scn.validate();
    MixtureParams truth;
    truth.p1 = scn.p1;
    truth.p2 = scn.p2;
    truth.tau = scn.tau;
    truth.psi = scn.psi;
    ModelKind kind;
    if (scn.generator == Generator::RR) {
        truth.sigma_psi2 = scn.sigma_psi2;
        kind = ModelKind::RR;
    } else {
        truth.v0 = scn.v0;
        kind = ModelKind::RG;
    }
    VariancePrior prior;
    prior.alpha = scn.alpha;
    prior.beta = scn.beta;
    return e_step(summaries, prior, truth, kind, scn.components());
}

double empirical_power(const std::vector<double>& statistics, const std::vector<int>& truth,
                       double size) {
    if (statistics.size() != truth.size())
        throw std::invalid_argument("empirical_power: statistics/truth length mismatch");
    std::vector<double> nulls, nonnulls;
    for (std::size_t i = 0; i < truth.size(); ++i)
        (truth[i] == 0 ? nulls : nonnulls).push_back(statistics[i]);
    if (nulls.empty()) throw std::invalid_argument("empirical_power: no null genes");
    if (nonnulls.empty()) throw std::invalid_argument("empirical_power: no non-null genes");
    const double t_c = empirical_quantile(nulls, 1.0 - size);
    std::size_t above = 0;
    for (double s : nonnulls)
        if (s > t_c) ++above;
    return static_cast<double>(above) / static_cast<double>(nonnulls.size());
}

std::vector<CurvePoint> accuracy_fdr_curves(const std::vector<double>& posterior_null,
                                            const std::vector<int>& truth,
                                            const std::vector<double>& thresholds) {
    if (posterior_null.size() != truth.size())
        throw std::invalid_argument("accuracy_fdr_curves: length mismatch");
    const std::size_t G = truth.size();
    std::vector<CurvePoint> out;
    out.reserve(thresholds.size());
    for (double thr : thresholds) {
        CurvePoint pt;
        pt.threshold = thr;
        for (std::size_t g = 0; g < G; ++g) {
            const bool declared = posterior_null[g] < thr;
            const bool nonnull = truth[g] != 0;
            if (declared && nonnull) ++pt.tp;
            else if (declared && !nonnull) ++pt.fp;
            else if (!declared && !nonnull) ++pt.tn;
            else ++pt.fn;
        }
        pt.detections = pt.tp + pt.fp;
        pt.accuracy = static_cast<double>(pt.tp + pt.tn) / static_cast<double>(G);
        pt.fdr = pt.detections == 0
                     ? 0.0
                     : static_cast<double>(pt.fp) / static_cast<double>(pt.detections);
        out.push_back(pt);
    }
    return out;
}

const char* to_string(Method m) {
    switch (m) {
        case Method::RR: return "rr";
        case Method::RG: return "rg";
        case Method::RF: return "rf";
        case Method::RH: return "rh";
        case Method::FR: return "fr";
        case Method::FF: return "ff";
        case Method::FH: return "fh";
        case Method::OR: return "or";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "rr") return Method::RR;
    if (s == "rg") return Method::RG;
    if (s == "rf") return Method::RF;
    if (s == "rh") return Method::RH;
    if (s == "fr") return Method::FR;
    if (s == "ff") return Method::FF;
    if (s == "fh") return Method::FH;
    if (s == "or") return Method::OR;
    throw ValidationError("unknown method: " + s);
}

namespace {

constexpr double kCurveStep = 0.05;
constexpr int kCurvePoints = 11;  // thresholds 0, 0.05, ..., 0.5

std::vector<double> curve_thresholds() {
    std::vector<double> t(kCurvePoints);
    for (int i = 0; i < kCurvePoints; ++i) t[static_cast<std::size_t>(i)] = kCurveStep * i;
    return t;
}

struct MethodRep {
    bool ok = false;
    std::string error;
    std::vector<double> stats;          // per-gene test statistic
    std::vector<double> posterior_null; // empty for fixed-effect methods
    double p1_hat = std::numeric_limits<double>::quiet_NaN();
};

struct RepResult {
    std::vector<int> truth;
    std::vector<MethodRep> per_method;
};

bool is_mixture_method(Method m) {
    return m == Method::RR || m == Method::RG || m == Method::RF || m == Method::RH ||
           m == Method::OR;
}

RepResult run_replicate(const SimScenario& scn, int rep, const std::vector<Method>& methods) {
    RepResult rr;
    const SimData sim = generate(scn, rep);
    rr.truth = sim.truth;
    const GeneSummaries summaries = summarize(sim.data).summaries;
    VariancePrior prior;
    bool prior_ok = true;
    std::string prior_err;
    try {
        prior = fit_variance_prior(summaries);
    } catch (const std::exception& e) {
        prior_ok = false;
        prior_err = e.what();
    }
    rr.per_method.resize(methods.size());
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        MethodRep& mr = rr.per_method[mi];
        try {
            const Method m = methods[mi];
            if (m == Method::OR) {
                const Posteriors post = optimal_rule(summaries, scn);
                const std::size_t G = summaries.size();
                mr.stats.resize(G);
                mr.posterior_null.resize(G);
                for (std::size_t g = 0; g < G; ++g) {
                    mr.stats[g] = post.p1[g] + post.p2[g];
                    mr.posterior_null[g] = post.p0[g];
                }
            } else if (is_mixture_method(m)) {
                if (!prior_ok && (m == Method::RR || m == Method::RG))
                    throw NumericalError("variance prior failed: " + prior_err);
                ModelKind kind = model_kind_from_string(to_string(m));
                EmConfig cfg;
                cfg.components = scn.components();
                const FitResult fr = fit(summaries, prior, kind, cfg);
                const std::size_t G = summaries.size();
                mr.stats.resize(G);
                mr.posterior_null.resize(G);
                for (std::size_t g = 0; g < G; ++g) {
                    mr.stats[g] = fr.posterior_p1[g] + fr.posterior_p2[g];
                    mr.posterior_null[g] = fr.posterior_null(g);
                }
                mr.p1_hat = fr.params.p1 + fr.params.p2;
            } else {
                if (!prior_ok && m == Method::FR)
                    throw NumericalError("variance prior failed: " + prior_err);
                ModelKind kind = model_kind_from_string(to_string(m));
                const FixedEffectStats fs = fixed_effect_stats(summaries, prior, kind);
                mr.stats.resize(fs.t.size());
                for (std::size_t g = 0; g < fs.t.size(); ++g)
                    mr.stats[g] = std::fabs(fs.t[g]);
            }
            mr.ok = true;
        } catch (const std::exception& e) {
            mr.ok = false;
            mr.error = e.what();
        }
    }
    return rr;
}

}  // namespace

StudyReport run_study(const std::vector<SimScenario>& scenarios,
                      const std::vector<Method>& methods, int threads) {
    StudyReport report;
    report.scenarios = scenarios;
    for (const SimScenario& scn : scenarios) {
        const int S = scn.n_replicates;
        std::vector<RepResult> reps(static_cast<std::size_t>(S));
        if (threads <= 1) {
            for (int r = 0; r < S; ++r)
                reps[static_cast<std::size_t>(r)] = run_replicate(scn, r, methods);
        } else {
            std::vector<std::future<void>> futures;
            std::atomic<int> next{0};
            const int workers = std::min(threads, S);
            for (int w = 0; w < workers; ++w) {
                futures.push_back(std::async(std::launch::async, [&]() {
                    for (int r = next.fetch_add(1); r < S; r = next.fetch_add(1))
                        reps[static_cast<std::size_t>(r)] = run_replicate(scn, r, methods);
                }));
            }
            for (auto& f : futures) f.get();
        }

        const std::vector<double> thresholds = curve_thresholds();
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const Method m = methods[mi];
            std::vector<double> pooled_stats;
            std::vector<int> pooled_truth;
            std::vector<double> acc_sum(thresholds.size(), 0.0);
            std::vector<double> fdr_sum(thresholds.size(), 0.0);
            int curve_reps = 0;
            for (int r = 0; r < S; ++r) {
                const MethodRep& mr = reps[static_cast<std::size_t>(r)].per_method[mi];
                if (!mr.ok) {
                    std::ostringstream msg;
                    msg << scn.name << "/" << to_string(m) << "/rep" << r << ": " << mr.error;
                    report.errors.push_back(msg.str());
                    continue;
                }
                pooled_stats.insert(pooled_stats.end(), mr.stats.begin(), mr.stats.end());
                const auto& truth = reps[static_cast<std::size_t>(r)].truth;
                pooled_truth.insert(pooled_truth.end(), truth.begin(), truth.end());
                if (!mr.posterior_null.empty()) {
                    const auto curve = accuracy_fdr_curves(mr.posterior_null, truth, thresholds);
                    for (std::size_t i = 0; i < curve.size(); ++i) {
                        acc_sum[i] += curve[i].accuracy;
                        fdr_sum[i] += curve[i].fdr;
                    }
                    ++curve_reps;
                }
                if (std::isfinite(mr.p1_hat))
                    report.rows.push_back({scn.name, to_string(m),
                                           std::numeric_limits<double>::quiet_NaN(), "p1_hat",
                                           mr.p1_hat});
            }
            if (!pooled_stats.empty()) {
                bool any_nonnull = false;
                for (int t : pooled_truth) any_nonnull |= (t != 0);
                if (any_nonnull) {
                    report.rows.push_back({scn.name, to_string(m),
                                           std::numeric_limits<double>::quiet_NaN(), "power",
                                           empirical_power(pooled_stats, pooled_truth, 0.05)});
                }
            }
            if (curve_reps > 0) {
                for (std::size_t i = 0; i < thresholds.size(); ++i) {
                    report.rows.push_back({scn.name, to_string(m), thresholds[i], "accuracy",
                                           acc_sum[i] / curve_reps});
                    report.rows.push_back({scn.name, to_string(m), thresholds[i], "fdr",
                                           fdr_sum[i] / curve_reps});
                }
            }
        }
    }
    return report;
}

}  // namespace ebmix
