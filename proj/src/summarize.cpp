#include "ebmix/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ebmix/math.hpp"

namespace ebmix {

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "rr") return ModelKind::RR;
    if (s == "rg") return ModelKind::RG;
    if (s == "rf") return ModelKind::RF;
    if (s == "rh") return ModelKind::RH;
    if (s == "fr") return ModelKind::FR;
    if (s == "ff") return ModelKind::FF;
    if (s == "fh") return ModelKind::FH;
    throw ValidationError("unknown model kind: " + s);
}

int ExpressionMatrix::n_groups() const {
    int t = 0;
    for (int g : group_of_sample) t = std::max(t, g);
    return t;
}

void ExpressionMatrix::validate() const {
    if (gene_ids.size() != values.size())
        throw ValidationError("ExpressionMatrix: gene_ids/values length mismatch");
    const std::size_t ns = group_of_sample.size();
    if (ns == 0) throw ValidationError("ExpressionMatrix: no samples");
    const int t = n_groups();
    if (t < 1) throw ValidationError("ExpressionMatrix: no groups");
    std::vector<int> count(static_cast<std::size_t>(t), 0);
    for (int g : group_of_sample) {
        if (g < 1 || g > t) throw ValidationError("ExpressionMatrix: group label out of range");
        ++count[static_cast<std::size_t>(g - 1)];
    }
    for (int i = 0; i < t; ++i)
        if (count[static_cast<std::size_t>(i)] == 0)
            throw ValidationError("ExpressionMatrix: group " + std::to_string(i + 1) +
                                  " has no samples");
    for (std::size_t g = 0; g < values.size(); ++g) {
        if (values[g].size() != ns)
            throw ValidationError("ExpressionMatrix: ragged row for gene " + gene_ids[g]);
        for (double v : values[g])
            if (!std::isfinite(v))
                throw ValidationError("ExpressionMatrix: non-finite value for gene " +
                                      gene_ids[g]);
    }
}

void GeneSummaries::validate() const {
    const std::size_t n = d.size();
    if (gene_ids.size() != n || s.size() != n || m.size() != n || f.size() != n ||
        n1.size() != n || n2.size() != n)
        throw ValidationError("GeneSummaries: field length mismatch");
    for (std::size_t g = 0; g < n; ++g) {
        if (m[g] < 0.0) throw ValidationError("GeneSummaries: negative m for " + gene_ids[g]);
        if (f[g] < 1) throw ValidationError("GeneSummaries: f < 1 for " + gene_ids[g]);
    }
}

SummarizeResult summarize(const ExpressionMatrix& data) {
    data.validate();
    if (data.n_groups() != 2)
        throw ValidationError("summarize: exactly 2 groups required (got " +
                              std::to_string(data.n_groups()) + ")");
    std::vector<std::size_t> idx1, idx2;
    for (std::size_t j = 0; j < data.group_of_sample.size(); ++j)
        (data.group_of_sample[j] == 1 ? idx1 : idx2).push_back(j);

    SummarizeResult out;
    GeneSummaries& gs = out.summaries;
    const std::size_t G = data.n_genes();
    for (std::size_t g = 0; g < G; ++g) {
        const auto& row = data.values[g];
        const int n1 = static_cast<int>(idx1.size());
        const int n2 = static_cast<int>(idx2.size());
        const int f = n1 + n2 - 2;
        if (f < 1) {
            out.rejected.push_back({g, data.gene_ids[g], "f_g = 0 (one sample per group)"});
            continue;
        }
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j : idx1) m1 += row[j];
        for (std::size_t j : idx2) m2 += row[j];
        m1 /= n1;
        m2 /= n2;
        double sse = 0.0;
        for (std::size_t j : idx1) sse += (row[j] - m1) * (row[j] - m1);
        for (std::size_t j : idx2) sse += (row[j] - m2) * (row[j] - m2);
        gs.gene_ids.push_back(data.gene_ids[g]);
        gs.d.push_back(m1 - m2);
        gs.s.push_back(m1 + m2);
        gs.m.push_back(sse / f);
        gs.f.push_back(f);
        gs.n1.push_back(n1);
        gs.n2.push_back(n2);
    }
    gs.paired = false;
    return out;
}

SummarizeResult paired_summarize(const ExpressionMatrix& data) {
    data.validate();
    if (data.n_groups() != 1)
        throw ValidationError("paired_summarize: a single group of differences required");
    SummarizeResult out;
    GeneSummaries& gs = out.summaries;
    const std::size_t G = data.n_genes();
    const int n = static_cast<int>(data.n_samples());
    for (std::size_t g = 0; g < G; ++g) {
        if (n < 2) {
            out.rejected.push_back({g, data.gene_ids[g], "n < 2 differences"});
            continue;
        }
        const auto& row = data.values[g];
        double mu = 0.0;
        for (double v : row) mu += v;
        mu /= n;
        double sse = 0.0;
        for (double v : row) sse += (v - mu) * (v - mu);
        gs.gene_ids.push_back(data.gene_ids[g]);
        gs.d.push_back(mu);
        gs.s.push_back(mu);  // no sum statistic in the paired design
        gs.m.push_back(sse / (n - 1));
        gs.f.push_back(n - 1);
        gs.n1.push_back(n);
        gs.n2.push_back(0);
    }
    gs.paired = true;
    return out;
}

double null_density(double d, double tau, double var) {
    return normal_pdf(d, tau, var);
}

double nonnull_density(double d, double tau, double psi, double var_total) {
    return normal_pdf(d, tau + psi, var_total);
}

}  // namespace ebmix
