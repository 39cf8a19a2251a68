#include "ebmix/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ebmix/math.hpp"

namespace ebmix {

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = strip(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

char detect_delim(const std::string& header) {
    return header.find('\t') != std::string::npos ? '\t' : ',';
}

}  // namespace

std::vector<std::string> parse_group_list(const std::string& csv) {
    std::vector<std::string> out;
    for (auto& tok : split(csv, ',')) {
        const std::string t = strip(tok);
        if (t.empty()) throw ValidationError("empty group label in list");
        out.push_back(t);
    }
    return out;
}

std::vector<std::string> read_group_map(const std::string& path,
                                        const std::vector<std::string>& sample_names) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open group map: " + path);
    std::map<std::string, std::string> mapping;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = strip(line);
        if (t.empty()) continue;
        const char delim = t.find('\t') != std::string::npos ? '\t' : ',';
        const auto fields = split(t, delim);
        if (fields.size() != 2)
            throw ValidationError("group map line needs two columns: " + line);
        mapping[strip(fields[0])] = strip(fields[1]);
    }
    std::vector<std::string> out;
    for (const auto& s : sample_names) {
        auto it = mapping.find(s);
        if (it == mapping.end())
            throw ValidationError("sample '" + s + "' missing from group map " + path);
        out.push_back(it->second);
    }
    return out;
}

IngestResult ingest(const std::string& path, const std::vector<std::string>& group_labels) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("empty input: " + path);
    const char delim = detect_delim(header);
    auto head = split(strip(header), delim);
    if (head.size() < 2) throw ValidationError("header needs gene-id column plus samples");
    std::vector<std::string> samples(head.begin() + 1, head.end());
    const std::size_t ns = samples.size();
    if (group_labels.size() != ns)
        throw ValidationError("got " + std::to_string(group_labels.size()) +
                              " group labels for " + std::to_string(ns) + " samples");

    IngestResult res;
    // Group labels to 1..t in first-appearance order.
    std::vector<std::string> seen;
    res.matrix.group_of_sample.resize(ns);
    for (std::size_t j = 0; j < ns; ++j) {
        auto it = std::find(seen.begin(), seen.end(), group_labels[j]);
        if (it == seen.end()) {
            seen.push_back(group_labels[j]);
            it = seen.end() - 1;
        }
        res.matrix.group_of_sample[j] = static_cast<int>(it - seen.begin()) + 1;
    }

    std::map<std::string, int> id_count;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) continue;
        auto fields = split(strip(line), delim);
        if (fields.size() != ns + 1)
            throw ValidationError("row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(ns + 1));
        std::string id = strip(fields[0]);
        const int occurrence = ++id_count[id];
        if (occurrence > 1) {
            res.warnings.push_back("duplicate gene id '" + id + "' renamed to '" + id + "#" +
                                   std::to_string(occurrence) + "'");
            id += "#" + std::to_string(occurrence);
        }
        std::vector<double> vals(ns);
        for (std::size_t j = 0; j < ns; ++j) {
            if (!parse_double(fields[j + 1], vals[j]))
                throw ValidationError("non-numeric cell at gene '" + id + "', sample '" +
                                      samples[j] + "' (row " + std::to_string(row) +
                                      ", column " + std::to_string(j + 2) + ")");
        }
        res.matrix.gene_ids.push_back(id);
        res.matrix.values.push_back(std::move(vals));
    }
    res.matrix.validate();
    return res;
}

void emit_matrix(const ExpressionMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write: " + path);
    out << "gene";
    for (std::size_t j = 0; j < matrix.n_samples(); ++j) out << "\ts" << (j + 1);
    out << "\n";
    for (std::size_t g = 0; g < matrix.n_genes(); ++g) {
        out << matrix.gene_ids[g];
        for (double v : matrix.values[g]) out << '\t' << fmt(v, "%.17g");
        out << "\n";
    }
}

void write_genes_csv(const std::string& path, const GeneSummaries& summaries,
                     const FitResult& fit, const GeneInference& inference) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write: " + path);
    out << "gene,d,m,sigma2_tilde,p1,p2,local_fdr,t_post,lambda,lr,p_value,bh_adjusted,"
           "call_local,call_fdr\n";
    for (std::size_t g = 0; g < summaries.size(); ++g) {
        out << summaries.gene_ids[g] << ',' << fmt(summaries.d[g]) << ','
            << fmt(summaries.m[g]) << ',' << fmt(fit.sigma2_d[g]) << ','
            << fmt(fit.posterior_p1[g]) << ',' << fmt(fit.posterior_p2[g]) << ','
            << fmt(inference.local_fdr[g]) << ',' << fmt(inference.t_post[g]) << ','
            << fmt(inference.lambda[g]) << ',' << fmt(inference.lr[g]) << ','
            << fmt(inference.p_value[g]) << ',' << fmt(inference.bh_adjusted[g]) << ','
            << (inference.call_local[g] ? 1 : 0) << ',' << (inference.call_fdr[g] ? 1 : 0)
            << "\n";
    }
}

void write_fit_json(const std::string& path, const FitResult& fit,
                    const DecisionConfig& decision) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["model"] = to_string(fit.model);
    j["components"] = fit.components;
    j["params"]["p1"] = fit.params.p1;
    j["params"]["p2"] = fit.params.p2;
    j["params"]["tau"] = fit.params.tau;
    j["params"]["psi"] = fit.params.psi;
    if (fit.model == ModelKind::RG)
        j["params"]["v0"] = fit.params.v0;
    else
        j["params"]["sigma_psi2"] = fit.params.sigma_psi2;
    j["prior"]["alpha"] = fit.prior.alpha;
    j["prior"]["beta"] = fit.prior.beta;
    j["prior"]["method"] =
        fit.prior.method == VariancePrior::Method::MaxLikelihood ? "ml" : "moments";
    j["variance_plugin"] = fit.plugin == VariancePlugin::Mean ? "mean" : "mode";
    j["convergence"]["converged"] = fit.converged;
    j["convergence"]["iterations"] = fit.trace.iterations.size() - 1;
    j["convergence"]["loglik"] = fit.loglik;
    j["decision"]["local_fdr_threshold"] = decision.local_fdr_threshold;
    j["decision"]["fdr_level"] = decision.fdr_level;
    j["decision"]["min_abs_effect"] = decision.min_abs_effect;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write: " + path);
    out << j.dump(2) << "\n";
}

void write_trace_csv(const std::string& path, const EmTrace& trace) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write: " + path);
    out << "iteration,p1,p2,tau,psi,sigma_psi2,v0,loglik,max_posterior_change\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const EmIterate& it = trace.iterations[i];
        out << i << ',' << fmt(it.params.p1) << ',' << fmt(it.params.p2) << ','
            << fmt(it.params.tau) << ',' << fmt(it.params.psi) << ','
            << fmt(it.params.sigma_psi2) << ',' << fmt(it.params.v0) << ','
            << fmt(it.loglik) << ',' << fmt(it.max_posterior_change) << "\n";
    }
}

void write_study_csv(const std::string& path, const StudyReport& report) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write: " + path);
    out << "scenario,method,threshold,metric,value\n";
    for (const StudyRow& r : report.rows) {
        out << r.scenario << ',' << r.method << ',';
        if (std::isfinite(r.threshold)) out << fmt(r.threshold);
        out << ',' << r.metric << ',' << fmt(r.value) << "\n";
    }
}

void write_manifest_json(const std::string& path, const StudyReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["scenarios"] = nlohmann::json::array();
    for (const SimScenario& s : report.scenarios) {
        nlohmann::json js;
        js["name"] = s.name;
        js["generator"] = s.generator == Generator::RR ? "rr" : "rg";
        js["n_genes"] = s.n_genes;
        js["n_replicates"] = s.n_replicates;
        js["p1"] = s.p1;
        js["p2"] = s.p2;
        js["psi"] = s.psi;
        js["sigma_psi2"] = s.sigma_psi2;
        js["v0"] = s.v0;
        js["tau"] = s.tau;
        js["n1"] = s.n1;
        js["n2"] = s.n2;
        js["alpha"] = s.alpha;
        js["beta"] = s.beta;
        js["variance_law"] =
            s.variance_law == VarianceLaw::InverseGamma ? "inverse-gamma" : "log-normal";
        js["seed"] = s.seed;
        j["scenarios"].push_back(js);
    }
    j["errors"] = report.errors;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write: " + path);
    out << j.dump(2) << "\n";
}

void write_density_csv(const std::string& path, const GeneSummaries& summaries,
                       const FitResult& fit, int grid_points) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write: " + path);
    double lo = summaries.d[0], hi = summaries.d[0];
    for (double d : summaries.d) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    const double pad = 0.1 * (hi - lo + 1e-12);
    lo -= pad;
    hi += pad;
    double s2d_bar = 0.0, s2eps_bar = 0.0;
    for (std::size_t g = 0; g < summaries.size(); ++g) {
        s2d_bar += fit.sigma2_d[g];
        s2eps_bar += fit.sigma2_eps[g];
    }
    s2d_bar /= static_cast<double>(summaries.size());
    s2eps_bar /= static_cast<double>(summaries.size());
    double c_bar = 0.0;
    for (std::size_t g = 0; g < summaries.size(); ++g) c_bar += summaries.var_multiplier(g);
    c_bar /= static_cast<double>(summaries.size());
    const MixtureParams& p = fit.params;
    const double v1_bar = (fit.model == ModelKind::RG) ? (p.v0 + c_bar) * s2eps_bar
                                                       : p.sigma_psi2 + s2d_bar;
    out << "d,f0,f1,f2,mixture\n";
    for (int i = 0; i < grid_points; ++i) {
        const double d = lo + (hi - lo) * i / (grid_points - 1);
        const double f0 = normal_pdf(d, p.tau, s2d_bar);
        const double f1 = normal_pdf(d, p.tau + p.psi, v1_bar);
        const double f2 = fit.components == 3 ? normal_pdf(d, p.tau - p.psi, v1_bar) : 0.0;
        const double mix = (1.0 - p.p1 - p.p2) * f0 + p.p1 * f1 + p.p2 * f2;
        out << fmt(d) << ',' << fmt(f0) << ',' << fmt(f1) << ',' << fmt(f2) << ','
            << fmt(mix) << "\n";
    }
}

}  // namespace ebmix
