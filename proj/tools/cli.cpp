#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebmix/inference.hpp"
#include "ebmix/io.hpp"
#include "ebmix/multi.hpp"
#include "ebmix/simulation.hpp"
#include "ebmix/summarize.hpp"
#include "ebmix/variance_prior.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct FitOptions {
    std::string input, groups, groups_file, out_dir = ".", config_file;
    std::string model = "rr", prior_method = "ml", contrast = "helmert";
    std::string variance_plugin = "mean";
    int components = 0;  // 0 = default for the model kind
    bool paired = false;
    double tol = 1e-8;
    int max_iters = 2000;
    ebmix::DecisionConfig decision;
    int threads = 0;
};

void apply_config_file(FitOptions& opt) {
    if (opt.config_file.empty()) return;
    std::ifstream in(opt.config_file);
    if (!in) throw ebmix::ValidationError("cannot open config: " + opt.config_file);
    json cfg = json::parse(in, nullptr, true, true);
    static const std::vector<std::string> known = {
        "model",     "components", "paired",     "prior_method", "tol",
        "max_iters", "local_fdr",  "fdr",        "min_effect",   "threads"};
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ebmix::ValidationError("unknown config key: " + it.key());
    }
    // Flags override the file: only fill fields still at their defaults.
    const FitOptions defaults;
    if (cfg.contains("model") && opt.model == defaults.model)
        opt.model = cfg["model"].get<std::string>();
    if (cfg.contains("components") && opt.components == defaults.components)
        opt.components = cfg["components"].get<int>();
    if (cfg.contains("paired") && !opt.paired) opt.paired = cfg["paired"].get<bool>();
    if (cfg.contains("prior_method") && opt.prior_method == defaults.prior_method)
        opt.prior_method = cfg["prior_method"].get<std::string>();
    if (cfg.contains("tol") && opt.tol == defaults.tol) opt.tol = cfg["tol"].get<double>();
    if (cfg.contains("max_iters") && opt.max_iters == defaults.max_iters)
        opt.max_iters = cfg["max_iters"].get<int>();
    if (cfg.contains("local_fdr") &&
        opt.decision.local_fdr_threshold == defaults.decision.local_fdr_threshold)
        opt.decision.local_fdr_threshold = cfg["local_fdr"].get<double>();
    if (cfg.contains("fdr") && opt.decision.fdr_level == defaults.decision.fdr_level)
        opt.decision.fdr_level = cfg["fdr"].get<double>();
    if (cfg.contains("min_effect") &&
        opt.decision.min_abs_effect == defaults.decision.min_abs_effect)
        opt.decision.min_abs_effect = cfg["min_effect"].get<double>();
    if (cfg.contains("threads") && opt.threads == defaults.threads)
        opt.threads = cfg["threads"].get<int>();
}

std::vector<std::string> header_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ebmix::ValidationError("cannot open input: " + path);
    std::string header;
    std::getline(in, header);
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> samples;
    std::string field;
    std::istringstream ss(header);
    bool first = true;
    while (std::getline(ss, field, delim)) {
        if (!first) samples.push_back(field);
        first = false;
    }
    return samples;
}

ebmix::IngestResult load_matrix(const FitOptions& opt) {
    std::vector<std::string> labels;
    if (!opt.groups.empty()) {
        labels = ebmix::parse_group_list(opt.groups);
    } else if (!opt.groups_file.empty()) {
        labels = ebmix::read_group_map(opt.groups_file, header_samples(opt.input));
    } else if (opt.paired) {
        labels.assign(header_samples(opt.input).size(), "all");
    } else {
        throw ebmix::ValidationError("provide --groups, --groups-file, or --paired");
    }
    ebmix::IngestResult res = ebmix::ingest(opt.input, labels);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    return res;
}

int cmd_fit(FitOptions& opt) {
    apply_config_file(opt);
    opt.decision.validate();
    const ebmix::ModelKind kind = ebmix::model_kind_from_string(opt.model);
    if (opt.components == 0)
        opt.components =
            (kind == ebmix::ModelKind::RR || kind == ebmix::ModelKind::RG) ? 3 : 2;

    ebmix::IngestResult ing = load_matrix(opt);
    const int t = ing.matrix.n_groups();
    fs::create_directories(opt.out_dir);
    char buf[64];

    if (t > 2 && !opt.paired) {
        // Multi-treatment path via orthonormal contrasts.
        ebmix::ContrastMatrix contrast;
        if (opt.contrast == "helmert") {
            contrast = ebmix::helmert(t);
        } else {
            std::ifstream cf(opt.contrast);
            if (!cf)
                throw ebmix::ValidationError("cannot open contrast file: " + opt.contrast);
            std::vector<std::vector<double>> rows;
            std::string line;
            while (std::getline(cf, line)) {
                if (line.empty()) continue;
                std::vector<double> row;
                std::istringstream ss(line);
                double v;
                while (ss >> v) row.push_back(v);
                rows.push_back(row);
            }
            contrast.t = t;
            contrast.h.resize(static_cast<Eigen::Index>(rows.size()), t);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != static_cast<std::size_t>(t))
                    throw ebmix::ValidationError("contrast rows must have t entries");
                for (int c = 0; c < t; ++c)
                    contrast.h(static_cast<Eigen::Index>(r), c) =
                        rows[r][static_cast<std::size_t>(c)];
            }
            contrast.validate(1e-8);  // reject non-orthonormal contrasts
        }
        const ebmix::VectorSummaries vs = ebmix::summarize_multi(ing.matrix, contrast);
        const ebmix::GeneSummaries scalar = vs.scalar_view();
        ebmix::VariancePrior prior = opt.prior_method == "moments"
                                         ? ebmix::fit_variance_prior_moments(scalar)
                                         : ebmix::fit_variance_prior(scalar);
        ebmix::EmConfig cfg;
        cfg.tol = opt.tol;
        cfg.max_iters = opt.max_iters;
        cfg.plugin = opt.variance_plugin == "mode" ? ebmix::VariancePlugin::Mode
                                                   : ebmix::VariancePlugin::Mean;
        const ebmix::MultiFitResult fit = ebmix::fit_multi(vs, prior, cfg);
        const ebmix::MultiLrt lrt = ebmix::lrt_multi(vs, fit);
        json j;
        j["schema_version"] = 1;
        j["model"] = "rr-multi";
        j["groups"] = t;
        j["params"]["p1"] = fit.p1;
        j["params"]["sigma_psi2"] = fit.sigma_psi2;
        for (int i = 0; i < fit.h_tau.size(); ++i) {
            j["params"]["h_tau"].push_back(fit.h_tau(i));
            j["params"]["h_psi"].push_back(fit.h_psi(i));
        }
        j["prior"]["alpha"] = prior.alpha;
        j["prior"]["beta"] = prior.beta;
        j["convergence"]["converged"] = fit.converged;
        j["convergence"]["loglik"] = fit.loglik;
        std::ofstream jf(fs::path(opt.out_dir) / "fit.json");
        jf << j.dump(2) << "\n";
        std::ofstream gf(fs::path(opt.out_dir) / "genes.csv");
        gf << "gene,m,p1,local_fdr,lr,call_local\n";
        for (std::size_t g = 0; g < vs.size(); ++g) {
            const double lfdr = 1.0 - lrt.posterior_p1[g];
            gf << vs.gene_ids[g] << ',';
            std::snprintf(buf, sizeof(buf), "%.10g", vs.m[g]);
            gf << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.10g", lrt.posterior_p1[g]);
            gf << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.10g", lfdr);
            gf << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.10g", lrt.lr[g]);
            gf << buf << ',' << (lfdr < opt.decision.local_fdr_threshold ? 1 : 0) << "\n";
        }
        return fit.converged ? 0 : kExitNumeric;
    }

    const ebmix::SummarizeResult sr = opt.paired ? ebmix::paired_summarize(ing.matrix)
                                                 : ebmix::summarize(ing.matrix);
    for (const auto& r : sr.rejected)
        std::cerr << "warning: dropped gene " << r.gene_id << " (" << r.reason << ")\n";
    const ebmix::GeneSummaries& summaries = sr.summaries;
    ebmix::VariancePrior prior = opt.prior_method == "moments"
                                     ? ebmix::fit_variance_prior_moments(summaries)
                                     : ebmix::fit_variance_prior(summaries);
    ebmix::EmConfig cfg;
    cfg.tol = opt.tol;
    cfg.max_iters = opt.max_iters;
    cfg.components = opt.components;
    cfg.plugin = opt.variance_plugin == "mode" ? ebmix::VariancePlugin::Mode
                                               : ebmix::VariancePlugin::Mean;
    const ebmix::FitResult fit = ebmix::fit(summaries, prior, kind, cfg);
    const ebmix::GeneInference inference = ebmix::decide(summaries, fit, opt.decision);

    ebmix::write_fit_json((fs::path(opt.out_dir) / "fit.json").string(), fit, opt.decision);
    ebmix::write_genes_csv((fs::path(opt.out_dir) / "genes.csv").string(), summaries, fit,
                           inference);
    if (!fit.converged) {
        const std::string trace_path = (fs::path(opt.out_dir) / "trace.csv").string();
        ebmix::write_trace_csv(trace_path, fit.trace);
        std::cerr << "error: EM did not converge within " << opt.max_iters
                  << " iterations; trace dumped to " << trace_path << "\n";
        return kExitNumeric;
    }
    return 0;
}

struct SimulateOptions {
    std::string generator = "rr";
    std::size_t genes = 2000;
    int replicates = 25;
    double p1 = 0.05, p2 = 0.0, psi = 3.0, sigma_psi2 = 1.0, v0 = 1.0, tau = 0.0;
    int n1 = 6, n2 = 6;
    double alpha = 5.0, beta = 1.0 / 12.0;
    std::string variance_law = "inverse-gamma";
    std::uint64_t seed = 1;
    std::string methods = "rr,rg,rf,rh,fr,ff,fh,or";
    std::string out_dir = ".";
    std::string name = "scenario";
    int threads = 0;
};

int cmd_simulate(const SimulateOptions& opt) {
    ebmix::SimScenario scn;
    scn.name = opt.name;
    scn.generator = opt.generator == "rg" ? ebmix::Generator::RG : ebmix::Generator::RR;
    scn.n_genes = opt.genes;
    scn.n_replicates = opt.replicates;
    scn.p1 = opt.p1;
    scn.p2 = opt.p2;
    scn.psi = opt.psi;
    scn.sigma_psi2 = opt.sigma_psi2;
    scn.v0 = opt.v0;
    scn.tau = opt.tau;
    scn.n1 = opt.n1;
    scn.n2 = opt.n2;
    scn.alpha = opt.alpha;
    scn.beta = opt.beta;
    if (opt.variance_law == "log-normal")
        scn.variance_law = ebmix::VarianceLaw::LogNormal;
    scn.seed = opt.seed;

    std::vector<ebmix::Method> methods;
    for (const auto& tok : ebmix::parse_group_list(opt.methods))
        methods.push_back(ebmix::method_from_string(tok));

    const int threads = opt.threads > 0
                            ? opt.threads
                            : static_cast<int>(std::thread::hardware_concurrency());
    const ebmix::StudyReport report = ebmix::run_study({scn}, methods, std::max(threads, 1));
    fs::create_directories(opt.out_dir);
    ebmix::write_study_csv((fs::path(opt.out_dir) / "study.csv").string(), report);
    ebmix::write_manifest_json((fs::path(opt.out_dir) / "manifest.json").string(), report);
    for (const auto& e : report.errors) std::cerr << "warning: " << e << "\n";
    return 0;
}

struct ClassifyOptions {
    std::string fit_json, genes_csv, out = "genes_classified.csv";
    ebmix::DecisionConfig decision;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    return fields;
}

int cmd_classify(const ClassifyOptions& opt) {
    opt.decision.validate();
    std::ifstream jf(opt.fit_json);
    if (!jf) throw ebmix::ValidationError("cannot open fit: " + opt.fit_json);
    json j = json::parse(jf);
    const double tau = j["params"]["tau"].get<double>();

    std::ifstream in(opt.genes_csv);
    if (!in) throw ebmix::ValidationError("cannot open genes table: " + opt.genes_csv);
    std::string header;
    std::getline(in, header);
    const std::vector<std::string> cols = split_csv_line(header);
    auto col = [&](const std::string& name) {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end())
            throw ebmix::ValidationError("genes table missing column: " + name);
        return static_cast<std::size_t>(it - cols.begin());
    };
    const std::size_t c_gene = col("gene"), c_d = col("d"), c_lfdr = col("local_fdr"),
                      c_p = col("p_value");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    std::vector<double> pvals;
    pvals.reserve(rows.size());
    for (auto& r : rows) pvals.push_back(std::stod(r[c_p]));
    const ebmix::BhResult bh = ebmix::bh_procedure(pvals, opt.decision.fdr_level);
    std::ofstream out(opt.out);
    if (!out) throw ebmix::ValidationError("cannot write: " + opt.out);
    out << "gene,local_fdr,p_value,bh_adjusted,call_local,call_fdr\n";
    char buf[64];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double lfdr = std::stod(rows[i][c_lfdr]);
        const double d = std::stod(rows[i][c_d]);
        const bool effect_ok = std::fabs(d - tau) >= opt.decision.min_abs_effect;
        out << rows[i][c_gene] << ',' << rows[i][c_lfdr] << ',' << rows[i][c_p] << ',';
        std::snprintf(buf, sizeof(buf), "%.10g", bh.adjusted[i]);
        out << buf << ','
            << ((lfdr < opt.decision.local_fdr_threshold && effect_ok) ? 1 : 0) << ','
            << ((bh.call[i] && effect_ok) ? 1 : 0) << "\n";
    }
    return 0;
}

struct ReportOptions {
    std::string fit_json, genes_csv, study_csv, out_dir = ".";
};

int cmd_report(const ReportOptions& opt) {
    fs::create_directories(opt.out_dir);
    if (!opt.study_csv.empty()) {
        // Extract plot-ready accuracy/FDR curves from a study table.
        std::ifstream in(opt.study_csv);
        if (!in) throw ebmix::ValidationError("cannot open study: " + opt.study_csv);
        std::ofstream out(fs::path(opt.out_dir) / "curves.csv");
        std::string line;
        std::getline(in, line);
        out << line << "\n";
        while (std::getline(in, line)) {
            if (line.find(",accuracy,") != std::string::npos ||
                line.find(",fdr,") != std::string::npos)
                out << line << "\n";
        }
        return 0;
    }
    if (opt.fit_json.empty() || opt.genes_csv.empty())
        throw ebmix::ValidationError("report needs --study, or both --fit and --genes");
    std::ifstream jf(opt.fit_json);
    if (!jf) throw ebmix::ValidationError("cannot open fit: " + opt.fit_json);
    json j = json::parse(jf);

    std::ifstream in(opt.genes_csv);
    if (!in) throw ebmix::ValidationError("cannot open genes table: " + opt.genes_csv);
    std::string header;
    std::getline(in, header);
    const std::vector<std::string> cols = split_csv_line(header);
    auto col = [&](const std::string& name) {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end())
            throw ebmix::ValidationError("genes table missing column: " + name);
        return static_cast<std::size_t>(it - cols.begin());
    };
    const std::size_t c_gene = col("gene"), c_d = col("d"), c_m = col("m"),
                      c_s2 = col("sigma2_tilde");
    ebmix::GeneSummaries summaries;
    ebmix::FitResult fit;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        summaries.gene_ids.push_back(fields[c_gene]);
        summaries.d.push_back(std::stod(fields[c_d]));
        summaries.s.push_back(0.0);
        summaries.m.push_back(std::stod(fields[c_m]));
        summaries.f.push_back(1);
        summaries.n1.push_back(2);
        summaries.n2.push_back(2);
        fit.sigma2_d.push_back(std::stod(fields[c_s2]));
        fit.sigma2_eps.push_back(std::stod(fields[c_s2]) * 2.0);
    }
    fit.model = ebmix::model_kind_from_string(j["model"].get<std::string>());
    fit.components = j["components"].get<int>();
    fit.params.p1 = j["params"]["p1"].get<double>();
    fit.params.p2 = j["params"]["p2"].get<double>();
    fit.params.tau = j["params"]["tau"].get<double>();
    fit.params.psi = j["params"]["psi"].get<double>();
    if (j["params"].contains("sigma_psi2"))
        fit.params.sigma_psi2 = j["params"]["sigma_psi2"].get<double>();
    if (j["params"].contains("v0")) fit.params.v0 = j["params"]["v0"].get<double>();
    ebmix::write_density_csv((fs::path(opt.out_dir) / "density.csv").string(), summaries, fit);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical-Bayes two-groups mixture analysis for comparative "
                 "high-throughput experiments"};
    app.require_subcommand(1);

    FitOptions fit_opt;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a mixture model to expression data");
    fit_cmd->add_option("--input", fit_opt.input, "Expression table (TSV/CSV)")->required();
    fit_cmd->add_option("--groups", fit_opt.groups, "Comma-separated per-sample group labels");
    fit_cmd->add_option("--groups-file", fit_opt.groups_file, "Two-column sample->group map");
    fit_cmd->add_flag("--paired", fit_opt.paired, "Treat columns as paired differences");
    fit_cmd->add_option("--model", fit_opt.model, "Model kind: rr|rg|rf|rh")
        ->check(CLI::IsMember({"rr", "rg", "rf", "rh"}));
    fit_cmd->add_option("--components", fit_opt.components, "Mixture components (2 or 3)")
        ->check(CLI::IsMember({0, 2, 3}));
    fit_cmd->add_option("--prior-method", fit_opt.prior_method, "ml|moments")
        ->check(CLI::IsMember({"ml", "moments"}));
    fit_cmd->add_option("--variance-plugin", fit_opt.variance_plugin,
                        "Per-gene variance summary in the working densities")
        ->check(CLI::IsMember({"mean", "mode"}));
    fit_cmd->add_option("--contrast", fit_opt.contrast,
                        "helmert or a contrast-matrix file (multi-treatment)");
    fit_cmd->add_option("--tol", fit_opt.tol, "EM convergence tolerance");
    fit_cmd->add_option("--max-iters", fit_opt.max_iters, "EM iteration cap");
    fit_cmd->add_option("--local-fdr", fit_opt.decision.local_fdr_threshold,
                        "Local f.d.r. call threshold");
    fit_cmd->add_option("--fdr", fit_opt.decision.fdr_level, "BH FDR level q*");
    fit_cmd->add_option("--min-effect", fit_opt.decision.min_abs_effect,
                        "Minimum |d - tau| for a call");
    fit_cmd->add_option("--threads", fit_opt.threads, "Worker threads");
    fit_cmd->add_option("--out", fit_opt.out_dir, "Output directory");
    fit_cmd->add_option("--config", fit_opt.config_file, "JSON config (flags override)");

    SimulateOptions sim_opt;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the simulation study grid");
    sim_cmd->add_option("--generator", sim_opt.generator, "rr|rg generative law")
        ->check(CLI::IsMember({"rr", "rg"}));
    sim_cmd->add_option("--genes", sim_opt.genes, "Genes per replicate");
    sim_cmd->add_option("--replicates", sim_opt.replicates, "Replicates S");
    sim_cmd->add_option("--p1", sim_opt.p1, "Non-null probability");
    sim_cmd->add_option("--p2", sim_opt.p2, "Second non-null probability");
    sim_cmd->add_option("--psi", sim_opt.psi, "Non-null mean effect");
    sim_cmd->add_option("--sigma-psi2", sim_opt.sigma_psi2, "Effect variance (rr)");
    sim_cmd->add_option("--v0", sim_opt.v0, "Effect scale (rg)");
    sim_cmd->add_option("--tau", sim_opt.tau, "Mean treatment effect");
    sim_cmd->add_option("--n1", sim_opt.n1, "Group 1 size");
    sim_cmd->add_option("--n2", sim_opt.n2, "Group 2 size");
    sim_cmd->add_option("--alpha", sim_opt.alpha, "Variance prior shape");
    sim_cmd->add_option("--beta", sim_opt.beta, "Variance prior scale");
    sim_cmd->add_option("--variance-law", sim_opt.variance_law, "inverse-gamma|log-normal")
        ->check(CLI::IsMember({"inverse-gamma", "log-normal"}));
    sim_cmd->add_option("--seed", sim_opt.seed, "RNG seed");
    sim_cmd->add_option("--methods", sim_opt.methods, "Comma-separated method list");
    sim_cmd->add_option("--name", sim_opt.name, "Scenario name in reports");
    sim_cmd->add_option("--threads", sim_opt.threads, "Worker threads");
    sim_cmd->add_option("--out", sim_opt.out_dir, "Output directory");

    ClassifyOptions cls_opt;
    CLI::App* cls_cmd =
        app.add_subcommand("classify", "Re-apply decision thresholds to a fit");
    cls_cmd->add_option("--fit", cls_opt.fit_json, "fit.json from a previous run")->required();
    cls_cmd->add_option("--genes", cls_opt.genes_csv, "genes.csv from a previous run")
        ->required();
    cls_cmd->add_option("--local-fdr", cls_opt.decision.local_fdr_threshold,
                        "Local f.d.r. call threshold");
    cls_cmd->add_option("--fdr", cls_opt.decision.fdr_level, "BH FDR level q*");
    cls_cmd->add_option("--min-effect", cls_opt.decision.min_abs_effect,
                        "Minimum |d - tau| for a call");
    cls_cmd->add_option("--out", cls_opt.out, "Output CSV path");

    ReportOptions rep_opt;
    CLI::App* rep_cmd = app.add_subcommand("report", "Emit plot-ready curve data");
    rep_cmd->add_option("--fit", rep_opt.fit_json, "fit.json (with --genes)");
    rep_cmd->add_option("--genes", rep_opt.genes_csv, "genes.csv (with --fit)");
    rep_cmd->add_option("--study", rep_opt.study_csv, "study.csv to extract curves from");
    rep_cmd->add_option("--out", rep_opt.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_opt);
        if (sim_cmd->parsed()) return cmd_simulate(sim_opt);
        if (cls_cmd->parsed()) return cmd_classify(cls_opt);
        if (rep_cmd->parsed()) return cmd_report(rep_opt);
    } catch (const ebmix::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const ebmix::NonIdentifiableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ebmix::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
