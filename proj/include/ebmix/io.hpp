#pragma once

#include <string>

#include "ebmix/inference.hpp"
#include "ebmix/simulation.hpp"
#include "ebmix/types.hpp"

namespace ebmix {

struct IngestResult {
    ExpressionMatrix matrix;
    std::vector<std::string> warnings;  // e.g. deduplicated gene ids
};

/// Parse a delimited expression table (header row of sample names, first
/// column of gene ids; tab or comma, auto-detected) and attach group labels.
/// `groups` maps each sample to a label, either positionally
/// ("A,A,B,B") or via a two-column mapping file.
IngestResult ingest(const std::string& path, const std::vector<std::string>& group_labels);

/// Read a sample->group mapping file (two delimited columns).
std::vector<std::string> read_group_map(const std::string& path,
                                        const std::vector<std::string>& sample_names);

std::vector<std::string> parse_group_list(const std::string& csv);

/// Emit a matrix with full round-trip precision (17 significant digits).
void emit_matrix(const ExpressionMatrix& matrix, const std::string& path);

/// Per-gene report (10 significant digits, input gene order).
void write_genes_csv(const std::string& path, const GeneSummaries& summaries,
                     const FitResult& fit, const GeneInference& inference);

void write_fit_json(const std::string& path, const FitResult& fit,
                    const DecisionConfig& decision);

void write_trace_csv(const std::string& path, const EmTrace& trace);

void write_study_csv(const std::string& path, const StudyReport& report);

void write_manifest_json(const std::string& path, const StudyReport& report);

/// Fitted mixture density on a d-grid using the average estimated error
/// variance, plus the null and non-null component curves.
void write_density_csv(const std::string& path, const GeneSummaries& summaries,
                       const FitResult& fit, int grid_points = 256);

}  // namespace ebmix
