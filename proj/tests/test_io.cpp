#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ebmix/inference.hpp"
#include "ebmix/io.hpp"
#include "ebmix/rng.hpp"
#include "ebmix/summarize.hpp"
#include "ebmix/variance_prior.hpp"

using namespace ebmix;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("ebmix_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("ingest: happy path, group mapping, duplicates") {
    const std::string path = tmp_path("toy.tsv");
    write_file(path,
               "gene\ts1\ts2\ts3\ts4\n"
               "g1\t1.5\t2.5\t0.5\t1.0\n"
               "g2\t-1\t0\t1\t2\n");
    const IngestResult res = ingest(path, {"A", "A", "B", "B"});
    CHECK(res.matrix.n_genes() == 2);
    CHECK(res.matrix.n_groups() == 2);
    CHECK(res.matrix.values[0][1] == 2.5);
    CHECK(res.matrix.group_of_sample == std::vector<int>{1, 1, 2, 2});
    CHECK(res.warnings.empty());

    // duplicate ids get suffixed and warned
    write_file(path,
               "gene\ts1\ts2\n"
               "g1\t1\t2\n"
               "g1\t3\t4\n");
    const IngestResult dup = ingest(path, {"A", "B"});
    CHECK(dup.matrix.gene_ids[0] == "g1");
    CHECK(dup.matrix.gene_ids[1] == "g1#2");
    CHECK(dup.warnings.size() == 1);
}

TEST_CASE("ingest errors carry coordinates") {
    const std::string path = tmp_path("bad.tsv");
    write_file(path,
               "gene\ts1\ts2\n"
               "g1\t1.0\toops\n");
    try {
        ingest(path, {"A", "B"});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("g1") != std::string::npos);
        CHECK(msg.find("s2") != std::string::npos);
    }

    write_file(path,
               "gene\ts1\ts2\n"
               "g1\t1.0\n");
    CHECK_THROWS_AS(ingest(path, {"A", "B"}), ValidationError);  // ragged row

    write_file(path, "gene\ts1\ts2\ng1\t1\t2\n");
    CHECK_THROWS_AS(ingest(path, {"A"}), ValidationError);  // label count mismatch
}

TEST_CASE("matrix emit/ingest round trip is bitwise") {
    Rng rng(12);
    ExpressionMatrix m;
    m.gene_ids = {"a", "b", "c"};
    m.group_of_sample = {1, 1, 2, 2};
    for (int g = 0; g < 3; ++g) {
        std::vector<double> row;
        for (int j = 0; j < 4; ++j) row.push_back(rng.normal(0.0, 3.0));
        m.values.push_back(row);
    }
    const std::string path = tmp_path("roundtrip.tsv");
    emit_matrix(m, path);
    const IngestResult back = ingest(path, {"A", "A", "B", "B"});
    for (int g = 0; g < 3; ++g)
        for (int j = 0; j < 4; ++j)
            CHECK(back.matrix.values[g][j] == m.values[g][j]);
}

TEST_CASE("group map file") {
    const std::string path = tmp_path("groups.tsv");
    write_file(path, "s1\tA\ns2\tA\ns3\tB\n");
    const auto labels = read_group_map(path, {"s1", "s2", "s3"});
    CHECK(labels == std::vector<std::string>{"A", "A", "B"});
    CHECK_THROWS_AS(read_group_map(path, {"s1", "missing"}), ValidationError);
}

TEST_CASE("fit/genes/study writers produce stable schemas") {
    Rng rng(3);
    GeneSummaries s;
    for (int g = 0; g < 30; ++g) {
        s.gene_ids.push_back("g" + std::to_string(g));
        s.d.push_back(rng.normal(0, 1.5));
        s.s.push_back(0.0);
        s.m.push_back(0.5 + rng.uniform());
        s.f.push_back(10);
        s.n1.push_back(6);
        s.n2.push_back(6);
    }
    VariancePrior prior{4.0, 0.2};
    const FitResult fit = ebmix::fit(s, prior, ModelKind::RR);
    DecisionConfig dc;
    const GeneInference inf = decide(s, fit, dc);

    const std::string genes_path = tmp_path("genes.csv");
    write_genes_csv(genes_path, s, fit, inf);
    std::ifstream in(genes_path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "gene,d,m,sigma2_tilde,p1,p2,local_fdr,t_post,lambda,lr,p_value,bh_adjusted,"
          "call_local,call_fdr");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == s.size());

    const std::string fit_path = tmp_path("fit.json");
    write_fit_json(fit_path, fit, dc);
    const std::string fj = read_file(fit_path);
    CHECK(fj.find("\"schema_version\"") != std::string::npos);
    CHECK(fj.find("\"params\"") != std::string::npos);
    CHECK(fj.find("\"sigma_psi2\"") != std::string::npos);

    // identical fit -> byte-identical outputs
    const std::string genes2 = tmp_path("genes2.csv");
    write_genes_csv(genes2, s, fit, inf);
    CHECK(read_file(genes_path) == read_file(genes2));
}
