#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kBin = EBMIX_CLI_PATH;

int run(const std::string& args) {
    const int rc = std::system((kBin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path sandbox() {
    const fs::path dir = fs::temp_directory_path() / "ebmix_cli_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("cli: fit on a simulated table, classify, report, determinism") {
    const fs::path dir = sandbox();
    const fs::path input = dir / "toy.tsv";
    {
        // small deterministic table: 60 genes, 12 samples
        std::ofstream out(input);
        out << "gene";
        for (int j = 1; j <= 12; ++j) out << "\ts" << j;
        out << "\n";
        unsigned long long state = 88172645463325252ull;
        auto rnd = [&state]() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return static_cast<double>(state % 10000) / 10000.0 - 0.5;
        };
        for (int g = 0; g < 60; ++g) {
            out << "g" << g;
            const double shift = (g < 6) ? 2.0 : 0.0;
            for (int j = 0; j < 12; ++j)
                out << '\t' << (rnd() + (j < 6 ? shift : 0.0));
            out << "\n";
        }
    }
    const std::string groups = "A,A,A,A,A,A,B,B,B,B,B,B";
    const fs::path out1 = dir / "run1";
    const fs::path out2 = dir / "run2";
    REQUIRE(run("fit --input " + input.string() + " --groups " + groups + " --out " +
                out1.string()) == 0);
    REQUIRE(run("fit --input " + input.string() + " --groups " + groups + " --out " +
                out2.string()) == 0);
    CHECK(fs::exists(out1 / "fit.json"));
    CHECK(fs::exists(out1 / "genes.csv"));
    CHECK(slurp(out1 / "genes.csv") == slurp(out2 / "genes.csv"));  // byte identical
    CHECK(slurp(out1 / "fit.json") == slurp(out2 / "fit.json"));

    // classify with threshold 0 emits zero local calls
    const fs::path cls = dir / "reclassified.csv";
    REQUIRE(run("classify --fit " + (out1 / "fit.json").string() + " --genes " +
                (out1 / "genes.csv").string() + " --local-fdr 0 --out " +
                cls.string()) == 0);
    std::ifstream in(cls);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.rfind(",1,");
        (void)pos;
        std::istringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        CHECK(fields[4] == "0");  // call_local column
    }

    // report produces a density grid
    REQUIRE(run("report --fit " + (out1 / "fit.json").string() + " --genes " +
                (out1 / "genes.csv").string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "density.csv"));
}

TEST_CASE("cli: simulate writes study.csv and manifest.json") {
    const fs::path dir = sandbox();
    REQUIRE(run("simulate --genes 300 --replicates 2 --p1 0.1 --seed 4 --methods rr,or "
                "--name smoke --out " +
                dir.string()) == 0);
    CHECK(fs::exists(dir / "study.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
    std::ifstream in(dir / "study.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "scenario,method,threshold,metric,value");
}

TEST_CASE("cli: exit codes for usage, data and numerical errors") {
    const fs::path dir = sandbox();
    CHECK(run("frobnicate") == 1);                       // unknown subcommand
    CHECK(run("fit --groups A,B") == 1);                 // missing required --input
    CHECK(run("fit --input /nonexistent.tsv --groups A,B") == 2);

    const fs::path bad = dir / "bad.tsv";
    {
        std::ofstream out(bad);
        out << "gene\ts1\ts2\ng1\t1\tnotanumber\n";
    }
    CHECK(run("fit --input " + bad.string() + " --groups A,B") == 2);
}

TEST_CASE("cli: golden-file outputs on the frozen toy dataset") {
    const fs::path golden = fs::path(EBMIX_TESTS_DIR) / "golden";
    const fs::path dir = sandbox() / "golden_run";
    REQUIRE(run("fit --input " + (golden / "toy.tsv").string() +
                " --groups A,A,A,A,A,A,B,B,B,B,B,B --out " + dir.string()) == 0);
    CHECK(slurp(dir / "genes.csv") == slurp(golden / "genes.csv"));
    CHECK(slurp(dir / "fit.json") == slurp(golden / "fit.json"));
}
