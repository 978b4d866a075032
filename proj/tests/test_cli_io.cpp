#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "tvzip/cli.hpp"
#include "tvzip/csv.hpp"

using namespace tvzip;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("tvzip_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run(std::initializer_list<std::string> args) {
    return tvzip::cli::run_cli(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("csv loader happy path and exog mapping") {
    TempDir dir;
    const auto path = dir.file("counts.csv");
    write_file(path, "t,count\n1,0\n2,0\n3,2\n4,0\n5,1\n");
    const auto series = load_count_csv(path);
    REQUIRE(series.size() == 5);
    CHECK(series.counts == std::vector<long>{0, 0, 2, 0, 1});
    CHECK_FALSE(series.exog.has_value());

    const auto with_temp = dir.file("with_temp.csv");
    write_file(with_temp, "t,count,temperature\n1,0,30.5\n2,3,28.25\n3,1,26\n");
    ColumnMapping mapping;
    mapping.exog_column = "temperature";
    const auto mapped = load_count_csv(with_temp, mapping);
    REQUIRE(mapped.exog.has_value());
    CHECK(mapped.exog->size() == mapped.counts.size());
    CHECK((*mapped.exog)[1] == Catch::Approx(28.25));
}

TEST_CASE("csv loader errors cite the offending row") {
    TempDir dir;
    const auto negative = dir.file("negative.csv");
    write_file(negative, "t,count\n1,0\n2,1\n3,-1\n4,0\n");
    CHECK_THROWS_WITH(load_count_csv(negative), Catch::Matchers::ContainsSubstring("row 3"));

    const auto fractional = dir.file("fractional.csv");
    write_file(fractional, "t,count\n1,0\n2,2.5\n");
    CHECK_THROWS_WITH(load_count_csv(fractional), Catch::Matchers::ContainsSubstring("row 2"));

    const auto unsorted = dir.file("unsorted.csv");
    write_file(unsorted, "t,count\n1,0\n3,1\n2,0\n");
    CHECK_THROWS_WITH(load_count_csv(unsorted),
                      Catch::Matchers::ContainsSubstring("strictly increasing"));

    const auto missing_column = dir.file("missing.csv");
    write_file(missing_column, "week,count\n1,0\n");
    CHECK_THROWS_AS(load_count_csv(missing_column), std::invalid_argument);

    const auto empty = dir.file("empty.csv");
    write_file(empty, "t,count\n");
    CHECK_THROWS_AS(load_count_csv(empty), std::invalid_argument);
}

TEST_CASE("simulate subcommand writes the documented CSV shape") {
    TempDir dir;
    const auto out = dir.file("sim.csv");
    const int status = run({"simulate", "--order", "1,0", "--alpha0", "1.0", "--alpha", "0.4",
                            "--link", "sin:A=0.1,B=0.1,delta=0.0001,s=12", "--n", "360",
                            "--seed", "7", "--out", out});
    REQUIRE(status == 0);
    const auto text = read_file(out);
    std::stringstream lines(text);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t,count");
    int rows = 0;
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 360);

    // truth columns behind the flag
    const auto truth_out = dir.file("sim_truth.csv");
    REQUIRE(run({"simulate", "--order", "1,0", "--alpha0", "1.0", "--alpha", "0.4", "--link",
                 "sin:A=0.1,B=0.1,delta=0.0001,s=12", "--n", "12", "--seed", "7", "--truth",
                 "--out", truth_out}) == 0);
    std::string truth_header;
    std::stringstream truth_lines(read_file(truth_out));
    std::getline(truth_lines, truth_header);
    CHECK(truth_header == "t,count,lambda_true,omega_true");
}

TEST_CASE("simulate requires a seed and concrete link parameters") {
    CHECK(run({"simulate", "--order", "1,0", "--alpha0", "1.0", "--alpha", "0.4", "--link",
               "constant:omega=0.2", "--n", "10"}) != 0);
    CHECK(run({"simulate", "--order", "1,0", "--alpha0", "1.0", "--alpha", "0.4", "--link",
               "constant:omega=auto", "--n", "10", "--seed", "3"}) != 0);
    CHECK(run({"unknown-subcommand"}) != 0);
}

TEST_CASE("fit subcommand emits a key=value record with the right parameter count") {
    TempDir dir;
    const auto data = dir.file("data.csv");
    REQUIRE(run({"simulate", "--order", "2,0", "--alpha0", "1.0", "--alpha", "0.3,0.2", "--link",
                 "constant:omega=0.25", "--n", "240", "--seed", "11", "--out", data}) == 0);

    const auto record_path = dir.file("fit.txt");
    REQUIRE(run({"fit", "--data", data, "--link", "constant:omega=auto", "--order", "2,0",
                 "--method", "em", "--out", record_path}) == 0);
    const auto record = read_file(record_path);
    CHECK(record.find("method=em") != std::string::npos);
    CHECK(record.find("k=4") != std::string::npos);  // omega, alpha0, alpha1, alpha2
    CHECK(record.find("omega=") != std::string::npos);
    CHECK(record.find("alpha2=") != std::string::npos);
    CHECK(record.find("converged=1") != std::string::npos);

    const auto fitted_path = dir.file("fitted.csv");
    REQUIRE(run({"fit", "--data", data, "--link", "constant:omega=auto", "--order", "2,0",
                 "--method", "mle", "--out", dir.file("fit2.txt"), "--fitted-out",
                 fitted_path}) == 0);
    std::stringstream fitted(read_file(fitted_path));
    std::string header;
    std::getline(fitted, header);
    CHECK(header == "t,count,lambda,omega");
}

TEST_CASE("round trip: fit recovers the simulating parameters") {
    TempDir dir;
    const auto data = dir.file("roundtrip.csv");
    REQUIRE(run({"simulate", "--order", "1,0", "--alpha0", "1.0", "--alpha", "0.4", "--link",
                 "sin:A=0.1,B=0.1,delta=0.0001,s=12", "--n", "360", "--seed", "21", "--out",
                 data}) == 0);
    const auto record_path = dir.file("fit.txt");
    REQUIRE(run({"fit", "--data", data, "--link", "sin:A=auto,B=auto,delta=0.0001,s=12",
                 "--order", "1,0", "--method", "mle", "--out", record_path}) == 0);
    const auto record = read_file(record_path);

    auto value_of = [&](const std::string& key) {
        const auto pos = record.find("\n" + key + "=");
        REQUIRE(pos != std::string::npos);
        const auto start = pos + key.size() + 2;
        return std::stod(record.substr(start, record.find('\n', start) - start));
    };
    CHECK(std::abs(value_of("A") - 0.10) < 0.12);
    CHECK(std::abs(value_of("B") - 0.10) < 0.12);
    CHECK(std::abs(value_of("alpha0") - 1.0) < 0.35);
    CHECK(std::abs(value_of("alpha1") - 0.4) < 0.20);
}

TEST_CASE("select subcommand ranks a candidate table") {
    TempDir dir;
    const auto data = dir.file("data.csv");
    REQUIRE(run({"simulate", "--order", "2,0", "--alpha0", "1.0", "--alpha", "0.4,0.3", "--link",
                 "sin:A=-0.35,B=-0.30,delta=0.0001,s=12", "--n", "360", "--seed", "301", "--out",
                 data}) == 0);

    const auto candidates = dir.file("candidates.txt");
    write_file(candidates,
               "# name link order\n"
               "S1M1 constant:omega=auto 1,0\n"
               "S1M2 constant:omega=auto 2,0\n"
               "S1M3 constant:omega=auto 1,1\n"
               "S2M1 sinmonthly:A=auto,B=auto,delta=0.0001,s=12 1,0\n"
               "S2M2 sinmonthly:A=auto,B=auto,delta=0.0001,s=12 2,0\n"
               "S2M3 sinmonthly:A=auto,B=auto,delta=0.0001,s=12 1,1\n"
               "S3M1 sin:A=auto,B=auto,delta=0.0001,s=12 1,0\n"
               "S3M2 sin:A=auto,B=auto,delta=0.0001,s=12 2,0\n"
               "S3M3 sin:A=auto,B=auto,delta=0.0001,s=12 1,1\n");
    const auto table_path = dir.file("table.txt");
    REQUIRE(run({"select", "--data", data, "--candidates", candidates, "--method", "em", "--out",
                 table_path}) == 0);
    const auto table = read_file(table_path);
    std::stringstream lines(table);
    int rows = 0;
    bool header_seen = false;
    for (std::string line; std::getline(lines, line);) {
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            CHECK(line.find("AIC") != std::string::npos);
            CHECK(line.find("BIC") != std::string::npos);
            continue;
        }
        ++rows;
    }
    CHECK(rows == 9);
    // data came from a weekly sinusoidal truth, so a cyclic candidate should
    // sit at the top of the ranking
    std::stringstream again(table);
    std::string header, best;
    std::getline(again, header);
    std::getline(again, best);
    CHECK((best.rfind("S2", 0) == 0 || best.rfind("S3", 0) == 0));
}

TEST_CASE("replicate-study emits the table and CSV deterministically") {
    TempDir dir;
    const auto out1 = dir.file("study1.txt");
    const auto out2 = dir.file("study2.txt");
    const auto csv1 = dir.file("study1.csv");
    const auto csv2 = dir.file("study2.csv");
    REQUIRE(run({"replicate-study", "--model", "A1", "--n", "120", "--m", "10", "--estimator",
                 "both", "--seed", "42", "--out", out1, "--csv", csv1}) == 0);
    REQUIRE(run({"replicate-study", "--model", "A1", "--n", "120", "--m", "10", "--estimator",
                 "both", "--seed", "42", "--out", out2, "--csv", csv2}) == 0);
    CHECK(read_file(out1) == read_file(out2));
    CHECK(read_file(csv1) == read_file(csv2));
    CHECK(read_file(out1).find("Study A1 (sin)") != std::string::npos);
    CHECK(read_file(csv1).find("estimator,parameter,true_value,mean,made,converged,failed") !=
          std::string::npos);

    CHECK(run({"replicate-study", "--model", "A1", "--n", "120", "--m", "5", "--estimator",
               "em"}) != 0);  // missing --seed
}

TEST_CASE("simulate output is byte-identical across reruns") {
    TempDir dir;
    const auto out1 = dir.file("a.csv");
    const auto out2 = dir.file("b.csv");
    for (const auto& out : {out1, out2})
        REQUIRE(run({"simulate", "--order", "1,1", "--alpha0", "1.0", "--alpha", "0.2", "--beta",
                     "0.2", "--link", "logistic:d0=-2,d1=0", "--n", "200", "--seed", "77",
                     "--out", out}) == 0);
    CHECK(read_file(out1) == read_file(out2));
    // exog column present for the logistic link
    CHECK(read_file(out1).rfind("t,count,exog", 0) == 0);
}

TEST_CASE("config file supplies flat key=value options") {
    TempDir dir;
    const auto config = dir.file("sim.conf");
    write_file(config,
               "order=1,0\nalpha0=1.0\nalpha=0.4\nlink=constant:omega=0.3\nn=50\nseed=5\n");
    const auto out = dir.file("sim.csv");
    REQUIRE(run({"simulate", "--config", config, "--out", out}) == 0);
    std::stringstream lines(read_file(out));
    int rows = -1;  // header
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 50);
}
