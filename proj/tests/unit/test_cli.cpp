#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "stmmmf/checkpoint.hpp"
#include "stmmmf/ingest.hpp"

namespace fs = std::filesystem;
using namespace stmmmf;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run stmmmf_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "stmmmf");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

/// Fresh scratch directory holding a small u.data-style file.
struct Workspace {
    fs::path dir;

    explicit Workspace(const std::string& name) {
        dir = fs::temp_directory_path() / ("stmmmf_cli_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto y = oracle::planted_rank2(5, 40, 30, 0.6);
        std::ofstream f(dir / "u.data");
        for (const auto& e : y.entries()) {
            f << e.user + 1 << '\t' << e.item + 1 << '\t' << e.value << "\t100\n";
        }
    }
    ~Workspace() { fs::remove_all(dir); }

    std::string path(const std::string& leaf) const { return (dir / leaf).string(); }

    void ingest_and_split() const {
        REQUIRE(stmmmf_cli({"ingest", path("u.data"), "--out", path("y.stmat"), "--min-ratings", "0"}).code == 0);
        REQUIRE(stmmmf_cli({"split", path("y.stmat"), "--frac", "0.8", "--seed", "7", "--out-dir", dir.string()}).code == 0);
    }
};

const std::vector<std::string> kFastLoop{"--dim", "3", "--lambda", "0.5", "--lr", "0.03", "--gd-iters", "40",
                                         "--cap", "30"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("ingest prints the matrix statistics") {
    Workspace ws("ingest");
    const auto y = oracle::planted_rank2(5, 40, 30, 0.6);
    const auto r = stmmmf_cli({"ingest", "--flavor", "ml100k", ws.path("u.data"), "--out", ws.path("y.stmat"),
                               "--min-ratings", "0"});
    CHECK(r.code == cli::kExitOk);
    std::istringstream lines(r.out);
    std::string first;
    std::getline(lines, first);
    CHECK(first == "40 30 5 " + std::to_string(y.size()));
    CHECK(r.out.find("sparsity") != std::string::npos);
    CHECK(load_matrix(ws.path("y.stmat")) == y);

    const auto missing = stmmmf_cli({"ingest", ws.path("nope.data"), "--out", ws.path("z.stmat")});
    CHECK(missing.code != 0);
    CHECK(missing.err.find("nope.data") != std::string::npos);
    CHECK_FALSE(fs::exists(ws.path("z.stmat")));

    const auto bad_flavor = stmmmf_cli({"ingest", "--flavor", "netflix", ws.path("u.data")});
    CHECK(bad_flavor.code != 0);
}

TEST_CASE("ingest honours the minimum-ratings filter") {
    Workspace ws("minratings");
    const auto r = stmmmf_cli({"ingest", ws.path("u.data"), "--out", ws.path("y.stmat"), "--min-ratings", "1000"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.rfind("0 0 5 0", 0) == 0);
}

TEST_CASE("split is deterministic and validates the fraction") {
    Workspace ws("split");
    REQUIRE(stmmmf_cli({"ingest", ws.path("u.data"), "--out", ws.path("y.stmat"), "--min-ratings", "0"}).code == 0);
    const auto a = stmmmf_cli({"split", ws.path("y.stmat"), "--frac", "0.8", "--seed", "7", "--out-dir", ws.path("a")});
    const auto b = stmmmf_cli({"split", ws.path("y.stmat"), "--frac", "0.8", "--seed", "7", "--out-dir", ws.path("b")});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(slurp(ws.dir / "a" / "train.stmat") == slurp(ws.dir / "b" / "train.stmat"));
    CHECK(slurp(ws.dir / "a" / "test.stmat") == slurp(ws.dir / "b" / "test.stmat"));
    const auto y = load_matrix(ws.path("y.stmat"));
    const auto train = load_matrix((ws.dir / "a" / "train.stmat").string());
    CHECK(train.size() == static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(y.size()))));
    CHECK(a.out.find("train " + std::to_string(train.size())) != std::string::npos);

    const auto bad = stmmmf_cli({"split", ws.path("y.stmat"), "--frac", "1.0", "--out-dir", ws.path("c")});
    CHECK(bad.code == cli::kExitUsage);
    CHECK_FALSE(fs::exists(ws.dir / "c"));
}

TEST_CASE("selftrain writes reports, checkpoint and snapshots") {
    Workspace ws("selftrain");
    ws.ingest_and_split();
    const auto r = stmmmf_cli(with({"selftrain", "--train", ws.path("train.stmat"), "--test", ws.path("test.stmat"),
                                    "--out-dir", ws.path("run"), "--iters", "1", "--snapshot-every", "1"},
                                   kFastLoop));
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("tau1=0.4999 tau2=0.1") != std::string::npos);
    CHECK(line_count(ws.dir / "run" / "iterations.jsonl") == 1);
    CHECK(line_count(ws.dir / "run" / "iterations.csv") == 2);
    CHECK(fs::exists(ws.dir / "run" / "model.ckpt"));
    CHECK(fs::exists(ws.dir / "run" / "snapshots" / "round_0000.stmat"));
    CHECK(fs::exists(ws.dir / "run" / "snapshots" / "round_0001.stmat"));

    std::ifstream jl(ws.dir / "run" / "iterations.jsonl");
    std::string line;
    std::getline(jl, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j["iter"] == 1);
    CHECK(j["overlap"].is_null());
    CHECK(j["observed"].get<std::size_t>() + j["unobserved"].get<std::size_t>() == 40 * 30);
}

TEST_CASE("selftrain output is reproducible for a fixed seed") {
    Workspace ws("repro");
    ws.ingest_and_split();
    for (const char* out : {"r1", "r2"}) {
        REQUIRE(stmmmf_cli(with({"selftrain", "--train", ws.path("train.stmat"), "--test", ws.path("test.stmat"),
                                 "--out-dir", ws.path(out), "--iters", "3", "--seed", "4"},
                                kFastLoop))
                    .code == 0);
    }
    for (const char* f : {"iterations.jsonl", "iterations.csv", "model.ckpt", "final.stmat"}) {
        CHECK(slurp(ws.dir / "r1" / f) == slurp(ws.dir / "r2" / f));
    }
}

TEST_CASE("selftrain usage errors leave no output behind") {
    Workspace ws("usage");
    ws.ingest_and_split();
    for (const auto& flags : std::vector<std::vector<std::string>>{
             {"--tau2", "60"}, {"--tau1", "50"}, {"--tau1", "5", "--tau2", "10"}, {"--sample-pct", "0"}, {"--cap", "0"}}) {
        const auto r = stmmmf_cli(with({"selftrain", "--train", ws.path("train.stmat"), "--test", ws.path("test.stmat"),
                                        "--out-dir", ws.path("never")},
                                       flags));
        CHECK(r.code == cli::kExitUsage);
        CHECK_FALSE(fs::exists(ws.dir / "never"));
    }
    CHECK(stmmmf_cli({"selftrain", "--bogus"}).code == cli::kExitUsage);
    CHECK(stmmmf_cli({}).code == cli::kExitUsage);
    CHECK(stmmmf_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("output directory defaults to the environment variable") {
    Workspace ws("env");
    REQUIRE(stmmmf_cli({"ingest", ws.path("u.data"), "--out", ws.path("y.stmat"), "--min-ratings", "0"}).code == 0);
    ::setenv(cli::kOutDirEnv, ws.path("envout").c_str(), 1);
    const auto r = stmmmf_cli({"split", ws.path("y.stmat")});
    ::unsetenv(cli::kOutDirEnv);
    CHECK(r.code == 0);
    CHECK(fs::exists(ws.dir / "envout" / "train.stmat"));
}

TEST_CASE("evaluate a perfect-prediction fixture") {
    Workspace ws("evaluate");
    // One user, items scored at the centre of each rating interval.
    FactorModel m(1, 5, 1, 5);
    m.user_factors(0, 0) = 1.0;
    const double th[] = {1.5, 2.5, 3.5, 4.5};
    for (std::size_t r = 0; r < 4; ++r) m.thresholds(0, r) = th[r];
    std::vector<Rating> es;
    for (Index j = 0; j < 5; ++j) {
        m.item_factors(j, 0) = 1.0 + j;
        es.push_back({0, j, 1 + static_cast<int>(j)});
    }
    save_checkpoint(ws.path("m.ckpt"), m);
    save_matrix(ws.path("t.stmat"), SparseRatingMatrix(1, 5, 5, es));

    const auto r = stmmmf_cli({"evaluate", "--model", ws.path("m.ckpt"), "--test", ws.path("t.stmat")});
    CHECK(r.code == 0);
    CHECK(r.out.find("MAE 0.000000") != std::string::npos);
    CHECK(r.out.find("RMSE 0.000000") != std::string::npos);
    CHECK(r.out.find("1\t1\t0\t0\t0\t0\t1.0000\t0.0000\t0.0000\t0.0000\t0.0000") != std::string::npos);
    CHECK(r.out.find("3\t0\t0\t1\t0\t0\t1.0000\t0.0000\t0.0000\t*\t*") != std::string::npos);

    save_matrix(ws.path("wide.stmat"), SparseRatingMatrix(2, 5, 5, {{1, 0, 3}}));
    const auto bad = stmmmf_cli({"evaluate", "--model", ws.path("m.ckpt"), "--test", ws.path("wide.stmat")});
    CHECK(bad.code != 0);
    CHECK(bad.err.find("1x5") != std::string::npos);
}

TEST_CASE("default grid search axes") {
    const auto lambdas = cli::default_lambda_grid();
    REQUIRE(lambdas.size() == 10);
    CHECK(lambdas.front() == doctest::Approx(std::pow(10.0, 1.0 / 16.0)));
    CHECK(lambdas.back() == doctest::Approx(std::pow(10.0, 37.0 / 16.0)));
    CHECK(cli::default_tau1_grid() == std::vector<double>{5, 10, 15, 20, 25, 30, 35, 40, 45, 49.99});
    CHECK(cli::default_sample_grid().size() == 10);
    CHECK(cli::default_sample_grid().back() == 100);
}

TEST_CASE("grid search over a small grid") {
    Workspace ws("grid");
    ws.ingest_and_split();
    const std::vector<std::string> base{"gridsearch", "--train", ws.path("train.stmat"), "--dim", "3", "--lr", "0.03",
                                        "--gd-iters", "30", "--cap", "20", "--iters", "2", "--seed", "3"};

    auto one = stmmmf_cli(with(base, {"--out", ws.path("one.csv"), "--lambda-grid", "0.5", "--tau1-grid", "40",
                                      "--sample-grid", "50"}));
    CHECK(one.code == 0);
    CHECK(line_count(ws.path("one.csv")) == 2);
    CHECK(one.out.find("best lambda=0.5") != std::string::npos);

    auto many = stmmmf_cli(with(base, {"--out", ws.path("many.csv"), "--lambda-grid", "0.5,2", "--tau1-grid",
                                       "20,40", "--sample-grid", "50", "--jobs", "3"}));
    CHECK(many.code == 0);
    std::ifstream in(ws.path("many.csv"));
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "lambda,tau1,s,mae,rmse");
    std::vector<std::string> prefixes;
    while (std::getline(in, row)) prefixes.push_back(row.substr(0, row.find(',', row.find(',') + 1)));
    CHECK(prefixes == std::vector<std::string>{"0.5,20", "0.5,40", "2,20", "2,40"});

    // Two runs average the single-run scores of seeds 3 and 4.
    auto csv_mae = [&](const std::string& file) {
        std::ifstream f(ws.path(file));
        std::string h, r;
        std::getline(f, h);
        std::getline(f, r);
        std::vector<std::string> cols;
        std::stringstream ss(r);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
        return std::stod(cols[3]);
    };
    const std::vector<std::string> cell{"--lambda-grid", "0.5", "--tau1-grid", "40", "--sample-grid", "50"};
    auto seeded = base;
    seeded.back() = "4";
    REQUIRE(stmmmf_cli(with(seeded, with({"--out", ws.path("s4.csv")}, cell))).code == 0);
    REQUIRE(stmmmf_cli(with(base, with({"--out", ws.path("r2.csv"), "--runs", "2"}, cell))).code == 0);
    CHECK(csv_mae("r2.csv") == doctest::Approx((csv_mae("one.csv") + csv_mae("s4.csv")) / 2).epsilon(2e-6));

    auto bad = stmmmf_cli(with(base, {"--out", ws.path("bad.csv"), "--tau1-grid", "60"}));
    CHECK(bad.code == cli::kExitUsage);
    CHECK_FALSE(fs::exists(ws.path("bad.csv")));
}

TEST_CASE("baseline rounds") {
    Workspace ws("rounds");
    ws.ingest_and_split();
    const auto none = stmmmf_cli({"baseline-rounds", "--snapshots", ws.path("snaps"), "--test", ws.path("test.stmat"),
                                  "--out", ws.path("rounds.csv")});
    CHECK(none.code != 0);
    CHECK(none.err.find("--snapshot-every") != std::string::npos);

    fs::create_directories(ws.dir / "snaps");
    fs::copy_file(ws.path("train.stmat"), ws.dir / "snaps" / "round_0000.stmat");
    const auto one = stmmmf_cli({"baseline-rounds", "--snapshots", ws.path("snaps"), "--test", ws.path("test.stmat"),
                                 "--out", ws.path("rounds.csv"), "--epochs", "3"});
    CHECK(one.code == 0);
    CHECK(line_count(ws.path("rounds.csv")) == 2);
    CHECK(slurp(ws.path("rounds.csv")).rfind("round,mae,rmse\n0,", 0) == 0);
}
