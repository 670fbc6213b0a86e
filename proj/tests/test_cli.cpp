#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "pinph/cli.hpp"
#include "pinph/report.hpp"

namespace fs = std::filesystem;
using namespace pinph;

namespace {

struct Outcome {
    int code;
    std::string log;
};

Outcome pinph_run(std::vector<std::string> args) {
    args.insert(args.begin(), "pinph");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream log;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), log);
    return {code, log.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("pinph_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::map<std::string, std::string> metrics(const fs::path& p) {
    std::ifstream in(p);
    std::map<std::string, std::string> m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto c = line.find(',');
        m[line.substr(0, c)] = line.substr(c + 1);
    }
    return m;
}

const std::vector<std::string> kTheta{"--set", "alpha=0.4",   "--set", "delta=0.5",  "--set", "mu=30",
                                      "--set", "eps_b=40",    "--set", "eps_s=50",   "--set", "eps_bh=5",
                                      "--set", "eps_sh=5"};

const std::vector<std::string> kFast{"--set", "n_draws=200", "--set", "n_refine=2"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("usage errors") {
    CHECK(pinph_run({}).code == cli::kUsageError);
    CHECK(pinph_run({"frobnicate"}).code == cli::kUsageError);
    CHECK(pinph_run({"simulate", "--set", "novalue"}).code == cli::kUsageError);
    CHECK(pinph_run({"simulate", "--seed", "banana"}).code == cli::kUsageError);
    const auto dir = scratch("usage");
    const auto zero = pinph_run(with({"simulate", "--out", dir.string(), "--set", "n_days=0"}, kTheta));
    CHECK(zero.code == cli::kUsageError);
    CHECK(zero.log.find("n_days") != std::string::npos);
    const auto bad_theta = pinph_run(with(with({"simulate", "--out", dir.string()}, kTheta), {"--set", "alpha=1.5"}));
    CHECK(bad_theta.code == cli::kUsageError);
    CHECK(bad_theta.log.find("alpha") != std::string::npos);
    CHECK(pinph_run({"estimate", "--out", dir.string(), "--set", "n_refine=-1"}).code == cli::kUsageError);
}

TEST_CASE("config files and provenance") {
    std::istringstream in("# comment\nseed = 42\nn_draws=100\n\nout = somewhere\n");
    auto c = cli::parse_config(in);
    CHECK(c.seed() == 42);
    CHECK(c.estimator().n_draws == 100);
    const auto h = c.hash();
    c.set("threads", "8");
    c.set("out", "elsewhere");
    CHECK(c.hash() == h);
    c.set("n_draws", "101");
    CHECK(c.hash() != h);
    CHECK(c.provenance("estimate").rfind("# pinph 0.1.0 command=estimate config_hash=", 0) == 0);
    CHECK(c.provenance("estimate").find(" seed=42") != std::string::npos);
    std::istringstream bad("just words\n");
    CHECK_THROWS_AS(cli::parse_config(bad), cli::UsageError);
}

TEST_CASE("simulate is deterministic and ingest keeps a simulated universe intact") {
    const auto a = scratch("sim_a");
    const auto b = scratch("sim_b");
    const auto sim = with(kTheta, {"--set", "n_assets=3", "--set", "n_days=40", "--seed", "9"});
    REQUIRE(pinph_run(with({"simulate", "--out", a.string()}, sim)).code == 0);
    REQUIRE(pinph_run(with({"simulate", "--out", b.string()}, sim)).code == 0);
    for (const char* f : {"market.csv", "counts.csv", "metadata.csv", "truth.csv"}) {
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK(first_line(a / f).rfind("# pinph 0.1.0 command=simulate config_hash=", 0) == 0);
    }

    REQUIRE(pinph_run({"ingest", "--out", a.string(), "--set", "counts=" + (a / "counts.csv").string(), "--set",
                       "market=" + (a / "market.csv").string(), "--set",
                       "metadata=" + (a / "metadata.csv").string()})
                .code == 0);
    const auto m = metrics(a / "ingest_report.csv");
    CHECK(m.at("assets_before") == "3");
    CHECK(m.at("assets_after") == "3");
    CHECK(m.at("trading_days") == "40");
    CHECK(fs::exists(a / "panel.csv"));

    // Trades format round trips to the same panel.
    const auto t = scratch("sim_trades");
    REQUIRE(pinph_run(with({"simulate", "--out", t.string(), "--set", "sim_format=trades"}, sim)).code == 0);
    REQUIRE(pinph_run({"ingest", "--out", t.string(), "--set", "trades=" + (t / "trades.csv").string(), "--set",
                       "market=" + (t / "market.csv").string(), "--set", "sign_method=pre-signed"})
                .code == 0);
    auto body = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
    CHECK(body(slurp(t / "panel.csv")) == body(slurp(a / "panel.csv")));
}

TEST_CASE("ingest filters incomplete and non-equity assets") {
    const auto dir = scratch("filter");
    spit(dir / "market.csv", "date,return\n2008-01-01,0.01\n2008-01-02,-0.01\n2008-01-03,0.02\n");
    spit(dir / "counts.csv",
         "date,ticker,buys,sells\n"
         "2008-01-02,AAA,5,4\n2008-01-03,AAA,6,2\n"
         "2008-01-02,BBB,3,3\n2008-01-03,BBB,2,7\n"
         "2008-01-02,CCC,4,0\n2008-01-03,CCC,5,5\n");
    const auto r = pinph_run({"ingest", "--out", dir.string(), "--set", "counts=" + (dir / "counts.csv").string(),
                              "--set", "market=" + (dir / "market.csv").string()});
    REQUIRE(r.code == 0);
    auto m = metrics(dir / "ingest_report.csv");
    CHECK(m.at("assets_before") == "3");
    CHECK(m.at("assets_after") == "2");
    CHECK(slurp(dir / "panel.csv").find("CCC") == std::string::npos);

    spit(dir / "metadata.csv", "ticker,market_cap,mean_daily_volume,is_equity\nAAA,100,10,true\nBBB,50,5,false\n");
    REQUIRE(pinph_run({"ingest", "--out", dir.string(), "--set", "counts=" + (dir / "counts.csv").string(), "--set",
                       "market=" + (dir / "market.csv").string(), "--set",
                       "metadata=" + (dir / "metadata.csv").string()})
                .code == 0);
    CHECK(metrics(dir / "ingest_report.csv").at("assets_after") == "1");
}

TEST_CASE("ingest input errors map to distinct exit codes") {
    const auto dir = scratch("errors");
    spit(dir / "market.csv", "date,return\n2008-01-01,0.01\n2008-01-02,-0.01\n");
    spit(dir / "empty.csv", "timestamp,ticker,price,quantity,side\n");
    spit(dir / "bad.csv", "timestamp,ticker,price,quantity,side\n2008-01-02T09:00:00,A,-1,1,B\n");
    const auto market = "market=" + (dir / "market.csv").string();
    const auto empty = pinph_run({"ingest", "--out", dir.string(), "--set", "trades=" + (dir / "empty.csv").string(),
                                  "--set", market});
    const auto bad = pinph_run({"ingest", "--out", dir.string(), "--set", "trades=" + (dir / "bad.csv").string(),
                                "--set", market});
    CHECK(empty.code == cli::kEmptyInput);
    CHECK(bad.code == cli::kInputError);
    CHECK(bad.log.find("line 2") != std::string::npos);
    CHECK(pinph_run({"ingest", "--out", dir.string(), "--set", "trades=" + (dir / "none.csv").string(), "--set",
                     market})
              .code == cli::kEmptyInput);
    CHECK(pinph_run({"ingest", "--out", dir.string(), "--set", market}).code == cli::kUsageError);

    const auto missing = pinph_run({"estimate", "--out", (dir / "nothing").string()});
    CHECK(missing.code == cli::kEmptyInput);
    CHECK(missing.log.find("ingest") != std::string::npos);
}

TEST_CASE("estimate is reproducible and thread-count independent") {
    const auto dir = scratch("estimate");
    REQUIRE(pinph_run(with({"simulate", "--out", dir.string(), "--set", "n_assets=2", "--set", "n_days=40",
                            "--seed", "3"},
                           kTheta))
                .code == 0);
    REQUIRE(pinph_run({"ingest", "--out", dir.string(), "--set", "counts=" + (dir / "counts.csv").string(), "--set",
                       "market=" + (dir / "market.csv").string()})
                .code == 0);
    REQUIRE(pinph_run(with({"estimate", "--out", dir.string(), "--seed", "1", "--threads", "1"}, kFast)).code == 0);
    const auto first = slurp(dir / "results.csv");
    std::istringstream in(first);
    const auto rows = report::parse_results(in);
    CHECK(rows.size() == 2);
    for (const auto& r : rows) CHECK(r.result.has_value());
    REQUIRE(pinph_run(with({"estimate", "--out", dir.string(), "--seed", "1", "--threads", "4"}, kFast)).code == 0);
    CHECK(slurp(dir / "results.csv") == first);
    REQUIRE(pinph_run(with({"estimate", "--out", dir.string(), "--seed", "2"}, kFast)).code == 0);
    CHECK(slurp(dir / "results.csv") != first);
}

TEST_CASE("report on a single quarter and on monthly periods") {
    const auto dir = scratch("report");
    spit(dir / "metadata.csv", [] {
        std::string s = "ticker,market_cap,mean_daily_volume,is_equity\n";
        for (int a = 0; a < 10; ++a) s += "A" + std::to_string(a) + "," + std::to_string(100 * (a + 1)) + "," + std::to_string(50 + (a * 37) % 11) + ",1\n";
        return s;
    }());
    const auto write = [&](const std::vector<std::string>& periods) {
        std::vector<report::ResultRow> rows;
        int k = 0;
        for (int a = 0; a < 10; ++a) {
            for (const auto& p : periods) {
                EstimationResult r;
                r.params = {0.4, 0.5, 100, 50, 60, 5, 6};
                r.pin = 0.2 - 0.01 * a + 0.001 * (k % 7);
                r.ph = 0.05 + 0.001 * (k++ % 5);
                rows.push_back({"A" + std::to_string(a), p, 21, r, ""});
            }
        }
        std::ofstream out(dir / "results.csv");
        report::write_results(out, rows);
    };
    const std::vector<std::string> report_args{"report", "--out", dir.string(), "--set",
                                               "metadata=" + (dir / "metadata.csv").string(), "--set",
                                               "size_groups=3", "--set", "group_size=3"};

    write({"2008-Q3"});
    REQUIRE(pinph_run(report_args).code == 0);
    std::ifstream diffs(dir / "table2_pin_differences.csv");
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(diffs, line)) {
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    }
    CHECK(lines == std::vector<std::string>{",2008-Q3", "2008-Q3,0.0000"});
    CHECK(fs::exists(dir / "table1_summary.csv"));
    CHECK(fs::exists(dir / "figure1_size_groups.svg"));

    std::vector<std::string> months;
    for (int m = 1; m <= 12; ++m) months.push_back("2008-" + std::string(m < 10 ? "0" : "") + std::to_string(m));
    write(months);
    REQUIRE(pinph_run(report_args).code == 0);
    CHECK(fs::exists(dir / "table7_summary.csv"));
    const auto summary = slurp(dir / "table7_summary.csv");
    CHECK(summary.find("# scheme=monthly periods=12") != std::string::npos);
    CHECK(fs::exists(dir / "table6_panel.csv"));

    const auto fx = scratch("fixture");
    REQUIRE(pinph_run({"report", "--out", fx.string(), "--set", "fixture=" PINPH_SOURCE_DIR "/data/table_a1.csv"})
                .code == 0);
    CHECK(fs::exists(fx / "table4_market_cap.csv"));
    CHECK(fs::exists(fx / "figure1_size_groups.csv"));
}

TEST_CASE("the installed binary reports exit codes to the shell") {
    const auto dir = scratch("binary");
    const std::string theta =
        " --set alpha=0.4 --set delta=0.5 --set mu=30 --set eps_b=40 --set eps_s=50 --set eps_bh=5 --set eps_sh=5";
    const std::string cmd = std::string(PINPH_CLI_PATH) + " simulate --out " + dir.string() + theta +
                            " --set n_days=0 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == cli::kUsageError);
    const std::string ok = std::string(PINPH_CLI_PATH) + " simulate --out " + dir.string() + theta +
                           " --set n_days=5 2>/dev/null";
    CHECK(std::system(ok.c_str()) == 0);
}
