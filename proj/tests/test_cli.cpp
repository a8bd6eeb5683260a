#include <doctest.h>

#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cst/cli.hpp"

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("cst_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(dir, ec); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cst::run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

void write_example_data(const TempDir& tmp) {
    write_file(tmp.path("p.csv"), "class_id,k,tau_lower,tau_upper\nC1,1,0,1\nC1,2,1,2\n");
    write_file(tmp.path("d.csv"),
               "#includes_undetected=true\n"
               "class_id,individual_id,interval_index,delta\n"
               "C1,a,1,1\nC1,a,2,0\n"
               "C1,b,1,0\nC1,b,2,1\n"
               "C1,c,1,1\nC1,c,2,0\n"
               "C1,d,1,0\nC1,d,2,0\n");
}

} // namespace

TEST_CASE("estimate prints the expected table") {
    TempDir tmp;
    write_example_data(tmp);
    auto res = cli({"estimate", "--data", tmp.path("d.csv"), "--partitions", tmp.path("p.csv"),
                    "--json", tmp.path("est.json")});
    CHECK(res.code == 0);
    CHECK(res.out.find("0.500000") != std::string::npos);
    CHECK(res.out.find("0.250000") != std::string::npos);
    CHECK(res.out.find("never-observed probability: 0.250000") != std::string::npos);

    // full-precision counterpart in the machine output
    auto j = nlohmann::json::parse(read_file(tmp.path("est.json")));
    CHECK(j.at("C1").at("p_hat")[0].get<double>() == 0.5);
    CHECK(j.at("C1").at("p_hat")[1].get<double>() == 0.25);
    CHECK(j.at("C1").at("S_hat")[2].get<double>() == 0.25);
}

TEST_CASE("unknown subcommand exits 2") {
    auto res = cli({"frobnicate"});
    CHECK(res.code == 2);
    CHECK(!res.err.empty());
}

TEST_CASE("bad data exits 3, bad flags exit 2") {
    TempDir tmp;
    write_example_data(tmp);
    auto res = cli({"estimate", "--data", tmp.path("nope.csv"), "--partitions", tmp.path("p.csv")});
    CHECK(res.code == 3);

    auto res2 = cli({"estimate", "--data", tmp.path("d.csv")}); // csv without --partitions
    CHECK(res2.code == 2);

    auto res3 = cli({"test-indep", "--data", tmp.path("d.csv"), "--partitions", tmp.path("p.csv"),
                     "--class", "C1", "--scaling", "bogus"});
    CHECK(res3.code == 2);
}

TEST_CASE("simulate requires a seed and is reproducible end to end") {
    TempDir tmp;
    write_file(tmp.path("cfg.json"),
               R"({"generator":"multinomial_first_presence","endpoints":[0,1,2],
                   "p0":[0.35,0.25],"nu":200,"includes_undetected":true})");

    auto no_seed = cli({"simulate", "--config", tmp.path("cfg.json"), "--out", tmp.path("s.csv"),
                        "--partitions-out", tmp.path("sp.csv")});
    CHECK(no_seed.code == 2);

    auto run = [&](const std::string& d, const std::string& p) {
        return cli({"simulate", "--config", tmp.path("cfg.json"), "--seed", "77", "--out",
                    tmp.path(d), "--partitions-out", tmp.path(p)});
    };
    CHECK(run("s1.csv", "sp1.csv").code == 0);
    CHECK(run("s2.csv", "sp2.csv").code == 0);
    CHECK(read_file(tmp.path("s1.csv")) == read_file(tmp.path("s2.csv")));

    auto est1 = cli({"estimate", "--data", tmp.path("s1.csv"), "--partitions", tmp.path("sp1.csv"),
                     "--out", tmp.path("t1.txt"), "--json", tmp.path("j1.json")});
    auto est2 = cli({"estimate", "--data", tmp.path("s2.csv"), "--partitions", tmp.path("sp2.csv"),
                     "--out", tmp.path("t2.txt"), "--json", tmp.path("j2.json")});
    CHECK(est1.code == 0);
    CHECK(est2.code == 0);
    CHECK(read_file(tmp.path("t1.txt")) == read_file(tmp.path("t2.txt")));
    CHECK(read_file(tmp.path("j1.json")) == read_file(tmp.path("j2.json")));
}

TEST_CASE("test subcommands emit statistic, df and p-value") {
    TempDir tmp;
    write_example_data(tmp);
    auto res = cli({"test-indep", "--data", tmp.path("d.csv"), "--partitions", tmp.path("p.csv"),
                    "--class", "C1", "--json", tmp.path("t.json")});
    CHECK(res.code == 0);
    auto j = nlohmann::json::parse(read_file(tmp.path("t.json")));
    CHECK(j.at("scaling") == "sample_scaled");
    CHECK(j.at("df").get<int>() == 0); // K=2
    CHECK(j.at("df_anomaly").get<bool>());
}

TEST_CASE("size subcommand with explicit p") {
    TempDir tmp;
    write_example_data(tmp);
    auto res = cli({"size", "--data", tmp.path("d.csv"), "--partitions", tmp.path("p.csv"), "--p",
                    "C1=0.75", "--json", tmp.path("s.json")});
    CHECK(res.code == 0);
    auto j = nlohmann::json::parse(read_file(tmp.path("s.json")));
    CHECK(j.at("classes").at("C1").at("nu_hat").get<double>() == 4.0); // 3 detected / 0.75
}

TEST_CASE("estimate-cov and ph subcommands emit per-level output") {
    TempDir tmp;
    write_file(tmp.path("p.csv"), "class_id,k,tau_lower,tau_upper\nC1,1,0,1\nC1,2,1,2\n");
    write_file(tmp.path("d.csv"),
               "#includes_undetected=true\n#covariate_dim=1\n"
               "class_id,individual_id,interval_index,delta,z1\n"
               "C1,a,1,1,0\nC1,a,2,0,0\n"
               "C1,b,1,0,0\nC1,b,2,0,0\n"
               "C1,c,1,0,1\nC1,c,2,1,1\n"
               "C1,d,1,0,1\nC1,d,2,1,1\n");

    auto cov = cli({"estimate-cov", "--data", tmp.path("d.csv"), "--partitions", tmp.path("p.csv"),
                    "--class", "C1", "--normalization", "conditional", "--json",
                    tmp.path("cov.json")});
    CHECK(cov.code == 0);
    auto jc = nlohmann::json::parse(read_file(tmp.path("cov.json")));
    CHECK(jc.at("C1").at("levels").size() == 2);
    CHECK(jc.at("C1").at("combined_p_hat")[0].get<double>() == 0.25);

    auto ph = cli({"ph", "--data", tmp.path("d.csv"), "--partitions", tmp.path("p.csv"),
                   "--class", "C1", "--loglik-beta", "0;0", "--loglik-delta", "0.4,0.3",
                   "--json", tmp.path("ph.json")});
    CHECK(ph.code == 0);
    auto jp = nlohmann::json::parse(read_file(tmp.path("ph.json")));
    CHECK(jp.at("omega_hat").size() == 2);
    CHECK(jp.contains("loglik"));
    CHECK(jp.contains("beta_hat"));

    auto mc = cli({"monte-carlo", "--config", tmp.path("none.json"), "--target", "p", "--B", "20",
                   "--seed", "1"});
    CHECK(mc.code == 3); // missing config is a data error
}

TEST_CASE("kernel subcommand runs on covariate data") {
    TempDir tmp;
    write_file(tmp.path("p.csv"), "class_id,k,tau_lower,tau_upper\nC1,1,0,1\n");
    write_file(tmp.path("d.csv"),
               "#includes_undetected=true\n#covariate_dim=1\n"
               "class_id,individual_id,interval_index,delta,z1\n"
               "C1,a,1,1,0.1\nC1,b,1,0,0.4\nC1,c,1,1,0.7\nC1,d,1,0,0.9\n");
    auto res = cli({"kernel", "--data", tmp.path("d.csv"), "--partitions", tmp.path("p.csv"),
                    "--class", "C1", "--z", "0.5", "--kernel", "uniform", "--bandwidth", "10"});
    CHECK(res.code == 0);
    CHECK(res.out.find("0.500000") != std::string::npos); // pooled mean at huge bandwidth
}
