#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(CUSPLAB_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(cli("--help").code == 0);
    CHECK(cli("eval --no-such-option").code == 3);
    CHECK(cli("--format xml eval --preset lebesgue --x 0 --r 1").code == 3);
    CHECK(cli("eval --preset nonsense --x 0 --r 1").code == 3);
    CHECK(cli("scenario run no_such_scenario").code == 3);
}

TEST_CASE("eval") {
    const auto r = cli("eval --preset lebesgue --x 0 --r 1");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("x,r,u,error\n", 0) == 0);
    CHECK(r.out.find("0.41421356237309") != std::string::npos);
    const auto j = cli("--format json eval --preset lebesgue --x 0 --r 1");
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("command") == "eval");
    const auto grid = cli("eval --preset t21_d3 --param eps=0.5 --quantity residual --x -1:1:3 --r geo:0.1:1:2");
    CHECK(grid.code == 0);
    CHECK(std::count(grid.out.begin(), grid.out.end(), '\n') == 7);
}

TEST_CASE("classify") {
    const auto r = cli("--format json classify --profile exp:0.5 --profile power:2 --d 3");
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    const auto s = doc.dump();
    CHECK(s.find("Irregular") != std::string::npos);
    CHECK(s.find("\"Regular\"") != std::string::npos);
    const auto md = cli("--format md classify --profile logpower:2 --d 4 --d 5");
    CHECK(md.code == 0);
    CHECK(md.out.find('|') != std::string::npos);
}

TEST_CASE("barrier exit codes") {
    CHECK(cli("barrier --profile exp:0.5 --d 4 --operator const:0.3 --w radial_power:0.4").code == 0);
    CHECK(cli("barrier --profile exp:0.5 --d 4 --operator laplacian --w radial_power:0.4").code == 1);
    CHECK(cli("barrier --d 3 --operator const:2 --superharmonic 1").code == 0);
    CHECK(cli("barrier --d 3 --operator const:0.5 --superharmonic 1").code == 1);
}

TEST_CASE("simulate is deterministic across runs and thread counts") {
    const std::string args =
        "simulate --profile exp:0.5 --d 3 --start 0,0.2,0 --paths 200 --step 1e-3 --seed 17 --format csv";
    const auto a = cli("--threads 1 " + args);
    REQUIRE(a.code == 0);
    CHECK(a.out.rfind("start,path,exit_x1,exit_x2,exit_x3,exit_time,censored,boundary,steps\n", 0) == 0);
    CHECK(cli("--threads 1 " + args).out == a.out);
    CHECK(cli("--threads 3 " + args).out == a.out);
    CHECK(cli("--threads 1 " + args + " --seed 18").out != a.out);

    const auto dir = std::filesystem::temp_directory_path() / "cusplab_cli_test";
    std::filesystem::remove_all(dir);
    for (int threads : {1, 2}) {
        const auto sub = dir / std::to_string(threads);
        REQUIRE(cli("--threads " + std::to_string(threads) + " --out-dir " + sub.string() +
                     " simulate --profile exp:0.5 --d 3 --start 0,0.2,0 --paths 100 --step 1e-3")
                    .code == 0);
    }
    for (const char* f : {"samples.csv", "estimate.json"}) CHECK(slurp(dir / "1" / f) == slurp(dir / "2" / f));
    CHECK(cli("simulate --profile exp:0.5 --d 3 --start 2,0,0 --paths 10").code == 3);
    std::filesystem::remove_all(dir);
}

TEST_CASE("scenarios") {
    const auto list = cli("scenario list");
    CHECK(list.code == 0);
    CHECK(list.out.find("thm_2_3_dge4") != std::string::npos);
    const auto run = cli("--format json scenario run lebesgue_spine --eps 0.4");
    CHECK(run.code == 0);
    const auto doc = nlohmann::json::parse(run.out);
    CHECK(doc.dump().find("0.4") != std::string::npos);
    CHECK(cli("scenario run lebesgue_spine --eps -1").code == 3);
    CHECK(cli("scenario run lebesgue_spine --only ito_mckean").out == cli("scenario run lebesgue_spine --only ito_mckean").out);
}

TEST_CASE("plot data") {
    const auto r = cli("plotdata potential-along-spine --preset lebesgue --profile exp:0.5 --x geo:1e-3:0.1:5");
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 6);
}
