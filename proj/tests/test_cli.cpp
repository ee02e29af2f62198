#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "flowcast/flow_pipeline.hpp"

namespace {

namespace fs = std::filesystem;

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

// Runs the CLI binary with the given arguments, capturing stdout.
CommandResult run_cli(const std::string& args, const fs::path& workdir) {
    const fs::path out_file = workdir / "stdout.txt";
    const std::string cmd = std::string(FLOWCAST_BIN_PATH) + " " + args + " > " +
                            out_file.string() + " 2> " + (workdir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());

    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    result.output = buf.str();
    return result;
}

std::string read_stderr(const fs::path& workdir) {
    std::ifstream in(workdir / "stderr.txt");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "flowcast_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("simulate then evaluate completes end to end") {
    TempDir tmp;
    const auto sim = run_cli("simulate --rows 2 --cols 3 --days 3 --seed 5 --out " +
                                 (tmp.path / "sim").string(),
                             tmp.path);
    REQUIRE(sim.exit_code == 0);
    CHECK(fs::exists(tmp.path / "sim" / "network.txt"));
    CHECK(fs::exists(tmp.path / "sim" / "flows.csv"));

    const auto eval = run_cli("evaluate --flows " + (tmp.path / "sim" / "flows.csv").string() +
                                  " --test-day 2015-03-03 --pmax 2 --qmax 2 --out " +
                                  (tmp.path / "report").string(),
                              tmp.path);
    REQUIRE(eval.exit_code == 0);
    CHECK(fs::exists(tmp.path / "report" / "summary.json"));
    CHECK(fs::exists(tmp.path / "report" / "per_road.csv"));
    CHECK(fs::exists(tmp.path / "report" / "fleet_curves.csv"));

    const auto summary = nlohmann::json::parse(eval.output);
    CHECK(summary["n_roads"].get<int>() == 14);
    CHECK(summary["n_failed"].get<int>() == 0);
}

TEST_CASE("fit reports the intercept of a constant flow") {
    TempDir tmp;
    const fs::path flows = tmp.path / "flows.csv";
    {
        std::vector<flowcast::FlowSeries> data{
            {"r7", flowcast::TimeSeries(std::vector<double>(96, 7.0), 1425168000)}};
        flowcast::write_flow_csv(data, flows.string());
    }
    const auto result = run_cli("fit --flows " + flows.string() + " --road r7 --order 0,0,0",
                                tmp.path);
    REQUIRE(result.exit_code == 0);
    const auto j = nlohmann::json::parse(result.output);
    CHECK(j["road"] == "r7");
    CHECK(std::abs(j["intercept"].get<double>() - 7.0) < 1e-6);
    CHECK(j["order"]["p"] == 0);
}

TEST_CASE("select with a singleton grid prints one table row") {
    TempDir tmp;
    const fs::path flows = tmp.path / "flows.csv";
    {
        std::vector<double> values(120);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = (i * 7 + 3) % 11;
        std::vector<flowcast::FlowSeries> data{
            {"road", flowcast::TimeSeries(values, 1425168000)}};
        flowcast::write_flow_csv(data, flows.string());
    }
    const auto result = run_cli("select --flows " + flows.string() +
                                    " --road road --pmax 0 --qmax 0 --d 0",
                                tmp.path);
    REQUIRE(result.exit_code == 0);
    const auto j = nlohmann::json::parse(result.output);
    CHECK(j["table"].size() == 1);
    CHECK(j["chosen"]["p"] == 0);
    CHECK(j["chosen"]["q"] == 0);
}

TEST_CASE("forecast with a fixed order returns the requested horizon") {
    TempDir tmp;
    const fs::path flows = tmp.path / "flows.csv";
    {
        std::vector<flowcast::FlowSeries> data{
            {"r", flowcast::TimeSeries(std::vector<double>(60, 3.0), 1425168000)}};
        flowcast::write_flow_csv(data, flows.string());
    }
    const auto result = run_cli("forecast --flows " + flows.string() +
                                    " --road r --horizon 5 --order 0,0,0",
                                tmp.path);
    REQUIRE(result.exit_code == 0);
    const auto j = nlohmann::json::parse(result.output);
    REQUIRE(j["values"].size() == 5);
    CHECK(std::abs(j["values"][0].get<double>() - 3.0) < 1e-6);
}

TEST_CASE("aggregate matches flows produced by the simulator") {
    TempDir tmp;
    const auto sim = run_cli(
        "simulate --rows 2 --cols 2 --days 1 --seed 3 --emit-trajectories --out " +
            (tmp.path / "sim").string(),
        tmp.path);
    REQUIRE(sim.exit_code == 0);

    const auto agg = run_cli(
        "aggregate --network " + (tmp.path / "sim" / "network.txt").string() +
            " --trajectories " + (tmp.path / "sim" / "trajectories.csv").string() +
            " --window 2015-03-01T00:00:00Z..2015-03-02T00:00:00Z --out " +
            (tmp.path / "agg.csv").string(),
        tmp.path);
    REQUIRE(agg.exit_code == 0);

    const auto direct = flowcast::read_flow_csv((tmp.path / "sim" / "flows.csv").string());
    const auto recovered = flowcast::read_flow_csv((tmp.path / "agg.csv").string());
    REQUIRE(direct.size() == recovered.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(direct[i].road_id == recovered[i].road_id);
        CHECK(direct[i].series.values() == recovered[i].series.values());
    }
}

TEST_CASE("evaluate output bytes do not depend on --jobs") {
    TempDir tmp;
    REQUIRE(run_cli("simulate --rows 2 --cols 2 --days 3 --seed 12 --out " +
                        (tmp.path / "sim").string(),
                    tmp.path)
                .exit_code == 0);
    const std::string common = "evaluate --flows " + (tmp.path / "sim" / "flows.csv").string() +
                               " --test-day 2015-03-03 --pmax 1 --qmax 1";
    REQUIRE(run_cli(common + " --jobs 1 --out " + (tmp.path / "a").string(), tmp.path)
                .exit_code == 0);
    REQUIRE(run_cli(common + " --jobs 4 --out " + (tmp.path / "b").string(), tmp.path)
                .exit_code == 0);
    for (const char* name : {"summary.json", "per_road.csv", "fleet_curves.csv"}) {
        std::ifstream a(tmp.path / "a" / name, std::ios::binary);
        std::ifstream b(tmp.path / "b" / name, std::ios::binary);
        std::ostringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK(sa.str() == sb.str());
        CHECK(!sa.str().empty());
    }
}

TEST_CASE("exit codes distinguish usage, data and compute errors") {
    TempDir tmp;
    CHECK(run_cli("--help", tmp.path).exit_code == 0);
    CHECK(run_cli("fit --flows x.csv --road r --order 0,0,0 --bogus-flag 1", tmp.path)
              .exit_code == 1);
    CHECK(run_cli("nonsense-command", tmp.path).exit_code == 1);

    // malformed order string -> usage
    const fs::path flows = tmp.path / "flows.csv";
    {
        std::vector<flowcast::FlowSeries> data{
            {"r", flowcast::TimeSeries(std::vector<double>(40, 2.0), 0)}};
        flowcast::write_flow_csv(data, flows.string());
    }
    CHECK(run_cli("fit --flows " + flows.string() + " --road r --order nope", tmp.path)
              .exit_code == 1);

    // missing input file -> data error
    const auto missing =
        run_cli("fit --flows /no/such/file.csv --road r --order 0,0,0", tmp.path);
    CHECK(missing.exit_code == 2);
    CHECK(read_stderr(tmp.path).find("data-error") != std::string::npos);

    // malformed CSV -> data error with a line number
    const fs::path bad = tmp.path / "bad.csv";
    {
        std::ofstream out(bad);
        out << "road_id,bin_start,count\nr,2015-03-01T00:00:00Z,oops\n";
    }
    CHECK(run_cli("fit --flows " + bad.string() + " --road r --order 0,0,0", tmp.path)
              .exit_code == 2);

    // too little data to fit -> data error
    const fs::path tiny = tmp.path / "tiny.csv";
    {
        std::vector<flowcast::FlowSeries> data{
            {"r", flowcast::TimeSeries(std::vector<double>(5, 1.0), 0)}};
        flowcast::write_flow_csv(data, tiny.string());
    }
    CHECK(run_cli("fit --flows " + tiny.string() + " --road r --order 1,0,0", tmp.path)
              .exit_code == 2);
}
