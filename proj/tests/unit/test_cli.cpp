// Copyright 2026 The collisional-tur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ctur/cli/config.hpp"
#include "ctur/cli/sweep.hpp"

using namespace ctur;
using namespace ctur::cli;
namespace fs = std::filesystem;

namespace {

std::string config_error_path(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        return what.substr(0, what.find(':'));
    }
    return "<accepted>";
}

std::string csv_of(const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_csv(os, c, rows);
    return os.str();
}

struct Command {
    int status;
    std::string out;
};

Command run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + CTUR_CLI_PATH + "\" " + args + " 2>&1";
    Command r{-1, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 512> buf{};
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ctur_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallScan = R"({
  "mode": "markov_ness",
  "sweep": [{"name": "g1", "min": 0.1, "max": 0.9, "points": 9}]
})";

} // namespace

TEST_CASE("configuration errors carry a field path", "[cli]") {
    CHECK(config_error_path("{}") == "mode");
    CHECK(config_error_path("[1,") == "<document>");
    CHECK(config_error_path(R"({"mode": "markov"})") == "mode");
    CHECK(config_error_path(R"({"mode": "qtur", "colour": 1})") == "colour");
    CHECK(config_error_path(R"({"mode": "qtur", "params": {"g3": 1}})") == "params.g3");
    CHECK(config_error_path(R"({"mode": "qtur", "params": {"tau": -1}})") == "params");
    CHECK(config_error_path(R"({"mode": "qtur", "sweep": [{"name": "g1", "min": 0, "max": 1, "points": 0}]})") ==
          "sweep[0].points");
    CHECK(config_error_path(R"({"mode": "qtur", "sweep": [{"name": "x", "min": 0, "max": 1, "points": 2}]})") ==
          "sweep[0].name");
    CHECK(config_error_path(R"({"mode": "qtur", "sweep": [{"name": "g1", "min": 0, "max": 1}]})") ==
          "sweep[0].points");
    CHECK(config_error_path(R"({"mode": "qtur", "sweep": [{"name": "tau", "min": -1, "max": 1, "points": 2}]})") ==
          "sweep[0]");
    CHECK(config_error_path(R"({"mode": "nm1"})") == "times");
    CHECK(config_error_path(R"({"mode": "qtur", "times": [1]})") == "times");
    CHECK(config_error_path(R"({"mode": "nm1", "times": [1, -2]})") == "times[1]");
    CHECK(config_error_path(R"({"mode": "qtur", "output": {"format": "xml"}})") == "output.format");
    CHECK(config_error_path(R"({"mode": "blp", "times": [1], "blp": {"grid_points": 0}})") == "blp.grid_points");
    CHECK(config_error_path(R"({"mode": "qtur", "threads": "many"})") == "threads");
    CHECK(config_error_path(kSmallScan) == "<accepted>");
}

TEST_CASE("grid expansion", "[cli]") {
    auto c = parse_config_text(R"({"mode": "qtur"})");
    CHECK(expand_grid(c).size() == 1);
    const auto rows = run_sweep(c, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ok());
    CHECK(rows[0].q_q.has_value());
    CHECK(!rows[0].n_value.has_value());

    c = parse_config_text(R"({"mode": "qtur", "sweep": [
        {"name": "g1", "min": 0.2, "max": 0.2, "points": 1},
        {"name": "nu", "min": 1e-3, "max": 1, "points": 4, "scale": "log"}]})");
    const auto grid = expand_grid(c);
    REQUIRE(grid.size() == 4);
    CHECK(std::abs(grid[1].params.nu - 1e-2) < 1e-15);
    CHECK(grid[3].params.nu == 1.0);
    CHECK(grid[2].params.g1 == 0.2);
}

TEST_CASE("CSV layout", "[cli]") {
    const auto c = parse_config_text(kSmallScan);
    const auto rows = run_sweep(c, 1);
    REQUIRE(rows.size() == 9);
    const std::string csv = csv_of(c, rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "g1,t,mean,variance,sigma,Q,Q_q,N,status");
    std::getline(in, line);
    CHECK(line.rfind("0.1,,", 0) == 0);
    CHECK(line.ends_with(",,,ok"));
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(-2.5e-7) == "-2.5e-07");
    CHECK(format_number(1.637) == "1.637");
}

TEST_CASE("failed rows carry no numbers", "[cli]") {
    auto c = parse_config_text(R"({"mode": "markov_ness", "params": {"nu": 0}})");
    const auto rows = run_sweep(c, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "zero_mean_current");
    CHECK((!rows[0].mean && !rows[0].q && !rows[0].variance));
    CHECK(csv_of(c, rows).ends_with(",,,,,,,zero_mean_current\n"));

    CHECK(status_of(ErrorCode::NotSaturated) == "not_saturated");
    CHECK(status_of(ErrorCode::DegenerateSpectrum) == "degenerate_kernel");
    CHECK(status_of(ErrorCode::NoUniqueSteadyState) == "degenerate_kernel");
}

TEST_CASE("thread count does not change results", "[cli]") {
    const auto c = parse_config_text(R"({"mode": "nm1", "times": [5, 10],
        "params": {"omega_s": 4, "omega_a": 4, "omega": 4, "nu": 0.7, "g2": 0.01, "temp_s": 1.5, "temp_a": 2.5},
        "sweep": [{"name": "tau", "min": 0.3, "max": 0.9, "points": 3},
                  {"name": "g1", "min": 0.5, "max": 1.5, "points": 3}]})");
    const std::string one = csv_of(c, run_sweep(c, 1));
    const std::string four = csv_of(c, run_sweep(c, 4));
    CHECK(one == four);
    CHECK(std::count(one.begin(), one.end(), '\n') == 1 + 9 * 2);
}

TEST_CASE("thread cap from the environment", "[cli]") {
    ::setenv("CTUR_THREADS", "2", 1);
    CHECK(resolve_threads(8, 100) == 2);
    CHECK(resolve_threads(1, 100) == 1);
    ::setenv("CTUR_THREADS", "junk", 1);
    CHECK(resolve_threads(8, 100) == 8);
    ::unsetenv("CTUR_THREADS");
    CHECK(resolve_threads(8, 3) == 3);
}

TEST_CASE("JSON output", "[cli]") {
    const auto c = parse_config_text(R"({"mode": "markov_ness", "output": {"format": "json"},
        "sweep": [{"name": "nu", "min": 0, "max": 0.05, "points": 2}]})");
    std::ostringstream os;
    write_json(os, c, run_sweep(c, 1));
    const auto doc = nlohmann::json::parse(os.str());
    CHECK(doc["mode"] == "markov_ness");
    REQUIRE(doc["rows"].size() == 2);
    CHECK(doc["rows"][0]["status"] == "zero_mean_current");
    CHECK(!doc["rows"][0].contains("Q"));
    CHECK(doc["rows"][1]["status"] == "ok");
    CHECK(doc["rows"][1]["Q"].get<double>() > 0.0);
}

TEST_CASE("config hash", "[cli]") {
    CHECK(config_hash("") == "cbf29ce484222325");
    CHECK(config_hash("a") == "af63dc4c8601ec8c");
}

TEST_CASE("command-line front end", "[cli][binary]") {
    SECTION("presets") {
        const auto r = run_cli("list-presets");
        CHECK(r.status == 0);
        CHECK(r.out == "fig1a\nfig1b\nfig1c\nfig2_mid\nfig2_right\nfig3_left\nfig3_mid\nfig3_right\nfig4\n");
        std::istringstream names(r.out);
        for (std::string name; std::getline(names, name);) {
            INFO(name);
            CHECK(run_cli("validate " + name).status == 0);
        }
    }
    SECTION("successful run and metadata") {
        const auto cfg = scratch("ok.json");
        const auto out = scratch("ok.csv");
        write_text(cfg, kSmallScan);
        const auto r = run_cli("run -q " + cfg.string() + " -o " + out.string());
        CHECK(r.status == 0);
        const std::string first = read_text(out);
        CHECK(first.starts_with("g1,t,mean"));
        const auto meta = nlohmann::json::parse(read_text(out.string() + ".meta.json"));
        CHECK(meta["config_hash"] == config_hash(kSmallScan));
        CHECK(meta.contains("code_version"));
        CHECK(meta["wall_time_s"].get<double>() >= 0.0);
        CHECK(run_cli("run -q " + cfg.string() + " -o " + out.string()).status == 0);
        CHECK(read_text(out) == first);
    }
    SECTION("physics errors stay in rows") {
        const auto cfg = scratch("zero.json");
        write_text(cfg, R"({"mode": "markov_ness", "sweep": [{"name": "nu", "min": 0, "max": 0.05, "points": 2}]})");
        const auto out = scratch("zero.csv");
        CHECK(run_cli("run -q " + cfg.string() + " -o " + out.string()).status == 2);
        CHECK(read_text(out).find("zero_mean_current") != std::string::npos);
    }
    SECTION("configuration errors") {
        const auto cfg = scratch("bad.json");
        write_text(cfg, R"({"mode": "qtur", "params": {"g3": 1}})");
        const auto r = run_cli("validate " + cfg.string());
        CHECK(r.status == 1);
        CHECK(r.out.find("params.g3") != std::string::npos);
        CHECK(run_cli("run no_such_preset").status == 1);
    }
}

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        if (line.ends_with(',')) cells.emplace_back();
        out.push_back(std::move(cells));
    }
    return out;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

} // namespace

TEST_CASE("bundled presets reproduce their reference shapes", "[cli][binary][presets]") {
    SECTION("steady-state TUR minimum over g1") {
        const auto out = scratch("fig1a.csv");
        REQUIRE(run_cli("run -q fig1a -o " + out.string()).status == 0);
        const auto rows = csv_rows(read_text(out));
        REQUIRE(rows.size() == 201);
        const auto q = column(rows[0], "Q");
        double lowest = 1e300;
        for (std::size_t i = 1; i < rows.size(); ++i) lowest = std::min(lowest, std::stod(rows[i][q]));
        CHECK(std::abs(lowest - 1.637) <= 0.03 * 1.637);
    }
    SECTION("chain non-Markovianity rises then plateaus") {
        const auto out = scratch("fig3_left.csv");
        REQUIRE(run_cli("run -q fig3_left -o " + out.string()).status == 0);
        const auto rows = csv_rows(read_text(out));
        const auto n_col = column(rows[0], "N");
        std::vector<double> n;
        for (std::size_t i = 1; i < rows.size(); ++i) n.push_back(std::stod(rows[i][n_col]));
        REQUIRE(n.size() >= 4);
        CHECK(n.front() > 0.0);
        CHECK(n.back() > n.front());
        for (std::size_t i = 1; i < n.size(); ++i) CHECK(n[i] >= n[i - 1]);
        CHECK((n.back() - n[n.size() / 2]) / n.back() < 0.01);
    }
}
