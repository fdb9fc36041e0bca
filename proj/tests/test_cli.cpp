#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rician/cli.hpp"
#include "rician/error.hpp"
#include "rician/io.hpp"

using namespace rician;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    const char* dir = std::getenv("RICIAN_TEST_TMP");
    return std::string(dir ? dir : "/tmp") + "/" + name;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = temp_path(name);
    std::ofstream(path) << text;
    return path;
}

const std::string kFig1Dist = "0 0.9\n0.7071067811865476 0.1\n";

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == cli::kSuccess);
    CHECK(run({"solve", "--help"}).code == cli::kSuccess);
    CHECK(run({}).code == cli::kInvalidInput);
    CHECK(run({"frobnicate"}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--snr", "0.1", "--kappa", "2", "--bogus"}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--snr", "abc", "--kappa", "2"}).code == cli::kInvalidInput);
}

TEST_CASE("invalid configurations exit with code 2") {
    CHECK(run({"solve", "--model", "rician-pn", "--constraint", "avg-power", "--K", "1", "--snr", "0"}).code ==
          cli::kInvalidInput);
    CHECK(run({"solve", "--snr", "0.1"}).code == cli::kInvalidInput);  // moment4 needs kappa
    CHECK(run({"solve", "--snr", "0.1", "--kappa", "1"}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--snr", "0.1", "--kappa", "2,3"}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--constraint", "peak", "--snr", "0.1", "--kappa", "2"}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--model", "awgn", "--snr", "0.1", "--kappa", "2"}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--K", "-1", "--snr", "0.1", "--kappa", "2"}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--format", "xml", "--snr", "0.1", "--kappa", "2"}).code == cli::kInvalidInput);
    CHECK(run({"sweep", "--constraint", "peak"}).code == cli::kInvalidInput);
    CHECK(run({"sweep", "--constraint", "peak", "--snr-grid", "0.1,0.05"}).code == cli::kInvalidInput);
    CHECK(run({"sweep", "--constraint", "peak", "--snr-grid", "0,0.05"}).code == cli::kInvalidInput);
    CHECK(run({"sweep", "--constraint", "peak", "--snr-grid", "log:0:1:3"}).code == cli::kInvalidInput);
    CHECK(run({"kt-check", "--snr", "0.05", "--kappa", "10"}).code == cli::kInvalidInput);
    CHECK(run({"kt-check", "--snr", "0.05", "--kappa", "10", "--dist", temp_path("missing.txt")}).code ==
          cli::kInvalidInput);
    const std::string bad = write_temp("bad_dist.txt", "0 0.9\n0.5\n");
    CHECK(run({"kt-check", "--snr", "0.05", "--kappa", "10", "--dist", bad}).code == cli::kInvalidInput);
    const std::string fig1 = write_temp("fig1_dist.txt", kFig1Dist);
    CHECK(run({"mc-check", "--dist", fig1, "--samples", "10"}).code == cli::kInvalidInput);
}

TEST_CASE("grid parsing") {
    CHECK(cli::parse_grid("0.01,0.05") == std::vector<double>{0.01, 0.05});
    const std::vector<double> lg = cli::parse_grid("log:1e-3:1e-1:3");
    REQUIRE(lg.size() == 3);
    CHECK(lg[1] == doctest::Approx(1e-2).epsilon(1e-14));
    CHECK(cli::parse_grid("lin:0:1:5")[2] == doctest::Approx(0.5));
    CHECK_THROWS_AS(cli::parse_grid("cubic:0:1:3"), DomainError);
    CHECK_THROWS_AS(cli::parse_grid("lin:0:1:2.5"), DomainError);
    CHECK_THROWS_AS(cli::parse_grid("0.1,,0.2"), DomainError);
}

TEST_CASE("config files") {
    cli::RunConfig cfg;
    cli::apply_json(cfg, nlohmann::json::parse(
                             R"({"model": "rician-pn", "K": 2, "snr_grid": [0.01, 0.1], "kappa": "2,10",
                                 "solver": {"restarts": 4}, "quadrature": {"panel_rel_tol": 1e-9}})"));
    CHECK(cfg.model == "rician-pn");
    CHECK(cfg.rician_k == 2.0);
    CHECK(cfg.snr_grid == std::vector<double>{0.01, 0.1});
    CHECK(cfg.kappa == std::vector<double>{2.0, 10.0});
    CHECK(cfg.solver.restarts == 4);
    CHECK(cfg.quadrature.panel_rel_tol == 1e-9);
    CHECK_THROWS_AS(cli::apply_json(cfg, nlohmann::json::parse(R"({"snr_alpha": 1})")), DomainError);
    CHECK_THROWS_AS(cli::apply_json(cfg, nlohmann::json::parse(R"({"solver": {"tries": 1}})")), DomainError);
    CHECK_THROWS_AS(cli::apply_json(cfg, nlohmann::json::parse(R"({"K": "one"})")), DomainError);

    const std::string path = write_temp("cfg.json", R"({"constraint": "peak", "K": 0, "snr": 0.05})");
    const Result r = run({"solve", "--config", path, "--K", "1"});
    CHECK(r.code == cli::kSuccess);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["rician_k"] == 1.0);  // flag overrides the file
    CHECK(j["distribution"].size() == 1);
    CHECK(run({"solve", "--config", write_temp("cfg_bad.json", R"({"colour": 1})")}).code == cli::kInvalidInput);
    CHECK(run({"solve", "--config", write_temp("cfg_broken.json", "{")}).code == cli::kInvalidInput);
}

TEST_CASE("solve reproduces the Fig. 1 optimum") {
    const Result r = run({"solve", "--model", "rician", "--constraint", "moment4", "--K", "1", "--snr", "0.05",
                          "--kappa", "10"});
    REQUIRE(r.code == cli::kSuccess);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["schema"] == "rician-capacity-solution/v1");
    CHECK(std::abs(j["capacity_nats"].get<double>() - 0.0531) <= 5e-4);
    CHECK(j["distribution"].size() == 2);
    CHECK(j["converged"] == true);
    CHECK(j["report"]["pass"] == true);
    CHECK(r.err.find("capacity:") != std::string::npos);
    CHECK_FALSE(j.contains("capacity_bits"));

    const Result bits = run({"solve", "--K", "1", "--snr", "0.05", "--kappa", "10", "--bits"});
    const nlohmann::json jb = nlohmann::json::parse(bits.out);
    CHECK(jb["capacity_bits"].get<double>() == doctest::Approx(jb["capacity_nats"].get<double>() / std::log(2.0)));
    CHECK(bits.err.find("bits") != std::string::npos);
}

TEST_CASE("solve peak K = 0 gives the equiprobable two-point input") {
    const Result r = run({"solve", "--model", "rician", "--constraint", "peak", "--K", "0", "--snr", "0.05"});
    REQUIRE(r.code == cli::kSuccess);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    REQUIRE(j["distribution"].size() == 2);
    CHECK(j["distribution"][0]["location"] == 0.0);
    CHECK(j["distribution"][1]["location"].get<double>() == doctest::Approx(std::sqrt(0.05)));
    CHECK(std::abs(j["distribution"][0]["probability"].get<double>() - 0.5) <= 0.01);
}

TEST_CASE("solve writes to --out and is byte-identical across runs") {
    const std::string a = temp_path("solve_a.json"), b = temp_path("solve_b.json");
    const Result ra = run({"solve", "--K", "1", "--snr", "0.02", "--kappa", "4", "--out", a});
    const Result rb = run({"solve", "--K", "1", "--snr", "0.02", "--kappa", "4", "--out", b});
    CHECK(ra.code == cli::kSuccess);
    CHECK(ra.out.find("capacity:") != std::string::npos);
    CHECK(io::read_file(a) == io::read_file(b));
    CHECK(ra.out == rb.out);
    CHECK(run({"solve", "--K", "1", "--snr", "0.02", "--kappa", "4", "--out", "/nonexistent/dir/x.json"}).code ==
          cli::kInvalidInput);
}

TEST_CASE("sweep over kappa keeps the curves ordered") {
    const std::string out = temp_path("kappa_sweep.csv");
    const Result r = run({"sweep", "--K", "1", "--kappa", "2,10", "--snr-grid", "log:1e-3:1e-1:10", "--out", out});
    REQUIRE(r.code == cli::kSuccess);
    const std::string text = io::read_file(out);
    const auto recs = io::parse_csv(text);
    REQUIRE(recs.size() == 20);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(recs[i].kappa == 2.0);
        CHECK(recs[i + 10].kappa == 10.0);
        CHECK(recs[i].snr_alpha == recs[i + 10].snr_alpha);
        CHECK(recs[i].capacity_nats <= recs[i + 10].capacity_nats + 1e-9);
        CHECK(recs[i].converged);
    }
    const Result again = run({"sweep", "--K", "1", "--kappa", "2,10", "--snr-grid", "log:1e-3:1e-1:10"});
    CHECK(again.out == text);
}

TEST_CASE("peak sweep at K = 0 has a vanishing slope at the origin") {
    const Result r = run({"sweep", "--constraint", "peak", "--K", "0", "--snr-grid", "0.01,0.05,0.1,0.2"});
    REQUIRE(r.code == cli::kSuccess);
    const auto recs = io::parse_csv(r.out);
    REQUIRE(recs.size() == 4);
    for (std::size_t i = 1; i < recs.size(); ++i)
        CHECK(recs[i - 1].capacity_nats / recs[i - 1].snr_alpha < recs[i].capacity_nats / recs[i].snr_alpha);
}

TEST_CASE("phase-noise sweep moves the nonzero mass outwards as the SNR falls") {
    const Result r = run({"sweep", "--model", "rician-pn", "--constraint", "avg-power", "--K", "1", "--snr-grid",
                          "0.001,0.01,0.1", "--format", "json"});
    REQUIRE(r.code == cli::kSuccess);
    const auto recs = io::sweep_from_json(nlohmann::json::parse(r.out));
    REQUIRE(recs.size() == 3);
    for (std::size_t i = 1; i < recs.size(); ++i)
        CHECK(recs[i - 1].locations.back() > recs[i].locations.back());
}

TEST_CASE("sweeps without warm starts give the same certified rows") {
    const Result warm = run({"sweep", "--constraint", "peak", "--K", "1", "--snr-grid", "0.05,0.1"});
    const Result cold = run({"sweep", "--constraint", "peak", "--K", "1", "--snr-grid", "0.05,0.1", "--no-warm-start"});
    CHECK(warm.code == cli::kSuccess);
    CHECK(cold.code == cli::kSuccess);
    const auto a = io::parse_csv(warm.out), b = io::parse_csv(cold.out);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].capacity_nats == doctest::Approx(b[i].capacity_nats).epsilon(1e-9));
}

TEST_CASE("sweep flags uncertified rows and exits with code 3") {
    const std::string cfg = write_temp("cfg_tight.json", R"({"solver": {"max_points": 1}})");
    const Result r = run({"sweep", "--config", cfg, "--K", "1", "--kappa", "10", "--snr-grid", "0.05"});
    CHECK(r.code == cli::kNotConverged);
    const auto recs = io::parse_csv(r.out);
    REQUIRE(recs.size() == 1);
    CHECK_FALSE(recs[0].converged);
}

TEST_CASE("kt-check") {
    const std::string fig1 = write_temp("fig1_dist.txt", kFig1Dist);
    const Result ok = run({"kt-check", "--K", "1", "--snr", "0.05", "--kappa", "10", "--dist", fig1});
    CHECK(ok.code == cli::kSuccess);
    const nlohmann::json j = nlohmann::json::parse(ok.out);
    CHECK(j["schema"] == "rician-kt-report/v1");
    CHECK(j["report"]["pass"] == true);
    CHECK(j["report"]["curve"]["r"].size() == j["report"]["curve"]["lhs"].size());
    CHECK(std::abs(j["report"]["lambda1"].get<double>() - 0.891) <= 0.02);

    const std::string perturbed = write_temp("perturbed.txt", "0 0.85\n0.7071067811865476 0.15\n");
    CHECK(run({"kt-check", "--K", "1", "--snr", "0.05", "--kappa", "10", "--dist", perturbed}).code ==
          cli::kNotConverged);
    const std::string zero = write_temp("zero.txt", "0 1\n");
    for (const char* snr : {"0.01", "0.05", "1"})
        CHECK(run({"kt-check", "--K", "1", "--snr", snr, "--kappa", "10", "--dist", zero}).code ==
              cli::kNotConverged);
}

TEST_CASE("mc-check battery") {
    const std::string fig1 = write_temp("fig1_dist.txt", kFig1Dist);
    const std::string zero = write_temp("zero.txt", "0 1\n");
    const std::string two = write_temp("two.txt", "0 0.5\n1 0.5\n");
    const std::vector<std::vector<std::string>> cases = {
        {"mc-check", "--K", "1", "--dist", zero},
        {"mc-check", "--K", "1", "--dist", fig1, "--samples", "2000000"},
        {"mc-check", "--model", "rician-pn", "--K", "1", "--dist", two, "--seed", "9"},
    };
    for (const auto& args : cases) {
        const Result r = run(args);
        CHECK(r.code == cli::kSuccess);
        const nlohmann::json j = nlohmann::json::parse(r.out);
        CHECK(j["agree"] == true);
        CHECK(std::abs(j["delta"].get<double>()) <= 3.0 * j["std_err"].get<double>());
    }
}
