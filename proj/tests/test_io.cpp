#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "rician/error.hpp"
#include "rician/io.hpp"
#include "rician/optimizer.hpp"

using namespace rician;

namespace {

io::SweepRecord sample_record() {
    io::SweepRecord r;
    r.snr_alpha = 0.05;
    r.model = "rician";
    r.constraint = "moment4";
    r.rician_k = 1.0;
    r.kappa = 10.0;
    r.capacity_nats = 0.053083539954088541;
    r.n_points = 2;
    r.locations = {0.0, 0.707106781187};
    r.probabilities = {0.9, 0.1};
    r.lambda1 = 0.89105707119161236;
    r.lambda2 = 0.15136497011102512;
    r.kt_grid_min = -1.2345678901234567e-16;
    r.converged = true;
    return r;
}

}  // namespace

TEST_CASE("CSV header and row layout") {
    CHECK(io::csv_header() ==
          "snr_alpha,model,constraint,rician_k,kappa,capacity_nats,n_points,locations,probabilities,"
          "lambda1,lambda2,kt_grid_min,converged");
    const std::string row = io::to_csv_row(sample_record());
    CHECK(row ==
          "0.050000000000000003,rician,moment4,1,10,0.053083539954088543,2,0;0.707106781187,0.9;0.1,"
          "0.89105707119161237,0.15136497011102512,-1.2345678901234568e-16,true");
    io::SweepRecord peak = sample_record();
    peak.constraint = "peak";
    peak.kappa.reset();
    peak.lambda1.reset();
    peak.lambda2.reset();
    peak.converged = false;
    const std::string prow = io::to_csv_row(peak);
    CHECK(prow.find(",1,,0.05") != std::string::npos);
    CHECK(prow.find(",,,-1.2") != std::string::npos);
    CHECK(prow.ends_with(",false"));
}

TEST_CASE("CSV round trip is bit exact") {
    std::vector<io::SweepRecord> recs{sample_record()};
    io::SweepRecord b = sample_record();
    b.snr_alpha = 0.1 / 3.0;
    b.capacity_nats = std::nextafter(0.1, 1.0);
    b.kappa.reset();
    b.lambda2.reset();
    b.converged = false;
    b.n_points = 3;
    b.locations = {0.0, 1.25, 3.5};
    b.probabilities = {0.5, 0.25, 0.25};
    recs.push_back(b);
    const std::string text = io::to_csv(recs);
    CHECK(text.starts_with("# schema: rician-capacity-sweep/v1\n"));
    const std::vector<io::SweepRecord> back = io::parse_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == recs[0]);
    CHECK(back[1] == recs[1]);
    CHECK(io::to_csv(back) == text);
}

TEST_CASE("records built from solutions round-trip through CSV and JSON") {
    const ChannelSpec ch{ChannelModel::ClassicalRician, 1.0};
    const ConstraintSet cs = Moment4{0.05, 10.0};
    const Solution sol = solve_capacity(ch, cs);
    const io::SweepRecord r = io::make_record(sol, ch, cs);
    CHECK(r.n_points == 2);
    CHECK(r.kappa == 10.0);
    CHECK(r.lambda1.has_value());
    CHECK(r.lambda2.has_value());
    CHECK(r.capacity_nats == sol.capacity_nats);
    CHECK(io::parse_csv(io::to_csv({r})).at(0) == r);
    CHECK(io::record_from_json(nlohmann::json::parse(io::to_json(r).dump())) == r);
    const io::SweepRecord p = io::make_record(solve_capacity(ch, Peak{0.05}), ch, Peak{0.05});
    CHECK_FALSE(p.kappa.has_value());
    CHECK_FALSE(p.lambda1.has_value());
    CHECK_FALSE(p.lambda2.has_value());
}

TEST_CASE("JSON sweep round trip") {
    const std::vector<io::SweepRecord> recs{sample_record()};
    const nlohmann::ordered_json j = io::sweep_to_json(recs);
    CHECK(j["schema"] == "rician-capacity-sweep/v1");
    CHECK(j["records"][0]["kappa"] == 10.0);
    const auto back = io::sweep_from_json(nlohmann::json::parse(j.dump()));
    REQUIRE(back.size() == 1);
    CHECK(back[0] == recs[0]);
    nlohmann::json bad = nlohmann::json::parse(j.dump());
    bad["schema"] = "rician-capacity-sweep/v0";
    CHECK_THROWS_AS(io::sweep_from_json(bad), DomainError);
}

TEST_CASE("CSV rejects unknown schemas and malformed rows") {
    const std::string good = io::to_csv({sample_record()});
    std::string other = good;
    other.replace(other.find("v1"), 2, "v2");
    CHECK_THROWS_AS(io::parse_csv(other), DomainError);
    CHECK_THROWS_AS(io::parse_csv(good.substr(good.find('\n') + 1)), DomainError);
    std::string header = good;
    header.replace(header.find("snr_alpha"), 9, "snr");
    CHECK_THROWS_AS(io::parse_csv(header), DomainError);
    CHECK_THROWS_AS(io::parse_csv(good + "1,2,3\n"), DomainError);
    std::string nonum = good;
    nonum.replace(nonum.find("0.050000000000000003"), 20, "zero");
    CHECK_THROWS_AS(io::parse_csv(nonum), DomainError);
    std::string flag = good;
    flag.replace(flag.rfind("true"), 4, "yes");
    CHECK_THROWS_AS(io::parse_csv(flag), DomainError);
    io::SweepRecord r = sample_record();
    r.n_points = 3;
    CHECK_THROWS_AS(io::to_csv_row(r), DomainError);
}

TEST_CASE("KT report JSON") {
    KTReport rep;
    rep.lambda1 = 0.5;
    rep.mass_point_residuals = {1e-9, -2e-9};
    rep.pass = true;
    rep.curve_r = {0.0, 1.0};
    rep.curve_lhs = {0.0, 0.25};
    const nlohmann::ordered_json j = io::to_json(rep);
    CHECK(j["lambda1"] == 0.5);
    CHECK(j["pass"] == true);
    CHECK(j["mass_point_residuals"].size() == 2);
    CHECK(j["curve"]["lhs"][1] == 0.25);
    KTReport plain;
    CHECK_FALSE(io::to_json(plain).contains("curve"));
}

TEST_CASE("distribution files") {
    const AmplitudeDistribution F = io::parse_distribution(
        "# Fig. 1 input\n0 0.9   # zero symbol\n\n  0.7071067811865476\t0.1\n");
    REQUIRE(F.size() == 2);
    CHECK(F[1].location == 0.7071067811865476);
    CHECK(F[0].probability == doctest::Approx(0.9).epsilon(1e-15));
    // unsorted input and small rounding in the weights are accepted
    const AmplitudeDistribution G = io::parse_distribution("1.5 0.3333333\n0.5 0.6666667\n");
    CHECK(G[0].location == 0.5);
    CHECK(G[0].probability + G[1].probability == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(io::parse_distribution(""), DomainError);
    CHECK_THROWS_AS(io::parse_distribution("# nothing\n"), DomainError);
    CHECK_THROWS_AS(io::parse_distribution("0 0.5 7\n"), DomainError);
    CHECK_THROWS_AS(io::parse_distribution("0 x\n"), DomainError);
    CHECK_THROWS_AS(io::parse_distribution("0 0.5\n1 0.4\n"), DomainError);
    CHECK_THROWS_AS(io::parse_distribution("-1 1\n"), DomainError);
    CHECK_THROWS_AS(io::parse_distribution("0 0\n1 1\n"), DomainError);
    const AmplitudeDistribution H = io::parse_distribution(io::format_distribution(F));
    CHECK(H.locations() == F.locations());
    CHECK(H.probabilities() == F.probabilities());
}
