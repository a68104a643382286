#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "lbctl/errors.hpp"
#include "lbctl/field_io.hpp"
#include "lbctl/runner.hpp"
#include "random_fields.hpp"

using namespace lbctl;
using lbctl::testing::random_scalar;
using lbctl::testing::random_velocity;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("lbctl_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const char* kSmallDecay = R"({
  "kind": "decay",
  "grid": {"nx": 12, "ny": 12},
  "time": {"horizon": 0.25, "nt": 32},
  "system": {"law": {"kind": "L2", "nu0": 1.0, "nu1": 0.1}},
  "initial": {"velocity": {"profile": "curl_sin2", "amplitude": 1.0},
              "theta": {"profile": "sin_sin", "amplitude": 1.0}, "energy": 1e-4}
})";

}  // namespace

TEST_CASE("field dumps round-trip bit for bit") {
    const GridSpec g(10, 12, 1.0, 1.5);
    std::mt19937_64 rng(8);
    State s(random_velocity(g, rng), random_scalar(g, rng));
    s.pressure = random_scalar(g, rng);
    s.theta.values()[0] = -0.0;
    s.theta.values()[1] = std::numeric_limits<double>::denorm_min();
    s.theta.values()[2] = std::numeric_limits<double>::quiet_NaN();

    std::stringstream ss;
    write_record(ss, to_record(s, 0.375));
    AdjointState a(g);
    a.phi = random_velocity(g, rng);
    a.psi = random_scalar(g, rng);
    write_record(ss, to_record(a, 0.5));
    write_record(ss, to_record(random_velocity(g, rng), random_scalar(g, rng), 0.25));

    const std::vector<FieldRecord> recs = read_records(ss);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].kind == "state");
    CHECK(recs[1].kind == "adjoint");
    CHECK(recs[2].kind == "control");
    CHECK(recs[0].time == 0.375);
    CHECK(recs[0].grid() == g);
    const State back = state_from_record(recs[0]);
    CHECK(same_bits(back.y.u_values(), s.y.u_values()));
    CHECK(same_bits(back.y.v_values(), s.y.v_values()));
    CHECK(same_bits(back.theta.values(), s.theta.values()));
    CHECK(same_bits(back.pressure.values(), s.pressure.values()));
    const AdjointState aback = adjoint_from_record(recs[1]);
    CHECK(same_bits(aback.psi.values(), a.psi.values()));
    CHECK_THROWS_AS(state_from_record(recs[1]), IoError);

    // re-serialising gives the same bytes
    std::stringstream s1, s2;
    write_record(s1, recs[0]);
    write_record(s2, to_record(s, 0.375));
    CHECK(s1.str() == s2.str());
}

TEST_CASE("field dumps reject foreign or truncated input") {
    const GridSpec g(8, 8);
    std::stringstream ss;
    write_record(ss, to_record(State(g), 0.0));
    const std::string bytes = ss.str();
    std::istringstream cut(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(read_record(cut), IoError);
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream foreign(bad);
    CHECK_THROWS_AS(read_record(foreign), IoError);
}

TEST_CASE("config: minimal parse, resolved echo, round trip") {
    const ExperimentConfig c = parse_config_text(R"({"kind": "simulate"})");
    CHECK(c.kind == ExperimentKind::Simulate);
    CHECK(c.nx == 32);
    const std::string echo = emit_config(c);
    CHECK(echo.find("\"stokes_tol\"") != std::string::npos);
    CHECK(echo.find("\"eps_sweep\"") != std::string::npos);
    const ExperimentConfig again = parse_config_text(echo);
    CHECK(emit_config(again) == echo);

    const ExperimentConfig d = parse_config_text(kSmallDecay);
    CHECK(emit_config(parse_config_text(emit_config(d))) == emit_config(d));
    CHECK(*d.initial.energy == 1e-4);
}

TEST_CASE("config: strict keys and validation with key paths") {
    try {
        parse_config_text(R"({"kind": "decay", "system": {"law": {"nu0": 1.0, "nu2": 3.0}}})");
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(e.key_path() == "system.law.nu2");
    }
    try {
        parse_config_text(R"({"kind": "decay", "grid": {"nx": "32"}})");
        FAIL("string accepted for nx");
    } catch (const ConfigError& e) {
        CHECK(e.key_path() == "grid.nx");
    }
    try {
        parse_config_text(R"({"kind": "decay", "system": {"law": {"nu0": 0.0}}})");
        FAIL("nu0 = 0 accepted");
    } catch (const ConfigError& e) {
        CHECK(e.key_path() == "system");
    }
    CHECK_THROWS_AS(parse_config_text(R"({"grid": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"kind": "solve"})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"kind": "decay", "initial": {"theta": {"profile": "gauss"}}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("{\"kind\": \"decay\""), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"kind": "decay", "time": {"nt": 4}})"), ConfigError);
}

TEST_CASE("config hash ignores the output section") {
    ExperimentConfig a = parse_config_text(kSmallDecay);
    ExperimentConfig b = a;
    b.out_dir = "elsewhere";
    b.dump_fields = true;
    CHECK(config_hash(a) == config_hash(b));
    b.system.law.nu1 = 0.2;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("initial data: energy rescaling and seeded randomness") {
    ExperimentConfig c = parse_config_text(kSmallDecay);
    const Problem pb(c.grid(), c.time(), c.system, c.patch);
    CHECK(energy_sample(make_initial_state(c, pb.solver()), 0.0).E == doctest::Approx(1e-4).epsilon(1e-12));
    c.initial.velocity = {"random", 0.5};
    c.initial.energy.reset();
    const State a = make_initial_state(c, pb.solver());
    const State b = make_initial_state(c, pb.solver());
    CHECK(same_bits(a.y.u_values(), b.y.u_values()));
    c.seed = 99;
    const State d = make_initial_state(c, pb.solver());
    CHECK(!same_bits(a.y.u_values(), d.y.u_values()));
    c.initial = {};
    c.initial.energy = 1.0;
    CHECK_THROWS_AS(make_initial_state(c, pb.solver()), ConfigError);
}

TEST_CASE("decay experiment: artifacts, determinism, field dumps") {
    const ExperimentConfig c = parse_config_text(kSmallDecay);
    const fs::path d1 = scratch("decay1"), d2 = scratch("decay2");
    RunOptions o1;
    o1.out_dir = d1;
    o1.dump_fields = true;
    RunOptions o2;
    o2.out_dir = d2;
    o2.dump_fields = true;
    o2.jobs = 3;
    const RunOutcome r1 = run_experiment(c, o1);
    const RunOutcome r2 = run_experiment(c, o2);
    CHECK(r1.exit_code == 0);
    CHECK(r1.report.text("config_hash") == hex_hash(config_hash(c)));
    CHECK(r1.report.has("grid_hash"));
    REQUIRE(r1.artifacts.size() == r2.artifacts.size());
    for (std::size_t i = 0; i < r1.artifacts.size(); ++i) {
        CHECK(r1.artifacts[i].filename() == r2.artifacts[i].filename());
        CHECK(slurp(r1.artifacts[i]) == slurp(r2.artifacts[i]));
    }

    const std::string stem = "decay-" + hex_hash(config_hash(c));
    std::ifstream csv(d1 / (stem + ".energy.csv"));
    std::string line;
    std::size_t rows = 0;
    std::getline(csv, line);
    CHECK(line == "t,E,Phi,grad_y_sq,theta_sq,grad_theta_sq");
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == c.nt + 1);

    const std::vector<FieldRecord> traj = read_dump(d1 / (stem + ".trajectory.lbf"));
    REQUIRE(traj.size() == c.nt + 1);
    const Problem pb(c.grid(), c.time(), c.system, c.patch);
    const State s0 = make_initial_state(c, pb.solver());
    const RunResult run = run_nonlinear(pb, s0.y, s0.theta);
    CHECK(same_bits(state_from_record(traj.back()).theta.values(), run.trajectory.final_state().theta.values()));

    std::ifstream rep(d1 / (stem + ".report.txt"));
    const Report back = Report::read(rep);
    CHECK(back.entries() == r1.report.entries());
    CHECK(fs::exists(r1.timing_file));
}

TEST_CASE("failed checks give exit code 1; CG stagnation dumps the iterate") {
    ExperimentConfig c = parse_config_text(R"({
      "kind": "linear-control",
      "grid": {"nx": 12, "ny": 12},
      "time": {"horizon": 0.5, "nt": 32},
      "system": {"law": {"kind": "L2", "nu0": 0.1, "nu1": 0.0}, "mode": "linearized"},
      "initial": {"theta": {"profile": "sin_sin", "amplitude": 0.1}},
      "penalty": {"epsilon": 1e-2},
      "checks": {"terminal_ratio": 1e-12}
    })");
    RunOptions o;
    o.out_dir = scratch("linear");
    const RunOutcome r = run_experiment(c, o);
    CHECK(r.exit_code == 1);
    CHECK(r.report.text("check.terminal_ratio") == "false");
    CHECK(r.report.text("checks_passed") == "false");

    c.penalty.cg_max_iters = 1;
    c.penalty.cg_tol = 1e-14;
    c.penalty.epsilon = 1e-6;
    CHECK_THROWS_AS(run_experiment(c, o), CgStagnation);
    const std::string stem = "linear-control-" + hex_hash(config_hash(c));
    CHECK(read_dump(*o.out_dir / (stem + ".cg_iterate.lbf")).size() == 32);
}

TEST_CASE("verify experiment on a small configuration") {
    const ExperimentConfig c = parse_config_text(R"({
      "kind": "verify",
      "grid": {"nx": 16, "ny": 16},
      "time": {"horizon": 0.5, "nt": 16},
      "verify": {"duality_trials": 2, "gradient_directions": 2, "heating_trials": 5,
                 "mms_grids": [16, 32], "mms_horizon": 0.0625, "chain_nt": 64}
    })");
    RunOptions o;
    o.out_dir = scratch("verify");
    o.jobs = 2;
    const RunOutcome r = run_experiment(c, o);
    CHECK(r.exit_code == 0);
    CHECK(r.checks.size() == 5);
    for (const CheckResult& k : r.checks) CHECK_MESSAGE(k.passed, k.name << ": " << k.detail);
}
