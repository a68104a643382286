#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lbctl/errors.hpp"
#include "lbctl/geometry.hpp"
#include "lbctl/operators.hpp"
#include "lbctl/weights.hpp"

using namespace lbctl;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Closed-form oracles in 50-digit arithmetic.
Big big_gap(double lambda, double m, double eta) {
    const Big l(lambda), mm(m), e(eta);
    const Big big_e = exp(Big(1.25) * l * mm * e);
    const Big ahat = big_e - exp(l * (mm * e + e));
    const Big astar = big_e - exp(l * mm * e);
    return 18 * ahat - 17 * astar;
}

Big big_log_rho2(double s, double lambda, double m, double t, double horizon) {
    const Big l(lambda), mm(m), T(horizon), tt(t);
    const Big el = tt <= T / 2 ? T * T / 4 : tt * (T - tt);
    const Big el4 = el * el * el * el;
    const Big big_e = exp(Big(1.25) * l * mm);
    const Big ahat = (big_e - exp(l * (mm + 1))) / el4;
    const Big astar = (big_e - exp(l * mm)) / el4;
    const Big xihat = exp(l * (mm + 1)) / el4;
    return Big(s) * (4 * ahat - 3 * astar) - 8 * log(xihat);
}

WeightTables tables(double s, double m, std::size_t nt, std::size_t n = 16) {
    GridSpec g(n, n);
    ControlPatch patch;
    Eta0 eta = build_eta0(g, patch);
    return eval_weights({s, 1.0, m, 1.0}, eta, TimeGrid(1.0, nt));
}

}  // namespace

TEST_CASE("ell branches") {
    CHECK(ell(0.5, 1.0) == 0.25);
    CHECK(ell(0.75, 1.0) == 0.1875);
    CHECK(ell(1.0, 1.0) == 0.0);
    CHECK(ell(0.5 + 1e-12, 1.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(ell(1.5, 1.0), DomainError);
    CHECK_THROWS_AS(ell(-0.1, 1.0), DomainError);
}

TEST_CASE("eta0 profile") {
    GridSpec g(32, 32);
    ControlPatch patch;
    Eta0 e = build_eta0(g, patch);
    CHECK(e.node(16, 16) == 1.0);
    for (std::size_t i = 0; i <= 32; ++i) {
        CHECK(e.node(i, 0) == 0.0);
        CHECK(e.node(i, 32) == 0.0);
        CHECK(e.node(0, i) == 0.0);
        CHECK(e.node(32, i) == 0.0);
    }
    for (double v : e.cells.values()) CHECK(v > 0.0);
    CHECK(e.grad_margin > 0.0);

    ControlPatch off;
    off.center = {0.2, 0.2};
    off.half_widths = {0.1, 0.1};
    CHECK_THROWS_AS(build_eta0(g, off), GeometryError);
    ControlPatch outside;
    outside.center = {0.05, 0.5};
    CHECK_THROWS_AS(build_eta0(g, outside), GeometryError);
}

TEST_CASE("cutoff is a plateau bump supported in omega") {
    GridSpec g(32, 32);
    ControlPatch patch;
    CHECK(cutoff_value(patch, 0.5, 0.5) == 1.0);
    ScalarField c = cutoff_1omega(g, patch);
    double integral = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double v = c(i, j);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (!patch.in_omega(g.xc(i), g.yc(j))) CHECK(v == 0.0);
            if (patch.in_omega0(g.xc(i), g.yc(j))) CHECK(v == 1.0);
            integral += v * g.cell_area();
        }
    CHECK(integral > 0.0);
    CHECK(integral <= patch.area());
    VelocityField f = cutoff_faces(g, patch);
    for (std::size_t j = 0; j < g.ny(); ++j) CHECK(f.u(0, j) == 0.0);
}

TEST_CASE("extrema match the closed forms and bound the field weights") {
    WeightTables w = tables(1.0, 20.0, 64);
    const double astar0 = (std::exp(25.0) - std::exp(20.0)) / std::pow(0.25, 4);
    CHECK(std::exp(w.log_alpha_star[0]) == doctest::Approx(astar0).epsilon(1e-13));
    // alpha* is smallest where ell is largest
    double lo = w.log_alpha_star[0];
    for (double v : w.log_alpha_star) CHECK(v >= lo);
    for (std::size_t k = 0; k < w.nt; ++k)
        for (std::size_t c = 0; c < w.log_alpha_num.size(); ++c) {
            CHECK(w.log_alpha(k, c) <= w.log_alpha_star[k] + 1e-12);
            CHECK(w.log_alpha(k, c) >= w.log_alpha_hat[k] - 1e-12);
            CHECK(w.log_xi(k, c) >= w.log_xi_star[k] - 1e-12);
            CHECK(w.log_xi(k, c) <= w.log_xi_hat[k] + 1e-12);
        }
    for (std::size_t k = w.nt / 2; k + 1 < w.nt; ++k) CHECK(w.log_xi_hat[k + 1] >= w.log_xi_hat[k]);
}

TEST_CASE("log rho2 agrees with a 50-digit oracle") {
    WeightTables w = tables(1.0, 20.0, 64);
    for (std::size_t k : {std::size_t{0}, std::size_t{32}, std::size_t{40}, std::size_t{63}}) {
        const Big ref = big_log_rho2(1.0, 1.0, 20.0, w.t[k], 1.0);
        const double r = ref.convert_to<double>();
        CHECK(w.log_rho2[k] == doctest::Approx(r).epsilon(1e-12));
    }
    CHECK(w.any_saturated());
}

TEST_CASE("gap margin against the oracle") {
    CHECK_THROWS_AS(check_weight_gap({1.0, 1.0, 20.0, 0.0}), DegenerateError);
    CHECK(check_weight_gap({1.0, 1.0, 100.0, 1.0}) > 0.0);
    CHECK(big_gap(1.0, 100.0, 1.0) > 0);
    const double g401 = check_weight_gap({1.0, 1.0, 4.01, 1.0});
    const Big ref = big_gap(1.0, 4.01, 1.0);
    CHECK(g401 < 0.0);
    CHECK(g401 == doctest::Approx(ref.convert_to<double>()).epsilon(1e-12));
    const double g30 = check_weight_gap({1.0, 1.0, 30.0, 1.0});
    CHECK(g30 == doctest::Approx(big_gap(1.0, 30.0, 1.0).convert_to<double>()).epsilon(1e-12));
    CHECK(check_weight_gap({1.0, 1.0, 5000.0, 1.0}) > 0.0);
}

TEST_CASE("find_min_m brackets the oracle threshold") {
    // feasibility threshold: m = 4 ln(18 e^{lambda eta} - 17) / (lambda eta)
    const Big mstar = 4 * log(18 * exp(Big(1)) - 17);
    const double golden = mstar.convert_to<double>();
    CHECK(golden == doctest::Approx(13.8543).epsilon(1e-4));
    const double m = find_min_m(1.0, 1.0);
    CHECK(m >= golden);
    CHECK(m - golden <= 1e-3);
    CHECK(check_weight_gap({1.0, 1.0, m, 1.0}) > 0.0);
    CHECK(check_weight_gap({1.0, 1.0, m - 1e-2, 1.0}) <= 0.0);
    CHECK(check_weight_gap({1.0, 1.0, 2.0 * m, 1.0}) > 0.0);
    CHECK(big_gap(1.0, 2.0 * m, 1.0) > 0);
    CHECK_THROWS_AS(find_min_m(1.0, 0.0), DegenerateError);
    CHECK(find_min_m(2.0, 0.5) >= 4.0);
}

TEST_CASE("weight chain ratios are finite") {
    const double m = find_min_m(1.0, 1.0);
    for (double s : {1.0, 2.0}) {
        WeightTables w = tables(s, m, 256);
        WeightChainReport rep = check_weight_chain(w, 1.0 - 2.0 * w.dt);
        CHECK(rep.all_finite);
        CHECK(rep.ratios.size() == 8);
        CHECK(rep.ratios[0].sup <= 1.0);
    }
    WeightTables w = tables(1.0, m, 256);
    CHECK_THROWS_AS(check_weight_chain(w, 1.5), DomainError);
}

TEST_CASE("weights are deterministic and export as CSV") {
    WeightTables a = tables(1.0, 20.0, 32), b = tables(1.0, 20.0, 32);
    std::ostringstream sa, sb;
    a.write_csv(sa);
    b.write_csv(sb);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("t,log_alpha_star,", 0) == 0);
    std::size_t rows = 0;
    for (char ch : sa.str()) rows += ch == '\n';
    CHECK(rows == 33);
}

TEST_CASE("normalised control weights") {
    WeightTables w = tables(1.0, 20.0, 64);
    TimeWeights tw = normalised_weights(w, WeightFamily::Rho2, 1.0 - 2.0 * w.dt);
    CHECK(tw.w[0] == 1.0);
    for (std::size_t k = 0; k <= 32; ++k) CHECK(tw.w[k] == 1.0);
    CHECK(tw.w.back() == tw.w[62]);
    CHECK(tw.w[40] > 1e50);
    TimeWeights flat = normalised_weights(w, WeightFamily::Rho2, 0.9, false);
    for (double x : flat.w) CHECK(x == 1.0);
}
