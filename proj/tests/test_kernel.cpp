#include <catch2/catch_amalgamated.hpp>

#include "switchlag/grid.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace switchlag;
using builders::op;
using builders::sw;
using Catch::Approx;

TEST_CASE("zero generator gives the identity kernel") {
    auto tables = ModeTables::build(1);
    auto model = IntensityModel::per_plant({{RateFn::constant(0.0)}, {0.0}}, tables);
    auto k = chain_kernel_matrix(model, tables, sw({1}), 0.0, 0.0, {0.0}, 0.5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) REQUIRE(k[size_t(i) * 3 + j] == Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("scalar exponential: stay probability at rate 2 over 0.5") {
    auto tables = ModeTables::build(1);
    TabularIntensity tab;
    tab.rates[{tables.switch_code(sw({1})), tables.op_code(op({0})), tables.op_code(op({1}))}] = 2.0;
    auto model = IntensityModel::tabular(std::move(tab), tables);
    auto k = chain_kernel_matrix(model, tables, sw({1}), 0.0, 0.0, {0.0}, 0.5);
    // op_space((1)) = [(-1),(0),(1)]; row of a=0 is index 1
    REQUIRE(k[1 * 3 + 1] == Approx(std::exp(-1.0)).epsilon(1e-12));
    REQUIRE(k[1 * 3 + 2] == Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("two-exponential closed form for the startup-failure chain") {
    auto tables = ModeTables::build(1);
    auto model = IntensityModel::per_plant({{RateFn::constant(2.0)}, {1.0}}, tables);
    const double dt = 0.5;
    HybridState s = HybridState::initial(tables);
    s.b = sw({1});
    auto row = one_step_chain_kernel(model, tables, s, 0.0, dt);
    REQUIRE(row.size() == 3);
    const double p_on = oracles::on_probability(2.0, 1.0, dt);
    REQUIRE(p_on == Approx(2 * (std::exp(-0.5) - std::exp(-1.0))).epsilon(1e-12));
    REQUIRE(row[2] == Approx(p_on).epsilon(1e-10));
    REQUIRE(row[1] == Approx(std::exp(-2.0 * dt)).epsilon(1e-10));
    REQUIRE(row[0] + row[1] + row[2] == Approx(1.0).margin(1e-12));
}

TEST_CASE("uniformization agrees with scaling-and-squaring on random generators") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 2 + int(uniform01(rng) * 5);
        std::vector<double> q(size_t(k) * k, 0.0);
        for (int i = 0; i < k; ++i) {
            double diag = 0.0;
            for (int j = 0; j < k; ++j) {
                if (i == j) continue;
                double r = uniform01(rng) < 0.4 ? 0.0 : 3.0 * uniform01(rng);
                q[size_t(i) * k + j] = r;
                diag += r;
            }
            q[size_t(i) * k + i] = -diag;
        }
        const double dt = 0.05 + uniform01(rng);
        auto ours = generator_exponential(q, k, dt);
        auto qdt = q;
        for (auto& v : qdt) v *= dt;
        auto ref = oracles::matrix_exponential_reference(qdt, k);
        for (size_t idx = 0; idx < ours.size(); ++idx)
            REQUIRE(ours[idx] == Approx(ref[idx]).margin(1e-11));
        for (int i = 0; i < k; ++i) {
            double sum = 0.0;
            for (int j = 0; j < k; ++j) {
                REQUIRE(ours[size_t(i) * k + j] >= -1e-15);
                sum += ours[size_t(i) * k + j];
            }
            REQUIRE(sum == Approx(1.0).margin(1e-12));
        }
    }
}

TEST_CASE("trinomial factor kernel is locally consistent") {
    auto fg = FactorGrid::make(-1.0, 1.0, 21, {0.0, -0.8}, {0.3}, 0.0);  // dX = -0.8 X dt + 0.3 dB
    const double dt = 0.01;
    bool clipped = true;
    auto rows = fg.kernel(dt, &clipped);
    REQUIRE(!clipped);
    const int nx = int(fg.nodes.size());
    for (int i = 0; i < nx; ++i) {
        double sum = 0.0, mean = 0.0, m2 = 0.0;
        for (int j = 0; j < 3; ++j) {
            REQUIRE(rows[i].p[j] >= 0.0);
            sum += rows[i].p[j];
            double dx = fg.nodes[rows[i].idx[j]] - fg.nodes[i];
            mean += rows[i].p[j] * dx;
            m2 += rows[i].p[j] * dx * dx;
        }
        REQUIRE(sum == Approx(1.0).margin(1e-14));
        const double mu = fg.drift(fg.nodes[i]) * dt;
        const double var = fg.vol(fg.nodes[i]) * fg.vol(fg.nodes[i]) * dt;
        REQUIRE(mean == Approx(mu).margin(1e-12));
        REQUIRE(m2 - mean * mean == Approx(var).margin(1e-12));
    }
}

TEST_CASE("inert factor kernel is the identity") {
    auto fg = FactorGrid::make(-1.0, 1.0, 5, {0.0}, {0.0}, 0.0);
    auto rows = fg.kernel(0.1);
    for (size_t i = 0; i < rows.size(); ++i) {
        double self = 0.0;
        for (int j = 0; j < 3; ++j)
            if (rows[i].idx[j] == int(i)) self += rows[i].p[j];
        REQUIRE(self == Approx(1.0).margin(1e-15));
    }
}

TEST_CASE("growth bound covers drift and volatility over the nodes") {
    auto fg = FactorGrid::make(-2.0, 2.0, 9, {0.1, -0.5}, {0.2, 0.1}, 0.0);
    double c = fg.growth_bound();
    for (double x : fg.nodes)
        REQUIRE(std::abs(fg.drift(x)) + std::abs(fg.vol(x)) <= c * (1.0 + std::abs(x)) + 1e-12);
}
