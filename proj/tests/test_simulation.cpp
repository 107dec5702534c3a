#include <qvpca/simulation.hpp>

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace qvpca;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SdeModel scalar_model(double mu, double sigma) {
    SdeModel m;
    m.name = "scalar";
    m.dim_state = 1;
    m.dim_noise = 1;
    m.drift = [mu](const Vector&) { return Vector::Constant(1, mu); };
    m.diffusion = [sigma](const Vector&) { return Matrix::Constant(1, 1, sigma); };
    m.x0 = Vector::Zero(1);
    return m;
}

Vector vec4(double a, double b, double c, double d) { return (Vector(4) << a, b, c, d).finished(); }

} // namespace

TEST_CASE("generator output is reproducible and roughly standard normal") {
    Rng a(42), b(42);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = a.normal();
        CHECK(x == b.normal());
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / 1e5) < 0.02);
    CHECK_THAT(sq / 1e5, WithinAbs(1.0, 0.02));
    Rng u(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("Euler scheme on degenerate models") {
    const Vector t = uniform_grid(0.0, 1.0, 101);
    Rng rng(0);
    SdeModel frozen = scalar_model(0.0, 0.0);
    frozen.x0 = Vector::Constant(1, 3.0);
    CHECK((euler_maruyama(frozen, t, rng).values().array() == 3.0).all());
    const MultiPath line = euler_maruyama(scalar_model(1.0, 0.0), t, rng);
    CHECK((line.values().col(0) - t).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Euler scheme rejects bad grids and reports blow-up") {
    Rng rng(0);
    Vector uneven(3);
    uneven << 0.0, 0.1, 0.3;
    CHECK_THROWS_AS(euler_maruyama(brownian_model(), uneven, rng), Error);
    SdeModel explode = scalar_model(0.0, 0.0);
    explode.x0 = Vector::Constant(1, 1.0);
    explode.drift = [](const Vector& x) { return (x.array() * x.array() * 1e200).matrix().eval(); };
    try {
        euler_maruyama(explode, uniform_grid(0.0, 1.0, 50), rng);
        FAIL("expected blow-up");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::blow_up);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("Brownian terminal variance over 1000 seeds") {
    const Vector t = uniform_grid(0.0, 1.0, 201);
    std::vector<double> ends;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        ends.push_back(euler_maruyama(brownian_model(), t, rng).values()(200, 0));
    }
    double mean = 0.0;
    for (double x : ends) mean += x;
    mean /= 1000.0;
    double var = 0.0;
    for (double x : ends) var += (x - mean) * (x - mean);
    var /= 999.0;
    CHECK_THAT(var, WithinRel(1.0, 0.10));
}

TEST_CASE("four-factor vector fields") {
    const SdeModel m = model_7_1();
    CHECK(m.drift(vec4(1, 2, 3, 4)) == vec4(2, 1, 4, -1));
    const Vector x = vec4(0.3, -1.7, 2.0, 5.0);
    CHECK(m.diffusion(x) * Vector::Unit(3, 2) == vec4(-1.7, 0, -1.7, -1.7));
    CHECK(m.diffusion(x).leftCols(2) == Matrix::Identity(4, 2));

    const SdeModel f = model_7_1_fdr();
    CHECK(f.drift(vec4(1, 2, 3, 4)) == vec4(2, 1, 4, -1));
    const Matrix s = f.diffusion(vec4(0, 0, 7, 8));
    CHECK(s.row(1).isZero(0.0));
    CHECK(s.row(2).isZero(0.0));
    CHECK(s(0, 0) == 1.0);
}

TEST_CASE("HJM realization") {
    const HjmRealization h = model_hjm_fdr();
    CHECK(h.factors.drift(vec4(1, 0, 0, 0)) == vec4(0, -2, -1, -1));
    for (double x : {0.0, 0.7, 2.5, 5.0}) CHECK_THAT(h.phi(0.0, x), WithinAbs(0.0, 1e-14));

    // phi is smooth in t, so its realized QV decays like 1/n-bar.
    const auto phi_qv = [&](Eigen::Index points) {
        const Vector grid = standard_time_grid(points);
        Vector phi1(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i) phi1[i] = h.phi(grid[i], 1.0);
        return oracle::increment_outer_sum(phi1)(0, 0);
    };
    const double coarse = phi_qv(2000), fine = phi_qv(20000);
    CHECK_THAT(coarse / fine, WithinRel(19999.0 / 1999.0, 0.01));

    const Vector t = standard_time_grid();

    // Z4 has no Brownian part: each Euler increment is exactly -Z1 dt.
    Rng rng(6);
    const MultiPath z = euler_maruyama(h.factors, t, rng);
    const double dt = t[1] - t[0];
    for (Eigen::Index k = 0; k + 1 < t.size(); k += 97)
        CHECK_THAT(z.values()(k + 1, 3) - z.values()(k, 3), WithinAbs(-z.values()(k, 0) * dt, 1e-9 * (1 + std::abs(z.values()(k, 0)))));
}

TEST_CASE("loadings are independent under the sobolev form") {
    const Vector x = standard_space_grid();
    const Matrix gram = InnerProduct::sobolev(x).gram(standard_loadings().sample(x));
    const oracle::Jacobi j = oracle::jacobi(gram);
    CHECK(j.values[3] > 1e-10 * j.values[0]);
    CHECK_THAT(standard_loadings().functions[3](1.0), WithinAbs(std::sin(1.0) - 3 * std::cos(1.0), 1e-15));
}

TEST_CASE("panel superposition") {
    const Vector t = uniform_grid(0.0, 1.0, 5);
    const Vector x = standard_space_grid();
    Rng rng(1);
    SECTION("zero factors give phi") {
        const HjmRealization h = model_hjm_fdr();
        const SpaceTimePanel p = build_panel(MultiPath(t, Matrix::Zero(5, 4)), h.loadings, h.phi,
                                             NoiseSpec::none(), x, rng);
        for (Eigen::Index i = 0; i < 5; ++i)
            for (Eigen::Index j = 0; j < x.size(); ++j) CHECK(p.values()(i, j) == h.phi(t[i], x[j]));
        REQUIRE(p.phi());
        CHECK(*p.phi() == p.values());
    }
    SECTION("constant single factor") {
        const SpaceTimePanel p = build_panel(MultiPath(t, Matrix::Ones(5, 1)), standard_loadings().first(1),
                                             zero_parametrization(), NoiseSpec::none(), x, rng);
        CHECK((p.values().row(2).transpose() - (x.array() * x.array().cos()).matrix()).cwiseAbs().maxCoeff() <
              1e-15);
    }
    SECTION("no noise and zero phi is exactly Z Lambda'") {
        std::mt19937_64 gen(3);
        const Matrix z = oracle::random_matrix(5, 4, gen);
        const SpaceTimePanel p =
            build_panel(MultiPath(t, z), standard_loadings(), zero_parametrization(), NoiseSpec::none(), x, rng);
        CHECK(p.values() == z * standard_loadings().sample(x).transpose());
    }
    SECTION("shape mismatch") {
        CHECK_THROWS_AS(build_panel(MultiPath(t, Matrix::Ones(5, 2)), standard_loadings(), std::nullopt,
                                    NoiseSpec::none(), x, rng),
                        Error);
    }
    CHECK_THAT(NoiseSpec::sine_mode().value(1.0, 0.5), WithinAbs(0.47140452079103, 1e-12));
    CHECK(NoiseSpec::none().value(1.0, 0.5) == 0.0);
}

TEST_CASE("variance versus QV models") {
    Rng rng(2);
    const auto m = models_7_2(rng);
    CHECK(m.x_panel.values().row(0).isZero(0.0));
    const double t = m.x_factors.times()[100];
    const double b = m.brownian.values()(100, 0);
    CHECK(m.x_factors.values()(100, 0) == b);
    CHECK(m.x_factors.values()(100, 1) == std::sin(15.0 * t) - b);
    CHECK(m.u_factors.values()(100, 1) == std::sin(3.0 * t) - b);
    const auto second_share = [](const MultiPath& f) {
        const oracle::Jacobi j = oracle::jacobi(oracle::increment_outer_sum(f.values()));
        return j.values[1] / (j.values[0] + j.values[1]);
    };
    CHECK(second_share(m.u_factors) < 0.02);
    // sin(15t) has zero QV in the limit; at a finite grid its realized QV is
    // 225 dt int cos^2, so the share falls tenfold with a ten times finer grid.
    Rng fine_rng(2);
    const auto fine = models_7_2(fine_rng, standard_time_grid(20000));
    CHECK(second_share(fine.x_factors) < 0.2 * second_share(m.x_factors));
}

TEST_CASE("simulated panels are reproducible") {
    Rng a(77), b(77);
    const auto pa = simulate_hjm_panel(a, NoiseSpec::sine_mode());
    const auto pb = simulate_hjm_panel(b, NoiseSpec::sine_mode());
    CHECK(pa.panel.values() == pb.panel.values());
    Rng c(78);
    CHECK(simulate_hjm_panel(c, NoiseSpec::sine_mode()).panel.values() != pa.panel.values());
}

TEST_CASE("panel grids and truncation") {
    Rng rng(3);
    const auto sim = simulate_fdr_panel(rng);
    const SpaceTimePanel& p = sim.panel;
    CHECK(p.time_points() == 2000);
    CHECK(p.space_points() == 31);
    CHECK_THAT(p.time_mesh(), WithinRel(2.0 * std::numbers::pi / 1999.0, 1e-12));
    CHECK_THAT(p.space_mesh(), WithinRel(5.0 / 30.0, 1e-12));
    const SpaceTimePanel q = p.truncated(5);
    CHECK(q.time_points() == 1995);
    CHECK(q.values() == p.values().topRows(1995));
    CHECK_THROWS_AS(p.truncated(1999), Error);
    CHECK_THROWS_AS(SpaceTimePanel(Vector::LinSpaced(3, 0, 1), Vector::LinSpaced(2, 0, 1), Matrix::Zero(2, 2)), Error);
}
