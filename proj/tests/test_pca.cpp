#include <qvpca/pca.hpp>
#include <qvpca/simulation.hpp>

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace qvpca;
using Catch::Matchers::WithinAbs;

namespace {

MultiPath toy_path(std::uint64_t seed, Eigen::Index steps = 2000, double horizon = 1.0) {
    Rng rng(seed);
    const Vector t = uniform_grid(0.0, horizon, steps + 1);
    const MultiPath b = euler_maruyama(brownian_model(), t, rng);
    Matrix v(t.size(), 2);
    v.col(0) = b.values().col(0);
    v.col(1) = b.values().col(0) + t;
    return MultiPath(t, v);
}

} // namespace

TEST_CASE("already diagonal QV leaves the coordinates alone") {
    Rng rng(1);
    const Vector t = uniform_grid(0.0, 1.0, 2001);
    const MultiPath b = euler_maruyama(brownian_model(), t, rng);
    Matrix v(t.size(), 2);
    v.col(0) = std::sqrt(2.0) * b.values().col(0);
    v.col(1) = 0.3 * t;
    const PcaSplit s = pca_split(MultiPath(t, v));
    CHECK(s.p_hat == 1);
    CHECK((s.rotation.cwiseAbs() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-3);
    CHECK(s.w_indices() == std::vector<int>{0});
    CHECK(s.d_indices() == std::vector<int>{1});
}

TEST_CASE("toy kernel direction of (B, B + t)") {
    const Matrix kernel = (Vector(2) << 1.0, -1.0).finished() / std::sqrt(2.0);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const PcaSplit s = pca_split(toy_path(seed));
        const Matrix d_hat = s.rotation.row(1).transpose();
        const double dist = subspace_distance(SubspaceBasis{d_hat, InnerProduct::euclidean(), false},
                                              SubspaceBasis{kernel, InnerProduct::euclidean(), false});
        if (dist < 0.05) ++good;
    }
    CHECK(good >= 90);
}

TEST_CASE("split invariants on the four-factor model") {
    Rng rng(3);
    const MultiPath m = euler_maruyama(model_7_1(), standard_time_grid(), rng);
    const PcaSplit s = pca_split(m);
    const double trace = s.qv.trace();
    CHECK((s.rotation * s.rotation.transpose() - Matrix::Identity(4, 4)).norm() < 1e-10);
    CHECK(s.j_paths.values() == m.values() * s.rotation.transpose());
    const Matrix jq = oracle::increment_outer_sum(s.j_paths.values());
    for (int i = 0; i < 3; ++i) CHECK(jq(i, i) >= jq(i + 1, i + 1) - 1e-8 * trace);
    // Components are QV-orthogonal and the rotation preserves the trace.
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(jq(i, j)) < 1e-8 * trace);
    CHECK_THAT(jq.trace(), WithinAbs(trace, 1e-9 * trace));
    for (int i = s.p_hat; i < 4; ++i) CHECK(jq(i, i) <= s.eps_rel * trace * (1 + 1e-12));
}

TEST_CASE("top eigenvalue maximizes the QV of unit combinations") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> normal;
    for (Eigen::Index d = 2; d <= 4; ++d) {
        const Matrix g = oracle::random_matrix(d, d, gen);
        const QvMatrix q = QvMatrix::from_matrix(g * g.transpose());
        double best = 0.0;
        for (int i = 0; i < 10000; ++i) {
            Vector u(d);
            for (Eigen::Index k = 0; k < d; ++k) u[k] = normal(gen);
            u.normalize();
            const double v = qv_quadratic_form(u, q);
            CHECK(v <= q.eig.values[0] + 1e-12 * q.trace());
            best = std::max(best, v);
        }
        CHECK(best >= 0.99 * q.eig.values[0]);
    }
}

TEST_CASE("explained QV ratios") {
    CHECK(explained_qv_ratios((Vector(2) << 3, 1).finished()).isApprox((Vector(2) << 0.75, 1.0).finished()));
    CHECK(explained_qv_ratios((Vector(3) << 1, 0, 0).finished()) == Vector::Ones(3));
    try {
        explained_qv_ratios(Vector::Zero(3));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate_spectrum);
    }
    CHECK_THROWS_AS(explained_qv_ratios((Vector(2) << 1, -1).finished()), Error);
}

TEST_CASE("OLS on the rotated factors") {
    Rng rng(5);
    const MultiPath m = euler_maruyama(model_7_1(), standard_time_grid(), rng);
    const PcaSplit s = pca_split(m);
    const Matrix& j = s.j_paths.values();

    SECTION("exact member") {
        const OlsProjection o = ols_project(2.0 * j.col(0), s);
        CHECK((o.coefficients - 2.0 * Vector::Unit(4, 0)).norm() < 1e-9);
        CHECK(o.residual.norm() < 1e-8 * j.col(0).norm());
        CHECK_FALSE(o.rank_deficient);
    }
    SECTION("mixture of the two spaces") {
        const OlsProjection o = ols_project(j.col(0) + 3.0 * j.col(3), s);
        CHECK((o.coefficients - (Vector(4) << 1, 0, 0, 3).finished()).norm() < 1e-9);
    }
    SECTION("noisy target") {
        Rng noise(99);
        Vector target = j.col(0);
        for (Eigen::Index i = 0; i < target.size(); ++i) target[i] += 0.01 * noise.normal();
        const OlsProjection o = ols_project(target, s);
        CHECK((o.coefficients - Vector::Unit(4, 0)).norm() < 0.05);
        // Normal equations: residual orthogonal to every column.
        CHECK((j.transpose() * o.residual).cwiseAbs().maxCoeff() < 1e-8 * target.norm() * j.norm());
    }
    SECTION("collinear design gives the minimum-norm solution") {
        Matrix v(m.values().rows(), 2);
        v.col(0) = m.values().col(0);
        v.col(1) = m.values().col(0);
        const PcaSplit c = pca_split(MultiPath(m.times(), v));
        const OlsProjection o = ols_project(c.j_paths.values().col(0), c);
        CHECK(o.rank_deficient);
        CHECK(o.residual.norm() < 1e-8 * o.fitted.norm());
    }
    CHECK_THROWS_AS(ols_project(Vector::Zero(3), s), Error);
}
