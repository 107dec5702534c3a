#include <qvpca/linalg.hpp>

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace qvpca;
using Catch::Matchers::WithinAbs;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

SubspaceBasis euclid(const Matrix& m) { return SubspaceBasis{m, InnerProduct::euclidean(), false}; }

} // namespace

TEST_CASE("sobolev form on a three point grid") {
    const Vector x = vec({0.0, 0.5, 1.0});
    CHECK_THAT(sobolev_inner(x, x, x), WithinAbs(1.0, 1e-15));
    CHECK(sobolev_inner(x, Vector::Constant(3, 4.2), x) == 0.0);
    CHECK(sobolev_inner(Vector::Zero(3), Vector::Zero(3), x) == 0.0);
    CHECK_THROWS_AS(sobolev_inner(x, Vector::Zero(2), x), Error);
}

TEST_CASE("sobolev form agrees with the loop oracle and is symmetric") {
    std::mt19937_64 gen(3);
    const Vector x = Vector::LinSpaced(31, 0.0, 5.0);
    const Matrix f = oracle::random_matrix(31, 2, gen);
    CHECK_THAT(sobolev_inner(f.col(0), f.col(1), x), WithinAbs(oracle::sobolev(f.col(0), f.col(1), x), 1e-12));
    CHECK(sobolev_inner(f.col(0), f.col(1), x) == sobolev_inner(f.col(1), f.col(0), x));
    const InnerProduct ip = InnerProduct::sobolev(x);
    const Matrix g = ip.gram(f);
    CHECK_THAT(g(0, 1), WithinAbs(oracle::sobolev(f.col(0), f.col(1), x), 1e-12));
}

TEST_CASE("eigh on small matrices") {
    SECTION("identity") {
        const Eigensystem e = eigh_descending(Matrix::Identity(3, 3));
        CHECK(e.values.isApprox(Vector::Ones(3)));
        CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(3, 3)).norm() < 1e-12);
    }
    SECTION("diagonal") {
        Matrix a(2, 2);
        a << 3, 0, 0, 1;
        const Eigensystem e = eigh_descending(a);
        CHECK(e.values[0] == 3.0);
        CHECK(e.values[1] == 1.0);
        CHECK(e.vectors.isApprox(Matrix::Identity(2, 2)));
    }
    SECTION("two by two with closed form") {
        Matrix a(2, 2);
        a << 2, 1, 1, 2;
        const Eigensystem e = eigh_descending(a);
        CHECK_THAT(e.values[0], WithinAbs(3.0, 1e-14));
        CHECK_THAT(e.values[1], WithinAbs(1.0, 1e-14));
        const double r = 1.0 / std::sqrt(2.0);
        CHECK_THAT(std::abs(e.vectors(0, 0)), WithinAbs(r, 1e-14));
        CHECK_THAT(e.vectors(0, 0) * e.vectors(1, 0), WithinAbs(0.5, 1e-14));
        CHECK_THAT(e.vectors(0, 1) * e.vectors(1, 1), WithinAbs(-0.5, 1e-14));
    }
    SECTION("bad input") {
        CHECK_THROWS_AS(eigh_descending(Matrix::Zero(2, 3)), Error);
        Matrix a(2, 2);
        a << 1, 2, 0, 1;
        CHECK_THROWS_AS(eigh_descending(a), Error);
    }
}

TEST_CASE("eigh matches Jacobi rotations and reconstructs the input") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + trial % 7;
        const Matrix g = oracle::random_matrix(n, n, gen);
        const Matrix a = g + g.transpose();
        const Eigensystem e = eigh_descending(a);
        const oracle::Jacobi j = oracle::jacobi(a);
        CHECK((e.values - j.values).cwiseAbs().maxCoeff() < 1e-10 * a.norm());
        for (Eigen::Index k = 0; k + 1 < n; ++k) CHECK(e.values[k] >= e.values[k + 1]);
        CHECK((a - e.vectors * e.values.asDiagonal() * e.vectors.transpose()).norm() <= 1e-8 * a.norm());
        CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).norm() < 1e-10);
        for (Eigen::Index k = 0; k < n; ++k) {
            // Sign convention: largest-magnitude entry positive.
            Eigen::Index idx;
            e.vectors.col(k).cwiseAbs().maxCoeff(&idx);
            CHECK(e.vectors(idx, k) > 0.0);
            // Same line as the oracle's eigenvector.
            CHECK_THAT(std::abs(e.vectors.col(k).dot(j.vectors.col(k))), WithinAbs(1.0, 1e-8));
        }
    }
}

TEST_CASE("hermitian eigh reconstructs and orders") {
    std::mt19937_64 gen(5);
    const Matrix re = oracle::random_matrix(5, 5, gen);
    const Matrix im = oracle::random_matrix(5, 5, gen);
    ComplexMatrix a(5, 5);
    a.real() = re + re.transpose();
    a.imag() = im - im.transpose();
    const HermitianEigensystem e = eigh_hermitian_descending(a);
    const ComplexMatrix rebuilt = e.vectors * e.values.cast<std::complex<double>>().asDiagonal() * e.vectors.adjoint();
    CHECK((a - rebuilt).norm() < 1e-10 * a.norm());
    for (Eigen::Index k = 0; k + 1 < 5; ++k) CHECK(e.values[k] >= e.values[k + 1]);
    // The real embedding [[Re, -Im], [Im, Re]] has each eigenvalue twice.
    Matrix embed(10, 10);
    embed << a.real(), -a.imag(), a.imag(), a.real();
    const oracle::Jacobi j = oracle::jacobi(embed);
    for (Eigen::Index k = 0; k < 5; ++k) CHECK_THAT(e.values[k], WithinAbs(j.values[2 * k], 1e-9));
}

TEST_CASE("gram-schmidt fixed cases") {
    SECTION("orthonormal input is unchanged") {
        std::mt19937_64 gen(2);
        const Matrix q = oracle::random_orthogonal(4, gen).leftCols(3);
        CHECK((gram_schmidt(q, InnerProduct::euclidean()).vectors - q).norm() < 1e-14);
    }
    SECTION("projection step in the plane") {
        Matrix v(2, 2);
        v << 1, 1, 0, 1;
        const SubspaceBasis b = gram_schmidt(v, InnerProduct::euclidean());
        CHECK(b.orthonormal);
        CHECK(b.vectors.isApprox(Matrix::Identity(2, 2)));
    }
    SECTION("identity function is already unit under the sobolev form") {
        const Vector x = vec({0.0, 0.5, 1.0});
        const SubspaceBasis b = gram_schmidt(x, InnerProduct::sobolev(x));
        CHECK((b.vectors.col(0) - x).norm() < 1e-15);
    }
    SECTION("dependent input") {
        Matrix v(3, 2);
        v << 1, 2, 1, 2, 0, 0;
        CHECK_THROWS_AS(gram_schmidt(v, InnerProduct::euclidean()), Error);
        const Vector x = vec({0.0, 0.5, 1.0});
        Matrix c(3, 1);
        c << 2, 2, 2; // constants vanish under the sobolev form
        try {
            gram_schmidt(c, InnerProduct::sobolev(x));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::degenerate_basis);
        }
    }
}

TEST_CASE("gram-schmidt agrees with textbook MGS and commutes with orthogonal maps") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 8, d = 1 + trial % 6;
        const Matrix v = oracle::random_matrix(n, d, gen);
        const Matrix t = oracle::random_orthogonal(n, gen);
        const Matrix gs = gram_schmidt(v, InnerProduct::euclidean()).vectors;
        CHECK((gs - oracle::modified_gram_schmidt(v)).cwiseAbs().maxCoeff() < 1e-9);
        const Matrix rotated = gram_schmidt(t * v, InnerProduct::euclidean()).vectors;
        CHECK((rotated - t * gs).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("gram-schmidt under the sobolev form gives a sobolev-orthonormal basis") {
    std::mt19937_64 gen(23);
    const Vector x = Vector::LinSpaced(31, 0.0, 5.0);
    const InnerProduct ip = InnerProduct::sobolev(x);
    const Matrix v = oracle::random_matrix(31, 4, gen);
    const SubspaceBasis b = gram_schmidt(v, ip);
    Matrix gram(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) gram(i, j) = oracle::sobolev(b.vectors.col(i), b.vectors.col(j), x);
    CHECK((gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("subspace distance fixed cases") {
    const Matrix e1 = Vector::Unit(2, 0);
    const Matrix e2 = Vector::Unit(2, 1);
    const Matrix diag = (Vector::Unit(2, 0) + Vector::Unit(2, 1)) / std::sqrt(2.0);
    CHECK(subspace_distance(euclid(e1), euclid(e1)) == 0.0);
    CHECK_THAT(subspace_distance(euclid(e1), euclid(e2)), WithinAbs(1.0, 1e-15));
    CHECK_THAT(subspace_distance(euclid(e1), euclid(diag)), WithinAbs(std::sqrt(0.5), 1e-15));
    CHECK(subspace_distance(euclid(Matrix(2, 0)), euclid(Matrix(2, 0))) == 0.0);
    CHECK(subspace_distance(euclid(Matrix(2, 0)), euclid(e1)) == 1.0);
    const SubspaceBasis s{e1, InnerProduct::sobolev(Vector::LinSpaced(2, 0.0, 1.0)), false};
    CHECK_THROWS_AS(subspace_distance(euclid(e1), s), Error);
}

TEST_CASE("subspace distance matches the projection formula and satisfies the metric axioms") {
    std::mt19937_64 gen(31);
    std::vector<Matrix> family;
    for (int i = 0; i < 12; ++i) family.push_back(oracle::random_matrix(8, 1 + i % 4, gen));
    // Spans that coincide with earlier members under recombination.
    family.push_back(family[2] * oracle::random_matrix(family[2].cols(), family[2].cols(), gen));
    family.push_back(family[7] * oracle::random_matrix(family[7].cols(), family[7].cols(), gen));

    for (std::size_t i = 0; i < family.size(); ++i) {
        const Matrix qi = oracle::modified_gram_schmidt(family[i]);
        for (std::size_t j = 0; j < family.size(); ++j) {
            const double dij = subspace_distance(euclid(family[i]), euclid(family[j]));
            const double dji = subspace_distance(euclid(family[j]), euclid(family[i]));
            CHECK(dij >= 0.0);
            CHECK(dij <= 1.0);
            CHECK_THAT(dij, WithinAbs(dji, 1e-12));
            const Matrix qj = oracle::modified_gram_schmidt(family[j]);
            CHECK_THAT(dij, WithinAbs(oracle::projection_distance(qi, qj), 1e-7));
            for (std::size_t k = 0; k < family.size(); ++k) {
                const double dik = subspace_distance(euclid(family[i]), euclid(family[k]));
                const double dkj = subspace_distance(euclid(family[k]), euclid(family[j]));
                CHECK(dij <= dik + dkj + 1e-8);
            }
        }
    }
    CHECK(subspace_distance(euclid(family[2]), euclid(family[12])) < 1e-8);
    CHECK(subspace_distance(euclid(family[7]), euclid(family[13])) < 1e-8);
    CHECK(subspace_distance(euclid(family[0]), euclid(family[4])) > 1e-8);
}

TEST_CASE("subspace distance ignores the choice of basis") {
    std::mt19937_64 gen(37);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 1 + trial % 5;
        const Matrix v = oracle::random_matrix(8, d, gen);
        const Matrix r = oracle::random_matrix(d, d, gen);
        CHECK(subspace_distance(euclid(v), euclid(v * r)) < 1e-8);
    }
}
