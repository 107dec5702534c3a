#pragma once

// Inner products, descending symmetric eigendecomposition, Gram-Schmidt and
// the subspace distance shared by every estimator in the library.

#include <qvpca/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace qvpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace linalg_detail {
inline constexpr const char* module = "linalg_core";
}

// ---------------------------------------------------------------------------
// Inner products
// ---------------------------------------------------------------------------

/// Discrete first-derivative (Sobolev) form on a spatial grid:
///   <f,g>_a = sum_j (f(x_j) - f(x_{j-1})) (g(x_j) - g(x_{j-1})) / (x_j - x_{j-1}).
/// Only differences enter, so constants lie in its kernel; on functions pinned
/// to f(a) = 0 it is a genuine inner product.
inline double sobolev_inner(const Vector& f, const Vector& g, const Vector& x_grid) {
    using linalg_detail::module;
    detail::require(x_grid.size() >= 2, ErrorKind::invalid_input, module,
                    "sobolev grid needs at least 2 points");
    detail::require(f.size() == x_grid.size() && g.size() == x_grid.size(), ErrorKind::invalid_input,
                    module,
                    "grid function length " + std::to_string(f.size()) + "/" + std::to_string(g.size()) +
                        " does not match grid length " + std::to_string(x_grid.size()));
    double sum = 0.0;
    for (Eigen::Index j = 1; j < x_grid.size(); ++j)
        sum += (f[j] - f[j - 1]) * (g[j] - g[j - 1]) / (x_grid[j] - x_grid[j - 1]);
    return sum;
}

class InnerProduct {
public:
    enum class Kind { euclidean, sobolev_grid };

    static InnerProduct euclidean() { return InnerProduct(); }

    static InnerProduct sobolev(Vector x_grid) {
        using linalg_detail::module;
        detail::require(x_grid.size() >= 2, ErrorKind::invalid_input, module,
                        "sobolev grid needs at least 2 points");
        for (Eigen::Index j = 1; j < x_grid.size(); ++j)
            detail::require(x_grid[j] > x_grid[j - 1], ErrorKind::invalid_input, module,
                            "sobolev grid must be strictly increasing (index " + std::to_string(j) + ")");
        InnerProduct ip;
        ip.kind_ = Kind::sobolev_grid;
        ip.grid_ = std::move(x_grid);
        return ip;
    }

    Kind kind() const noexcept { return kind_; }
    const Vector& x_grid() const noexcept { return grid_; }

    double operator()(const Vector& f, const Vector& g) const {
        if (kind_ == Kind::euclidean) {
            detail::require(f.size() == g.size(), ErrorKind::invalid_input, linalg_detail::module,
                            "vector dimensions differ");
            return f.dot(g);
        }
        return sobolev_inner(f, g, grid_);
    }

    /// Coordinates in which this form becomes the Euclidean dot product. For
    /// the Sobolev form a grid function of length N maps to N-1 scaled
    /// differences; `columns` holds one element per column.
    Matrix coordinates(const Matrix& columns) const {
        if (kind_ == Kind::euclidean) return columns;
        detail::require(columns.rows() == grid_.size(), ErrorKind::invalid_input, linalg_detail::module,
                        "grid function length does not match grid");
        const Eigen::Index n = grid_.size();
        Matrix out(n - 1, columns.cols());
        for (Eigen::Index j = 1; j < n; ++j) {
            const double scale = 1.0 / std::sqrt(grid_[j] - grid_[j - 1]);
            out.row(j - 1) = (columns.row(j) - columns.row(j - 1)) * scale;
        }
        return out;
    }

    Matrix gram(const Matrix& columns) const {
        const Matrix c = coordinates(columns);
        return c.transpose() * c;
    }

    bool compatible(const InnerProduct& other) const {
        if (kind_ != other.kind_) return false;
        if (kind_ == Kind::euclidean) return true;
        return grid_.size() == other.grid_.size() && grid_ == other.grid_;
    }

private:
    Kind kind_ = Kind::euclidean;
    Vector grid_;
};

// ---------------------------------------------------------------------------
// Eigendecomposition
// ---------------------------------------------------------------------------

struct Eigensystem {
    Vector values;  // descending
    Matrix vectors; // column i pairs with values[i]
};

namespace linalg_detail {

// Largest-magnitude entry positive; the first such entry wins on exact ties.
template <class Derived>
void fix_sign(Eigen::MatrixBase<Derived>&& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v.size() > 0 && v[best] < 0) v = -v;
}

template <class Derived>
void fix_phase(Eigen::MatrixBase<Derived>&& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v.size() == 0 || std::abs(v[best]) == 0.0) return;
    const auto phase = v[best] / std::abs(v[best]);
    v = v * std::conj(phase);
}

} // namespace linalg_detail

/// Symmetric eigendecomposition with eigenvalues in descending order and each
/// eigenvector signed so that its largest-magnitude entry is positive.
inline Eigensystem eigh_descending(const Matrix& a) {
    using linalg_detail::module;
    detail::require(a.rows() == a.cols(), ErrorKind::invalid_input, module,
                    "eigh needs a square matrix, got " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
    detail::require(a.allFinite(), ErrorKind::invalid_input, module, "matrix has non-finite entries");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    detail::require(asym <= 1e-10 * scale, ErrorKind::invalid_input, module,
                    "matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    const Eigen::Index n = a.rows();
    Eigensystem out;
    if (n == 0) return out;
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    detail::require(solver.info() == Eigen::Success, ErrorKind::invalid_input, module,
                    "eigensolver did not converge");
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) linalg_detail::fix_sign(out.vectors.col(j));
    return out;
}

struct HermitianEigensystem {
    Vector values; // descending, real
    ComplexMatrix vectors;
};

/// Hermitian counterpart; each eigenvector is rotated so that its
/// largest-magnitude entry is real and positive.
inline HermitianEigensystem eigh_hermitian_descending(const ComplexMatrix& a) {
    using linalg_detail::module;
    detail::require(a.rows() == a.cols(), ErrorKind::invalid_input, module, "eigh needs a square matrix");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
    detail::require(asym <= 1e-10 * scale, ErrorKind::invalid_input, module,
                    "matrix is not Hermitian (max asymmetry " + std::to_string(asym) + ")");
    HermitianEigensystem out;
    if (a.rows() == 0) return out;
    const ComplexMatrix herm = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
    detail::require(solver.info() == Eigen::Success, ErrorKind::invalid_input, module,
                    "eigensolver did not converge");
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < a.rows(); ++j) linalg_detail::fix_phase(out.vectors.col(j));
    return out;
}

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

/// A finite family of elements (columns) of a real inner-product space.
struct SubspaceBasis {
    Matrix vectors;
    InnerProduct inner_product;
    bool orthonormal = false;

    Eigen::Index size() const noexcept { return vectors.cols(); }
};

/// Classical Gram-Schmidt: element k is orthogonalized against outputs 1..k-1,
/// with a second projection pass to hold orthonormality at roundoff level.
/// Throws degenerate_basis when the normalized Gram determinant falls below 1e-12.
inline SubspaceBasis gram_schmidt(const Matrix& vectors, const InnerProduct& ip) {
    using linalg_detail::module;
    const Eigen::Index m = vectors.cols();
    // Work in coordinates where the form is the dot product, then map back.
    const Matrix coords = ip.coordinates(vectors);
    Matrix q(coords.rows(), m);
    Matrix out(vectors.rows(), m);
    double normalized_det = 1.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        Vector w = coords.col(k);
        Vector w_full = vectors.col(k);
        const double original_sq = w.squaredNorm();
        detail::require(original_sq > 0.0, ErrorKind::degenerate_basis, module,
                        "element " + std::to_string(k) + " has zero norm");
        for (int pass = 0; pass < 2; ++pass) {
            if (k == 0) break;
            const Vector proj = q.leftCols(k).transpose() * w;
            w -= q.leftCols(k) * proj;
            w_full -= out.leftCols(k) * proj;
        }
        const double residual_sq = w.squaredNorm();
        normalized_det *= residual_sq / original_sq;
        detail::require(normalized_det >= 1e-12, ErrorKind::degenerate_basis, module,
                        "elements are linearly dependent (normalized Gram determinant " +
                            std::to_string(normalized_det) + " at element " + std::to_string(k) + ")");
        const double norm = std::sqrt(residual_sq);
        q.col(k) = w / norm;
        out.col(k) = w_full / norm;
    }
    return SubspaceBasis{std::move(out), ip, true};
}

inline SubspaceBasis orthonormalized(const SubspaceBasis& basis) {
    if (basis.orthonormal) return basis;
    return gram_schmidt(basis.vectors, basis.inner_product);
}

/// D(A,B) = sqrt(1 - (1/max(m1,m2)) * sum_jk <a_k, b_j>^2) over orthonormal bases.
/// In [0,1]; zero exactly when the spans coincide.
inline double subspace_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
    using linalg_detail::module;
    detail::require(a.inner_product.compatible(b.inner_product), ErrorKind::invalid_input, module,
                    "subspaces use different inner products");
    detail::require(a.size() == 0 || b.size() == 0 || a.vectors.rows() == b.vectors.rows(),
                    ErrorKind::invalid_input, module, "subspace elements have different dimensions");
    const Eigen::Index ma = a.size();
    const Eigen::Index mb = b.size();
    if (ma == 0 && mb == 0) return 0.0;
    if (ma == 0 || mb == 0) return 1.0;
    const SubspaceBasis oa = orthonormalized(a);
    const SubspaceBasis ob = orthonormalized(b);
    // 1 - s/m = (m_max - m_min + sum of squared residuals of the smaller basis
    // projected onto the larger) / m_max.
    const bool a_small = ma <= mb;
    const Matrix small = (a_small ? oa : ob).inner_product.coordinates((a_small ? oa : ob).vectors);
    const Matrix large = (a_small ? ob : oa).inner_product.coordinates((a_small ? ob : oa).vectors);
    const Matrix residual = small - large * (large.transpose() * small);
    const double m_max = static_cast<double>(std::max(ma, mb));
    const double m_min = static_cast<double>(std::min(ma, mb));
    const double value = (m_max - m_min + residual.squaredNorm()) / m_max;
    return std::sqrt(std::clamp(value, 0.0, 1.0));
}

} // namespace qvpca
