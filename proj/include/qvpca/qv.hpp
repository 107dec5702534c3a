#pragma once

#include <qvpca/linalg.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qvpca {

namespace qv_detail {
inline constexpr const char* module = "qv_estimation";
}

/// A d-dimensional process sampled synchronously on t_0 < t_1 < ... < t_n.
/// Row i of `values()` is the observation at `times()[i]`.
class MultiPath {
public:
    MultiPath() = default;

    MultiPath(Vector times, Matrix values, std::vector<std::string> names = {})
        : times_(std::move(times)), values_(std::move(values)), names_(std::move(names)) {
        using qv_detail::module;
        detail::require(times_.size() == values_.rows(), ErrorKind::shape, module,
                        "time grid has " + std::to_string(times_.size()) + " points but values have " +
                            std::to_string(values_.rows()) + " rows");
        detail::require(times_.size() >= 1, ErrorKind::insufficient_data, module, "path has no observations");
        for (Eigen::Index i = 1; i < times_.size(); ++i)
            detail::require(times_[i] > times_[i - 1], ErrorKind::invalid_input, module,
                            "time grid not strictly increasing at index " + std::to_string(i));
        for (Eigen::Index i = 0; i < values_.rows(); ++i)
            for (Eigen::Index j = 0; j < values_.cols(); ++j)
                detail::require(std::isfinite(values_(i, j)), ErrorKind::invalid_input, module,
                                "non-finite value at row " + std::to_string(i) + ", column " +
                                    std::to_string(j));
        if (names_.empty())
            for (Eigen::Index j = 0; j < values_.cols(); ++j) names_.push_back("m" + std::to_string(j + 1));
        detail::require(static_cast<Eigen::Index>(names_.size()) == values_.cols(), ErrorKind::shape, module,
                        "component name count does not match dimension");
    }

    const Vector& times() const noexcept { return times_; }
    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    Eigen::Index dim() const noexcept { return values_.cols(); }
    /// Number of increments n-bar.
    Eigen::Index steps() const noexcept { return values_.rows() - 1; }
    double horizon() const { return times_[times_.size() - 1] - times_[0]; }
    /// Largest mesh size rho(n).
    double mesh() const {
        double out = 0.0;
        for (Eigen::Index i = 1; i < times_.size(); ++i) out = std::max(out, times_[i] - times_[i - 1]);
        return out;
    }

    Matrix increments() const {
        return values_.bottomRows(values_.rows() - 1) - values_.topRows(values_.rows() - 1);
    }

private:
    Vector times_;
    Matrix values_;
    std::vector<std::string> names_;
};

/// Equidistant grid of `points` values on [start, end].
inline Vector uniform_grid(double start, double end, Eigen::Index points) {
    detail::require(points >= 2, ErrorKind::invalid_input, qv_detail::module, "grid needs at least 2 points");
    detail::require(end > start, ErrorKind::invalid_input, qv_detail::module, "grid end must exceed start");
    Vector out(points);
    const double step = (end - start) / static_cast<double>(points - 1);
    for (Eigen::Index i = 0; i < points; ++i) out[i] = start + step * static_cast<double>(i);
    out[points - 1] = end;
    return out;
}

/// Realized quadratic-covariation matrix [M]_T with its descending eigensystem.
struct QvMatrix {
    Matrix matrix;
    Eigensystem eig;
    double horizon = 0.0;

    /// Wraps a symmetric PSD matrix. Eigenvalues above -1e-10*trace are clamped
    /// to zero; anything more negative is rejected.
    static QvMatrix from_matrix(Matrix m, double horizon = 0.0) {
        using qv_detail::module;
        QvMatrix out;
        out.eig = eigh_descending(m);
        const double tol = 1e-10 * std::max(std::abs(m.trace()), m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
        for (Eigen::Index i = 0; i < out.eig.values.size(); ++i) {
            double& v = out.eig.values[i];
            detail::require(v >= -tol, ErrorKind::invalid_input, module,
                            "matrix is not positive semidefinite (eigenvalue " + std::to_string(v) + ")");
            if (v < 0.0) v = 0.0;
        }
        out.matrix = std::move(m);
        out.horizon = horizon;
        return out;
    }

    Eigen::Index dim() const noexcept { return matrix.rows(); }
    double trace() const { return matrix.trace(); }
};

/// Gram matrix of increment columns: entry (i,j) = sum_k dM^i_k dM^j_k.
inline Matrix increment_gram(const Matrix& values) {
    detail::require(values.rows() >= 2, ErrorKind::insufficient_data, qv_detail::module,
                    "need at least one increment (2 observations)");
    const Matrix inc = values.bottomRows(values.rows() - 1) - values.topRows(values.rows() - 1);
    Matrix g = inc.transpose() * inc;
    return 0.5 * (g + g.transpose());
}

inline QvMatrix realized_qv(const MultiPath& path) {
    detail::require(path.steps() >= 1, ErrorKind::insufficient_data, qv_detail::module,
                    "realized QV needs at least one increment");
    return QvMatrix::from_matrix(increment_gram(path.values()), path.horizon());
}

/// Left-point Riemann sum of a spot covariance c(t) = sigma(t) sigma(t)' over
/// the grid: the QV of dM = sigma(t) dB computed without noise.
inline QvMatrix integrated_spot_qv(const std::function<Matrix(double)>& spot, const Vector& t_grid) {
    detail::require(t_grid.size() >= 2, ErrorKind::insufficient_data, qv_detail::module,
                    "time grid needs at least 2 points");
    Matrix sum = spot(t_grid[0]) * 0.0;
    for (Eigen::Index k = 0; k + 1 < t_grid.size(); ++k) sum += spot(t_grid[k]) * (t_grid[k + 1] - t_grid[k]);
    return QvMatrix::from_matrix(0.5 * (sum + sum.transpose()), t_grid[t_grid.size() - 1] - t_grid[0]);
}

/// v' [M]_T v, the quadratic variation of the scalar process v'M.
inline double qv_quadratic_form(const Vector& v, const QvMatrix& q) {
    detail::require(v.size() == q.dim(), ErrorKind::invalid_input, qv_detail::module,
                    "vector dimension " + std::to_string(v.size()) + " does not match QV dimension " +
                        std::to_string(q.dim()));
    return v.dot(q.matrix * v);
}

/// n-bar^{-1/3}: default share-of-trace threshold for rank estimation.
inline double default_rank_threshold(Eigen::Index steps) {
    detail::require(steps >= 1, ErrorKind::invalid_input, qv_detail::module, "steps must be positive");
    return std::pow(static_cast<double>(steps), -1.0 / 3.0);
}

/// Number of eigenvalues carrying at least `eps_rel` of the trace.
inline int rank_estimate(const Vector& descending_eigenvalues, double eps_rel) {
    detail::require(eps_rel > 0.0 && eps_rel < 1.0, ErrorKind::invalid_input, qv_detail::module,
                    "eps_rel must lie in (0,1)");
    double total = 0.0;
    for (double v : descending_eigenvalues) total += std::max(v, 0.0);
    if (total <= 0.0) return 0;
    int count = 0;
    for (double v : descending_eigenvalues)
        if (std::max(v, 0.0) >= eps_rel * total) ++count;
    return count;
}

inline int rank_estimate(const QvMatrix& q, double eps_rel) { return rank_estimate(q.eig.values, eps_rel); }

} // namespace qvpca
