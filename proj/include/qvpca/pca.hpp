#pragma once

// Semimartingale PCA: rank the directions of an observed path by quadratic
// variation, split them into volatility (W) and pure-drift (D) factors, and
// regress member paths on the rotated factors.

#include <qvpca/qv.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qvpca {

namespace pca_detail {
inline constexpr const char* module = "semimartingale_pca";
}

struct PcaSplit {
    Matrix rotation;  // rows are eigenvectors of [M]_T, descending
    MultiPath j_paths; // J = rotation * M, one column per component
    int p_hat = 0;
    Vector eigenvalues;
    QvMatrix qv;
    double eps_rel = 0.0;

    /// Zero-based indices of the volatility factors J^1..J^p.
    std::vector<int> w_indices() const {
        std::vector<int> out;
        for (int i = 0; i < p_hat; ++i) out.push_back(i);
        return out;
    }
    /// Zero-based indices of the null-QV factors J^{p+1}..J^d.
    std::vector<int> d_indices() const {
        std::vector<int> out;
        for (int i = p_hat; i < static_cast<int>(eigenvalues.size()); ++i) out.push_back(i);
        return out;
    }
};

/// Ranks the components of `path` by realized quadratic variation. When
/// `eps_rel` is not given the threshold is n-bar^{-1/3}.
inline PcaSplit pca_split(const MultiPath& path, std::optional<double> eps_rel = std::nullopt) {
    PcaSplit out;
    out.qv = realized_qv(path);
    out.eps_rel = eps_rel.value_or(default_rank_threshold(path.steps()));
    out.eigenvalues = out.qv.eig.values;
    out.rotation = out.qv.eig.vectors.transpose();
    out.p_hat = rank_estimate(out.qv, out.eps_rel);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < path.dim(); ++j) names.push_back("J" + std::to_string(j + 1));
    out.j_paths = MultiPath(path.times(), path.values() * out.rotation.transpose(), std::move(names));
    return out;
}

/// Cumulative shares eta_i = sum_{j<=i} theta_j / sum_r theta_r.
inline Vector explained_qv_ratios(const Vector& eigenvalues) {
    using pca_detail::module;
    double total = 0.0;
    for (double v : eigenvalues) {
        detail::require(v >= 0.0, ErrorKind::invalid_input, module, "eigenvalues must be nonnegative");
        total += v;
    }
    detail::require(total > 0.0, ErrorKind::degenerate_spectrum, module, "all eigenvalues are zero");
    Vector out(eigenvalues.size());
    double running = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        running += eigenvalues[i];
        out[i] = running / total;
    }
    out[out.size() - 1] = 1.0;
    return out;
}

struct OlsProjection {
    Vector coefficients;
    Vector fitted;
    Vector residual;
    /// Set when the J columns are collinear; coefficients are then the
    /// minimum-norm least-squares solution.
    bool rank_deficient = false;
};

/// Least-squares coefficients of `target` on the rotated factors J.
inline OlsProjection ols_project(const Vector& target, const PcaSplit& split) {
    const Matrix& design = split.j_paths.values();
    detail::require(target.size() == design.rows(), ErrorKind::invalid_input, pca_detail::module,
                    "target has " + std::to_string(target.size()) + " samples, factors have " +
                        std::to_string(design.rows()));
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    OlsProjection out;
    out.coefficients = cod.solve(target);
    out.fitted = design * out.coefficients;
    out.residual = target - out.fitted;
    out.rank_deficient = cod.rank() < design.cols();
    return out;
}

} // namespace qvpca
