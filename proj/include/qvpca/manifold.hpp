#pragma once

// Second step of the invariant-manifold estimation: rank the extracted
// variance factors by quadratic variation, rotate them, recover the loading
// curves and split the manifold into its volatility part Q and drift part N.

#include <qvpca/factor_model.hpp>
#include <qvpca/fourier.hpp>
#include <qvpca/pca.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qvpca {

namespace manifold_detail {

inline constexpr const char* module = "spde_manifold";

/// Orthonormal basis of span(functions * coeffs): the coefficient columns are
/// orthonormalized by Householder QR before mapping to grid functions.
inline SubspaceBasis span_of(const Matrix& functions, const Matrix& coeffs, const InnerProduct& ip) {
    if (coeffs.cols() == 0) return SubspaceBasis{Matrix(functions.rows(), 0), ip, true};
    Eigen::HouseholderQR<Matrix> qr(coeffs);
    const Matrix q = qr.householderQ() * Matrix::Identity(coeffs.rows(), coeffs.cols());
    return gram_schmidt(functions * q, ip);
}

} // namespace manifold_detail

/// Realized QV matrix of factor paths (one path per column).
inline Matrix factor_qv_matrix(const Matrix& factor_paths) {
    detail::require(factor_paths.rows() >= 2, ErrorKind::insufficient_data, manifold_detail::module,
                    "factor QV needs at least 2 time points");
    return increment_gram(factor_paths);
}

/// phi_i(x) = sqrt(rho) * sum_k y^i_{t_k} X_{t_k}(x); one column per factor.
inline Matrix estimate_loadings(const SpaceTimePanel& panel, const Matrix& raw_eigenvectors) {
    detail::require(raw_eigenvectors.rows() == panel.time_points(), ErrorKind::shape, manifold_detail::module,
                    "eigenvectors have " + std::to_string(raw_eigenvectors.rows()) + " rows, panel has " +
                        std::to_string(panel.time_points()) + " time points");
    return std::sqrt(panel.time_mesh()) * panel.values().transpose() * raw_eigenvectors;
}

/// Where the dimension of Q comes from.
struct SplitOptions {
    enum class Source { threshold, fourier, fixed };
    Source source = Source::threshold;
    std::optional<double> eps_rel;      // threshold route, default n-bar^{-1/3}
    std::optional<int> fourier_cutoff;  // fourier route, default floor((n-bar-1)/2)
    std::optional<double> fourier_eps;  // fourier route, default n-bar^{-1/3}
    bool fourier_relative = false;
    int fixed_p = 0;

    static std::string name(Source source) {
        switch (source) {
        case Source::threshold: return "threshold";
        case Source::fourier: return "fourier";
        case Source::fixed: return "fixed";
        }
        return "threshold";
    }
};

struct ManifoldEstimate {
    int d_hat = 0;
    int p_hat = 0;
    FactorFit fit;
    Matrix y_qv;             // [Y]_T
    Matrix l_hat;            // rows: eigenvectors of [Y]_T, descending
    Matrix z_paths;          // Z_t = L Y_t, one column per component
    Vector theta;            // eigenvalues of [Y]_T, descending
    Matrix phi_hat;          // loading curves, one column per factor
    Matrix rotated_loadings; // (L phi)_j, one column per component
    SubspaceBasis q_space; // orthonormal under the Sobolev form
    SubspaceBasis n_space;
    SubspaceBasis v_basis; // orthonormal basis of span{phi_1..phi_d}
    double threshold = 0.0;
    std::optional<FourierEstimate> fourier;
    /// Energy of the increments left unexplained by the d factors,
    /// delta * sum_i ||d(X - Y Lambda')_i||^2; a diagnostic for the noise.
    double residual_increment_energy = 0.0;

    /// The rotated loadings themselves, unorthonormalized.
    SubspaceBasis rotated_space() const { return SubspaceBasis{rotated_loadings, q_space.inner_product, false}; }
};

/// Runs the QV split on an already phi-subtracted panel with d factors.
inline ManifoldEstimate split_manifold(const SpaceTimePanel& panel, int d_hat, const SplitOptions& options = {}) {
    using manifold_detail::module;
    ManifoldEstimate est;
    est.d_hat = d_hat;
    est.fit = extract_factors(panel, d_hat);
    est.y_qv = factor_qv_matrix(est.fit.y_hat);
    const QvMatrix qv = QvMatrix::from_matrix(est.y_qv, panel.t_grid()[panel.steps()] - panel.t_grid()[0]);
    est.theta = qv.eig.values;
    est.l_hat = qv.eig.vectors.transpose();
    est.z_paths = est.fit.y_hat * est.l_hat.transpose();
    est.phi_hat = estimate_loadings(panel, est.fit.raw);
    est.rotated_loadings = est.phi_hat * est.l_hat.transpose();

    switch (options.source) {
    case SplitOptions::Source::threshold:
        est.threshold = options.eps_rel.value_or(default_rank_threshold(panel.steps()));
        est.p_hat = rank_estimate(qv, est.threshold);
        break;
    case SplitOptions::Source::fourier:
        est.fourier = reduced_operator(panel, options.fourier_cutoff, options.fourier_eps, options.fourier_relative);
        est.threshold = est.fourier->eps;
        est.p_hat = std::min(est.fourier->p_hat_eps, d_hat);
        break;
    case SplitOptions::Source::fixed:
        detail::require(options.fixed_p >= 0 && options.fixed_p <= d_hat, ErrorKind::invalid_input, module,
                        "fixed p must lie in [0, d]");
        est.p_hat = options.fixed_p;
        break;
    }

    const InnerProduct ip = panel.sobolev();
    // V = span(phi) = span(L phi). The rotated loadings are usually dominated
    // by the largest factor, so the bases are built from unit-norm phi columns
    // with the rotation applied in coefficient space.
    Vector scale(d_hat);
    for (int i = 0; i < d_hat; ++i) scale[i] = std::sqrt(ip(est.phi_hat.col(i), est.phi_hat.col(i)));
    detail::require(scale.minCoeff() > 0.0, ErrorKind::degenerate_basis, module,
                    "a loading curve has zero Sobolev norm");
    const Matrix unit_phi = est.phi_hat * scale.cwiseInverse().asDiagonal();
    try {
        est.v_basis = gram_schmidt(unit_phi, ip);
    } catch (const Error& e) {
        detail::fail(ErrorKind::degenerate_basis, module,
                     std::string("loadings are not independent under the Sobolev form: ") + e.what());
    }
    const Matrix coeffs = scale.asDiagonal() * est.l_hat.transpose();
    est.q_space = manifold_detail::span_of(unit_phi, coeffs.leftCols(est.p_hat), ip);
    est.n_space = manifold_detail::span_of(unit_phi, coeffs.rightCols(d_hat - est.p_hat), ip);

    const Matrix residual = panel.values() - est.fit.fitted();
    const Matrix dres = residual.bottomRows(panel.steps()) - residual.topRows(panel.steps());
    est.residual_increment_energy = panel.space_mesh() * dres.squaredNorm();
    return est;
}

/// sum_j theta_j^2.
inline double hs_energy(const Vector& theta) { return theta.squaredNorm(); }

/// Cumulative shares of the diagonal of [Y]_T: the QV explained by the
/// variance-ranked factors.
inline Vector variance_factor_qv_ratios(const Matrix& y_qv) { return explained_qv_ratios(y_qv.diagonal()); }

struct PipelineConfig {
    int kmax = 8;
    PenaltySpec penalty;
    std::optional<int> d_override;
    SplitOptions split;
};

struct PipelineResult {
    bool demeaned = false;
    std::optional<PcTable> pc;
    ManifoldEstimate estimate;
};

/// Full two-step procedure on a raw panel: remove phi (or the time mean),
/// choose d by PC(k) unless overridden, then split.
inline PipelineResult estimate_manifold(const SpaceTimePanel& raw, const PipelineConfig& config = {}) {
    PipelineResult out;
    const CenteredPanel centered = remove_parametrization(raw);
    out.demeaned = centered.demeaned;
    int d = 0;
    if (config.d_override) {
        d = *config.d_override;
    } else {
        out.pc = pc_criterion(centered.panel, config.kmax, config.penalty);
        d = out.pc->d_hat;
    }
    out.estimate = split_manifold(centered.panel, d, config.split);
    return out;
}

/// d(V, V_{-k}) for each lag k, where V_{-k} is re-estimated on the panel with
/// its last k time rows dropped. Lag 0 is the full sample and returns 0.
inline std::vector<double> dynamic_distance(const SpaceTimePanel& panel, const std::vector<int>& lags,
                                            const PipelineConfig& config = {}) {
    using manifold_detail::module;
    for (int lag : lags)
        detail::require(lag >= 0 && lag < panel.steps(), ErrorKind::invalid_input, module,
                        "lag " + std::to_string(lag) + " out of range for " + std::to_string(panel.steps()) +
                            " steps");
    const SubspaceBasis full = estimate_manifold(panel, config).estimate.v_basis;
    std::vector<double> out;
    out.reserve(lags.size());
    for (int lag : lags) {
        if (lag == 0) {
            out.push_back(0.0);
            continue;
        }
        const SubspaceBasis reduced = estimate_manifold(panel.truncated(lag), config).estimate.v_basis;
        out.push_back(subspace_distance(full, reduced));
    }
    return out;
}

} // namespace qvpca
