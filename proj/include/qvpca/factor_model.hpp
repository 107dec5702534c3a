#pragma once

// Variance-based factor extraction from a space-time panel and the PC(k)
// information criterion for the number of factors.

#include <qvpca/simulation.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace qvpca {

namespace factor_detail {
inline constexpr const char* module = "factor_model";
}

/// Panel with the parametrization removed. When the panel carries no phi
/// samples the per-grid-point time mean is subtracted instead and `demeaned`
/// is set.
struct CenteredPanel {
    SpaceTimePanel panel;
    bool demeaned = false;
};

inline CenteredPanel remove_parametrization(const SpaceTimePanel& panel) {
    CenteredPanel out;
    if (panel.phi()) {
        out.panel = SpaceTimePanel(panel.t_grid(), panel.x_grid(), panel.values() - *panel.phi());
        return out;
    }
    const Eigen::RowVectorXd mean = panel.values().colwise().mean();
    out.panel = SpaceTimePanel(panel.t_grid(), panel.x_grid(), panel.values().rowwise() - mean);
    out.demeaned = true;
    return out;
}

struct FactorFit {
    int k = 0;
    Matrix raw;         // y^1..y^k: unit eigenvectors of XX', one per column
    Matrix y_hat;       // rho^{-1/2} * raw, so that rho * Y'Y = I_k
    Matrix lambda_hat;  // rho * X' Y
    Vector eigenvalues; // leading eigenvalues of XX'
    double rho = 0.0;
    double delta = 0.0;
    double objective = 0.0; // V(k, Y(k))

    Matrix fitted() const { return y_hat * lambda_hat.transpose(); }
};

namespace factor_detail {

struct PanelSpectrum {
    Matrix u;      // left singular vectors, sign-fixed
    Vector sigma2; // squared singular values, descending
};

inline PanelSpectrum panel_spectrum(const Matrix& x) {
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU);
    PanelSpectrum out;
    out.u = svd.matrixU();
    out.sigma2 = svd.singularValues().array().square();
    for (Eigen::Index j = 0; j < out.u.cols(); ++j) linalg_detail::fix_sign(out.u.col(j));
    return out;
}

inline void check_k(const SpaceTimePanel& panel, int k) {
    const Eigen::Index limit = std::min(panel.time_points(), panel.space_points());
    detail::require(k >= 1 && k < limit, ErrorKind::invalid_input, module,
                    "k = " + std::to_string(k) + " outside [1, " + std::to_string(limit - 1) + "]");
}

inline FactorFit fit_from_spectrum(const SpaceTimePanel& panel, const PanelSpectrum& spectrum, int k) {
    detail::require(spectrum.sigma2.size() > 0 && spectrum.sigma2[0] > 0.0, ErrorKind::degenerate_spectrum,
                    module, "panel has no nonzero eigenvalue");
    FactorFit fit;
    fit.k = k;
    fit.rho = panel.time_mesh();
    fit.delta = panel.space_mesh();
    fit.raw = spectrum.u.leftCols(k);
    fit.eigenvalues = spectrum.sigma2.head(k);
    fit.y_hat = fit.raw / std::sqrt(fit.rho);
    fit.lambda_hat = fit.rho * panel.values().transpose() * fit.y_hat;
    fit.objective = fit.rho * fit.delta * (panel.values() - fit.fitted()).squaredNorm();
    return fit;
}

} // namespace factor_detail

/// Leading-k variance factors of the (already phi-subtracted) panel.
inline FactorFit extract_factors(const SpaceTimePanel& panel, int k) {
    factor_detail::check_k(panel, k);
    return factor_detail::fit_from_spectrum(panel, factor_detail::panel_spectrum(panel.values()), k);
}

/// V(k, Y(k)) = rho * delta * ||X - Y Lambda'||^2.
inline double objective_v(const SpaceTimePanel& panel, const FactorFit& fit) {
    detail::require(fit.y_hat.rows() == panel.time_points() && fit.lambda_hat.rows() == panel.space_points(),
                    ErrorKind::shape, factor_detail::module, "fit does not match panel shape");
    return fit.rho * fit.delta * (panel.values() - fit.fitted()).squaredNorm();
}

/// V(0): rho * delta * sum X^2, the empty-factor baseline.
inline double baseline_objective(const SpaceTimePanel& panel) {
    return panel.time_mesh() * panel.space_mesh() * panel.values().squaredNorm();
}

/// Penalty q(n,N) = sigma2 * g(n,N), sigma2 = V(kmax). With n time points,
/// N grid points and C2 = min(n, N):
///   p1: (n+N)/(nN) * ln(nN/(n+N))
///   p2: (n+N)/(nN) * ln(C2)
///   p3: ln(C2) / C2
struct PenaltySpec {
    enum class Kind { p1, p2, p3 };
    Kind kind = Kind::p1;

    static std::string name(Kind kind) {
        switch (kind) {
        case Kind::p1: return "p1";
        case Kind::p2: return "p2";
        case Kind::p3: return "p3";
        }
        return "p1";
    }
    std::string name() const { return name(kind); }

    static PenaltySpec parse(const std::string& text) {
        if (text == "p1") return {Kind::p1};
        if (text == "p2") return {Kind::p2};
        if (text == "p3") return {Kind::p3};
        detail::fail(ErrorKind::invalid_input, factor_detail::module, "unknown penalty '" + text + "'");
    }

    double rate(double n, double big_n) const {
        const double c2 = std::min(n, big_n);
        switch (kind) {
        case Kind::p1: return (n + big_n) / (n * big_n) * std::log(n * big_n / (n + big_n));
        case Kind::p2: return (n + big_n) / (n * big_n) * std::log(c2);
        case Kind::p3: return std::log(c2) / c2;
        }
        return 0.0;
    }

    /// C_nN = min(delta^{-1/2}, rho^{-1/2}).
    static double c_nn(double rho, double delta) { return std::min(1.0 / std::sqrt(delta), 1.0 / std::sqrt(rho)); }
};

struct PcTable {
    int d_hat = 0;
    int kmax = 0;
    Vector v;  // v[k] = V(k), k = 0..kmax
    Vector pc; // pc[k-1] = PC(k), k = 1..kmax
    double sigma2 = 0.0;
    double q = 0.0;
    PenaltySpec penalty;
};

/// d-hat = argmin_{1<=k<=kmax} V(k) + k q. PC values within 1e-12 * V(0) of
/// the minimum count as ties and resolve to the smaller k.
inline PcTable pc_criterion(const SpaceTimePanel& panel, int kmax, PenaltySpec penalty = {}) {
    factor_detail::check_k(panel, kmax);
    const auto spectrum = factor_detail::panel_spectrum(panel.values());
    PcTable out;
    out.kmax = kmax;
    out.penalty = penalty;
    out.v.resize(kmax + 1);
    out.v[0] = baseline_objective(panel);
    for (int k = 1; k <= kmax; ++k) out.v[k] = factor_detail::fit_from_spectrum(panel, spectrum, k).objective;
    out.sigma2 = out.v[kmax];
    out.q = out.sigma2 * penalty.rate(static_cast<double>(panel.time_points()),
                                       static_cast<double>(panel.space_points()));
    out.pc.resize(kmax);
    for (int k = 1; k <= kmax; ++k) out.pc[k - 1] = out.v[k] + k * out.q;
    const double tol = 1e-12 * out.v[0];
    out.d_hat = 1;
    for (int k = 2; k <= kmax; ++k)
        if (out.pc[k - 1] < out.pc[out.d_hat - 1] - tol) out.d_hat = k;
    return out;
}

} // namespace qvpca
