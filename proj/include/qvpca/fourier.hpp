#pragma once

// Fourier-Dirichlet estimation of the quadratic-variation operator of a curve
// process. The operator Q_T = AB is never formed on the curve space; its
// nonzero spectrum is read off the reduced (2M+1)x(2M+1) matrix BA, and its
// eigenfunctions are recovered as A applied to the reduced eigenvectors.

#include <qvpca/simulation.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

namespace qvpca {

namespace fourier_detail {
inline constexpr const char* module = "fourier_qdim";
}

/// Normalized Dirichlet kernel (1/(2M+1)) sum_{|s|<=M} e^{its}, with time
/// measured so that one period spans `period`. Equals 1 at multiples of the period.
inline double dirichlet_kernel(double t, int m, double period = 2.0 * std::numbers::pi) {
    detail::require(m >= 0, ErrorKind::invalid_input, fourier_detail::module, "M must be nonnegative");
    const double cycles = t / period;
    if (std::abs(cycles - std::round(cycles)) <= 1e-12) return 1.0;
    const double u = 2.0 * std::numbers::pi * cycles;
    return std::sin((m + 0.5) * u) / ((2.0 * m + 1.0) * std::sin(0.5 * u));
}

/// floor((n-bar - 1)/2).
inline int default_fourier_cutoff(Eigen::Index steps) {
    return static_cast<int>(std::max<Eigen::Index>(1, (steps - 1) / 2));
}

struct FourierEstimate {
    int M = 0;
    ComplexMatrix b_matrix; // row m+M: sum_l exp(-i m t_l) (coordinates of dX_{l+1})
    ComplexMatrix q_bar;    // (1/(2M+1)) B B^*, the reduced operator
    Vector eigenvalues;     // descending, negatives from roundoff clamped to 0
    ComplexMatrix gamma;    // unit eigenvectors of q_bar, paired with eigenvalues
    Vector rescaled_times;  // left endpoints of the increments, mapped to [0, 2 pi]
    Matrix increments;      // dX_{l+1} on the grid, one row per step
    double trace = 0.0;
    int p_hat_eps = 0;
    double eps = 0.0;
    bool relative = false;
};

/// n-bar^{-1/3}.
inline double default_fourier_threshold(Eigen::Index steps) {
    return std::pow(static_cast<double>(steps), -1.0 / 3.0);
}

/// Count of eigenvalues >= eps (absolute), or >= eps * trace when `relative`.
inline int qdim_estimate(const Vector& eigenvalues, double eps, bool relative = false) {
    detail::require(eps > 0.0, ErrorKind::invalid_input, fourier_detail::module, "eps must be positive");
    double total = 0.0;
    for (double v : eigenvalues) total += std::max(v, 0.0);
    if (total <= 0.0) return 0;
    const double cut = relative ? eps * total : eps;
    int count = 0;
    for (double v : eigenvalues)
        if (v > 0.0 && v >= cut) ++count;
    return count;
}

inline int qdim_estimate(const FourierEstimate& est, double eps, bool relative = false) {
    return qdim_estimate(est.eigenvalues, eps, relative);
}

/// Builds the reduced operator
///   Qbar[m,s] = (1/(2M+1)) sum_{k,l} exp(i(s t_k - m t_l)) <dX_{l+1}, dX_{k+1}>_a
/// via its factorization B B^*/(2M+1), with the time grid affinely mapped onto
/// [0, 2 pi]. Increments are taken from the panel values as given.
inline FourierEstimate reduced_operator(const SpaceTimePanel& panel, std::optional<int> cutoff = std::nullopt,
                                        std::optional<double> eps = std::nullopt, bool relative = false) {
    using fourier_detail::module;
    detail::require(panel.steps() >= 1, ErrorKind::insufficient_data, module, "panel needs at least one increment");
    FourierEstimate est;
    est.M = cutoff.value_or(default_fourier_cutoff(panel.steps()));
    detail::require(est.M >= 1, ErrorKind::invalid_input, module, "cutoff M must be at least 1");
    const Eigen::Index steps = panel.steps();
    const Eigen::Index width = 2 * est.M + 1;
    const Vector& t = panel.t_grid();
    const double span = t[t.size() - 1] - t[0];

    est.increments = panel.values().bottomRows(steps) - panel.values().topRows(steps);
    const Matrix coords = panel.sobolev().coordinates(est.increments.transpose()).transpose(); // steps x r
    est.rescaled_times.resize(steps);
    for (Eigen::Index l = 0; l < steps; ++l) est.rescaled_times[l] = 2.0 * std::numbers::pi * (t[l] - t[0]) / span;

    ComplexMatrix phases(width, steps);
    for (Eigen::Index row = 0; row < width; ++row) {
        const double m = static_cast<double>(row - est.M);
        for (Eigen::Index l = 0; l < steps; ++l) phases(row, l) = std::polar(1.0, -m * est.rescaled_times[l]);
    }
    est.b_matrix = phases * coords.cast<std::complex<double>>();
    const double norm = 1.0 / static_cast<double>(width);
    est.q_bar = norm * (est.b_matrix * est.b_matrix.adjoint());

    const double scale = est.q_bar.cwiseAbs().maxCoeff();
    const double asym = (est.q_bar - est.q_bar.adjoint()).cwiseAbs().maxCoeff();
    detail::require(asym <= 1e-10 * std::max(scale, 1e-300) || scale == 0.0, ErrorKind::invalid_input, module,
                    "reduced operator failed the Hermitian check (asymmetry " + std::to_string(asym) + ")");
    est.trace = est.q_bar.trace().real();

    // BA and AB share nonzero eigenvalues: solve whichever side is smaller.
    const Eigen::Index rank_bound = coords.cols();
    if (rank_bound < width) {
        const ComplexMatrix small = norm * (est.b_matrix.adjoint() * est.b_matrix);
        const HermitianEigensystem eig = eigh_hermitian_descending(small);
        est.eigenvalues = eig.values;
        est.gamma = ComplexMatrix::Zero(width, eig.values.size());
        for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
            ComplexVector g = est.b_matrix * eig.vectors.col(j);
            const double gn = g.norm();
            if (gn > 0.0) {
                g /= gn;
                linalg_detail::fix_phase(g.head(g.size()));
                est.gamma.col(j) = g;
            }
        }
    } else {
        const HermitianEigensystem eig = eigh_hermitian_descending(est.q_bar);
        est.eigenvalues = eig.values;
        est.gamma = eig.vectors;
    }
    const double floor = -1e-8 * std::max(std::abs(est.trace), 1e-300);
    for (Eigen::Index j = 0; j < est.eigenvalues.size(); ++j) {
        detail::require(est.eigenvalues[j] >= floor || est.trace == 0.0, ErrorKind::invalid_input, module,
                        "reduced operator has a negative eigenvalue");
        if (est.eigenvalues[j] < 0.0) est.eigenvalues[j] = 0.0;
    }
    est.relative = relative;
    est.eps = eps.value_or(default_fourier_threshold(steps));
    est.p_hat_eps = qdim_estimate(est, est.eps, relative);
    return est;
}

struct Eigenfunctions {
    Matrix functions;       // one real grid function per column
    Vector imaginary_share; // ||Im f|| / ||f|| before the imaginary part is dropped
    Vector eigenvalues;
};

/// (1/(2M+1)) sum_s gamma_j(s) sum_k exp(i s t_k) dX_{k+1} for the first
/// `count` eigenvectors (default p-hat^eps). Each function is rotated so its
/// largest entry is real and positive before the real part is kept.
inline Eigenfunctions eigenfunctions(const FourierEstimate& est, std::optional<int> count = std::nullopt) {
    using fourier_detail::module;
    const int p = count.value_or(est.p_hat_eps);
    detail::require(p >= 0 && p <= est.gamma.cols(), ErrorKind::invalid_input, module,
                    "requested eigenfunction count out of range");
    Eigenfunctions out;
    out.functions.resize(est.increments.cols(), p);
    out.imaginary_share.resize(p);
    out.eigenvalues = est.eigenvalues.head(p);
    if (p == 0) return out;
    const Eigen::Index width = 2 * est.M + 1;
    const Eigen::Index steps = est.increments.rows();
    ComplexMatrix forward(width, steps);
    for (Eigen::Index row = 0; row < width; ++row) {
        const double s = static_cast<double>(row - est.M);
        for (Eigen::Index k = 0; k < steps; ++k) forward(row, k) = std::polar(1.0, s * est.rescaled_times[k]);
    }
    const ComplexMatrix transformed = forward * est.increments.cast<std::complex<double>>(); // width x N
    for (int j = 0; j < p; ++j) {
        ComplexVector f = (est.gamma.col(j).transpose() * transformed).transpose() / static_cast<double>(width);
        linalg_detail::fix_phase(f.head(f.size()));
        const double total = f.norm();
        out.imaginary_share[j] = total > 0.0 ? f.imag().norm() / total : 0.0;
        out.functions.col(j) = f.real();
    }
    return out;
}

} // namespace qvpca
