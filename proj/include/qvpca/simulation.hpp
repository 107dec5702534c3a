#pragma once

// Euler-Maruyama engine, the concrete factor models used in the numerical
// studies, loading curves and noisy space-time panel generation.

#include <qvpca/qv.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace qvpca {

namespace sim_detail {
inline constexpr const char* module = "simulation";
}

/// Seeded generator. Uniforms take the top 53 bits of a 64-bit Mersenne
/// Twister draw; normals use the Box-Muller transform
///   z0 = sqrt(-2 ln(1-u1)) cos(2 pi u2),  z1 = sqrt(-2 ln(1-u1)) sin(2 pi u2),
/// returning z0 and caching z1 for the next call. Output is identical on every
/// platform for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform(); // (0,1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        return r * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// dX = drift(X) dt + diffusion(X) dB with B an m-dimensional Brownian motion.
struct SdeModel {
    std::string name;
    int dim_state = 0;
    int dim_noise = 0;
    std::function<Vector(const Vector&)> drift;
    std::function<Matrix(const Vector&)> diffusion; // dim_state x dim_noise
    Vector x0;
};

/// Plain Euler-Maruyama on the observation grid itself.
inline MultiPath euler_maruyama(const SdeModel& model, const Vector& t_grid, Rng& rng) {
    using sim_detail::module;
    detail::require(model.x0.size() == model.dim_state, ErrorKind::invalid_input, module,
                    "initial state has wrong dimension");
    detail::require(t_grid.size() >= 2, ErrorKind::insufficient_data, module, "time grid needs 2 points");
    const double dt0 = t_grid[1] - t_grid[0];
    for (Eigen::Index i = 1; i < t_grid.size(); ++i) {
        const double dt = t_grid[i] - t_grid[i - 1];
        detail::require(dt > 0.0, ErrorKind::invalid_input, module, "time grid not increasing");
        detail::require(std::abs(dt - dt0) <= 1e-9 * std::abs(dt0), ErrorKind::invalid_input, module,
                        "time grid is not equidistant at index " + std::to_string(i));
    }
    const Eigen::Index n = t_grid.size();
    Matrix values(n, model.dim_state);
    Vector x = model.x0;
    values.row(0) = x.transpose();
    Vector db(model.dim_noise);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double dt = t_grid[k + 1] - t_grid[k];
        const double sd = std::sqrt(dt);
        for (int j = 0; j < model.dim_noise; ++j) db[j] = sd * rng.normal();
        const Vector mu = model.drift(x);
        const Matrix sigma = model.diffusion(x);
        detail::require(mu.size() == model.dim_state && sigma.rows() == model.dim_state &&
                            sigma.cols() == model.dim_noise,
                        ErrorKind::invalid_input, module, "vector field dimensions inconsistent with model");
        x = x + mu * dt + sigma * db;
        if (!x.allFinite())
            detail::fail(ErrorKind::blow_up, module, "non-finite state at step " + std::to_string(k + 1));
        values.row(k + 1) = x.transpose();
    }
    return MultiPath(t_grid, std::move(values));
}

/// 2000 equidistant points on [0, 2 pi], the time grid of the numerical studies.
inline Vector standard_time_grid(Eigen::Index points = 2000) {
    return uniform_grid(0.0, 2.0 * std::numbers::pi, points);
}

/// 31 equidistant points on [0, 5], the maturity grid of the panel studies.
inline Vector standard_space_grid(Eigen::Index points = 31) { return uniform_grid(0.0, 5.0, points); }

namespace sim_detail {

inline Vector linear_drift(const Vector& x) {
    Vector mu(4);
    mu << x[1], -2.0 * x[0] + x[2], x[3], -x[0];
    return mu;
}

} // namespace sim_detail

/// Standard Brownian motion started at 0.
inline SdeModel brownian_model() {
    SdeModel m;
    m.name = "bm";
    m.dim_state = 1;
    m.dim_noise = 1;
    m.drift = [](const Vector&) { return Vector::Zero(1).eval(); };
    m.diffusion = [](const Vector&) { return Matrix::Ones(1, 1).eval(); };
    m.x0 = Vector::Zero(1);
    return m;
}

/// Four-dimensional diffusion with three driving Brownian motions whose
/// volatility space is {B^1, B^2, int M^2 dB^3}; one direction is pure drift.
inline SdeModel model_7_1() {
    SdeModel m;
    m.name = "7.1";
    m.dim_state = 4;
    m.dim_noise = 3;
    m.drift = sim_detail::linear_drift;
    m.diffusion = [](const Vector& x) {
        Matrix s(4, 3);
        s << 1.0, 0.0, x[1],
             0.0, 1.0, 0.0,
             0.0, 0.0, x[1],
             0.0, 0.0, x[1];
        return s;
    };
    m.x0 = Vector::Zero(4);
    return m;
}

/// Same drift with sigma rows (1,0,0), (0,x2,0), (0,0,x1), (0,0,0): the factor
/// process behind the four-loading space-time panel.
inline SdeModel model_7_1_fdr() {
    SdeModel m = model_7_1();
    m.name = "7.1-fdr";
    m.diffusion = [](const Vector& x) {
        Matrix s = Matrix::Zero(4, 3);
        s(0, 0) = 1.0;
        s(1, 1) = x[1];
        s(2, 2) = x[0];
        return s;
    };
    return m;
}

// ---------------------------------------------------------------------------
// Loadings and parametrizations
// ---------------------------------------------------------------------------

struct LoadingSet {
    std::vector<std::string> names;
    std::vector<std::function<double(double)>> functions;

    int size() const noexcept { return static_cast<int>(functions.size()); }

    /// N x d matrix, column k = lambda_k on the grid.
    Matrix sample(const Vector& x_grid) const {
        Matrix out(x_grid.size(), size());
        for (int k = 0; k < size(); ++k)
            for (Eigen::Index j = 0; j < x_grid.size(); ++j) out(j, k) = functions[k](x_grid[j]);
        return out;
    }

    LoadingSet first(int count) const {
        detail::require(count >= 0 && count <= size(), ErrorKind::invalid_input, sim_detail::module,
                        "loading subset out of range");
        LoadingSet out;
        out.names.assign(names.begin(), names.begin() + count);
        out.functions.assign(functions.begin(), functions.begin() + count);
        return out;
    }
};

/// lambda_1 = x cos x, lambda_2 = cos x - x sin x, lambda_3 = -2 sin x - x cos x,
/// lambda_4 = x sin x - 3 cos x.
inline LoadingSet standard_loadings() {
    LoadingSet out;
    out.names = {"lambda1", "lambda2", "lambda3", "lambda4"};
    out.functions = {
        [](double x) { return x * std::cos(x); },
        [](double x) { return std::cos(x) - x * std::sin(x); },
        [](double x) { return -2.0 * std::sin(x) - x * std::cos(x); },
        [](double x) { return x * std::sin(x) - 3.0 * std::cos(x); },
    };
    return out;
}

using Parametrization = std::function<double(double t, double x)>;

inline Parametrization zero_parametrization() {
    return [](double, double) { return 0.0; };
}

struct HjmRealization {
    SdeModel factors;
    LoadingSet loadings;
    Parametrization phi;
};

/// Finite-dimensional realization of the HJM equation with volatilities
/// lambda_1..lambda_3:
///   dZ1 = -Z2 dt + dB1, dZ2 = (-2 Z1 + Z3) dt + dB2,
///   dZ3 = (Z4 - Z1) dt + dB3, dZ4 = -Z1 dt,
/// started at zero, with the deterministic shift phi_t(x).
inline HjmRealization model_hjm_fdr() {
    HjmRealization out;
    SdeModel& m = out.factors;
    m.name = "hjm";
    m.dim_state = 4;
    m.dim_noise = 3;
    m.drift = [](const Vector& z) {
        Vector mu(4);
        mu << -z[1], -2.0 * z[0] + z[2], z[3] - z[0], -z[0];
        return mu;
    };
    m.diffusion = [](const Vector&) {
        Matrix s = Matrix::Zero(4, 3);
        s(0, 0) = s(1, 1) = s(2, 2) = 1.0;
        return s;
    };
    m.x0 = Vector::Zero(4);
    out.loadings = standard_loadings();
    out.phi = [](double t, double x) {
        const auto g = [](double y) { return y * std::sin(y) + std::cos(y); };
        const auto l1 = [](double y) { return y * std::cos(y); };
        const auto l2 = [](double y) { return std::cos(y) - y * std::sin(y); };
        const double s = x + t;
        return -0.5 * g(x) * g(x) + 0.5 * g(s) * g(s) - 0.5 * l1(x) * l1(x) + 0.5 * l1(s) * l1(s) -
               0.5 * l2(x) * l2(x) + 0.5 * l2(s) * l2(s);
    };
    return out;
}

// ---------------------------------------------------------------------------
// Space-time panels
// ---------------------------------------------------------------------------

/// Curve observations X_{t_i}(x_j): rows are times, columns are grid points.
/// `phi` holds samples of a known parametrization when the observer has one.
class SpaceTimePanel {
public:
    SpaceTimePanel() = default;

    SpaceTimePanel(Vector t_grid, Vector x_grid, Matrix values, std::optional<Matrix> phi = std::nullopt)
        : t_(std::move(t_grid)), x_(std::move(x_grid)), values_(std::move(values)), phi_(std::move(phi)) {
        using sim_detail::module;
        detail::require(values_.rows() == t_.size() && values_.cols() == x_.size(), ErrorKind::shape, module,
                        "panel is " + std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()) +
                            " but grids are " + std::to_string(t_.size()) + "x" + std::to_string(x_.size()));
        detail::require(t_.size() >= 1 && x_.size() >= 2, ErrorKind::insufficient_data, module,
                        "panel needs at least one time and two grid points");
        for (Eigen::Index i = 1; i < t_.size(); ++i)
            detail::require(t_[i] > t_[i - 1], ErrorKind::invalid_input, module,
                            "time grid not strictly increasing at row " + std::to_string(i));
        for (Eigen::Index j = 1; j < x_.size(); ++j)
            detail::require(x_[j] > x_[j - 1], ErrorKind::invalid_input, module,
                            "space grid not strictly increasing at column " + std::to_string(j));
        for (Eigen::Index i = 0; i < values_.rows(); ++i)
            for (Eigen::Index j = 0; j < values_.cols(); ++j)
                detail::require(std::isfinite(values_(i, j)), ErrorKind::invalid_input, module,
                                "non-finite value at row " + std::to_string(i) + ", column " +
                                    std::to_string(j));
        if (phi_)
            detail::require(phi_->rows() == values_.rows() && phi_->cols() == values_.cols(), ErrorKind::shape,
                            module, "parametrization samples do not match panel shape");
    }

    const Vector& t_grid() const noexcept { return t_; }
    const Vector& x_grid() const noexcept { return x_; }
    const Matrix& values() const noexcept { return values_; }
    const std::optional<Matrix>& phi() const noexcept { return phi_; }

    Eigen::Index time_points() const noexcept { return t_.size(); }
    Eigen::Index space_points() const noexcept { return x_.size(); }
    Eigen::Index steps() const noexcept { return t_.size() - 1; }

    /// rho(n): largest time step.
    double time_mesh() const {
        double out = 0.0;
        for (Eigen::Index i = 1; i < t_.size(); ++i) out = std::max(out, t_[i] - t_[i - 1]);
        return out;
    }
    /// delta(N): largest spatial step.
    double space_mesh() const {
        double out = 0.0;
        for (Eigen::Index j = 1; j < x_.size(); ++j) out = std::max(out, x_[j] - x_[j - 1]);
        return out;
    }

    InnerProduct sobolev() const { return InnerProduct::sobolev(x_); }

    /// The panel restricted to its first time_points() - lag rows.
    SpaceTimePanel truncated(Eigen::Index lag) const {
        detail::require(lag >= 0 && lag < steps(), ErrorKind::invalid_input, sim_detail::module,
                        "lag " + std::to_string(lag) + " out of range for " + std::to_string(steps()) +
                            " steps");
        const Eigen::Index keep = t_.size() - lag;
        std::optional<Matrix> phi;
        if (phi_) phi = phi_->topRows(keep);
        return SpaceTimePanel(t_.head(keep), x_, values_.topRows(keep), std::move(phi));
    }

private:
    Vector t_;
    Vector x_;
    Matrix values_;
    std::optional<Matrix> phi_;
};

/// eps_t(x) = amplitude * u_t * sin(frequency * x) with u_t iid standard normal.
struct NoiseSpec {
    enum class Kind { none, sine_mode };
    Kind kind = Kind::none;
    double amplitude = std::numbers::sqrt2 / 3.0;
    double frequency = std::numbers::pi;

    static NoiseSpec none() { return {}; }
    static NoiseSpec sine_mode() {
        NoiseSpec s;
        s.kind = Kind::sine_mode;
        return s;
    }

    double value(double u, double x) const {
        return kind == Kind::none ? 0.0 : amplitude * u * std::sin(frequency * x);
    }
};

/// X_{t_i}(x_j) = phi_{t_i}(x_j) + sum_k Z^k_{t_i} lambda_k(x_j) + eps_{t_i}(x_j).
/// Noise draws continue from `rng` after whatever produced `factors`.
inline SpaceTimePanel build_panel(const MultiPath& factors, const LoadingSet& loadings,
                                  const std::optional<Parametrization>& phi, const NoiseSpec& noise,
                                  const Vector& x_grid, Rng& rng) {
    detail::require(factors.dim() == loadings.size(), ErrorKind::shape, sim_detail::module,
                    "factor dimension " + std::to_string(factors.dim()) + " does not match " +
                        std::to_string(loadings.size()) + " loadings");
    const Vector& t = factors.times();
    Matrix values = factors.values() * loadings.sample(x_grid).transpose();
    std::optional<Matrix> phi_samples;
    if (phi) {
        Matrix p(t.size(), x_grid.size());
        for (Eigen::Index i = 0; i < t.size(); ++i)
            for (Eigen::Index j = 0; j < x_grid.size(); ++j) p(i, j) = (*phi)(t[i], x_grid[j]);
        values += p;
        phi_samples = std::move(p);
    }
    if (noise.kind != NoiseSpec::Kind::none) {
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double u = rng.normal();
            for (Eigen::Index j = 0; j < x_grid.size(); ++j) values(i, j) += noise.value(u, x_grid[j]);
        }
    }
    return SpaceTimePanel(t, x_grid, std::move(values), std::move(phi_samples));
}

struct SimulatedPanel {
    SpaceTimePanel panel;
    MultiPath factors;
    LoadingSet loadings;
};

/// Factors of `model_7_1_fdr` loaded on lambda_1..lambda_4 with phi = 0.
inline SimulatedPanel simulate_fdr_panel(Rng& rng, const NoiseSpec& noise = NoiseSpec::none(),
                                         const Vector& t_grid = standard_time_grid(),
                                         const Vector& x_grid = standard_space_grid()) {
    SimulatedPanel out;
    out.factors = euler_maruyama(model_7_1_fdr(), t_grid, rng);
    out.loadings = standard_loadings();
    out.panel = build_panel(out.factors, out.loadings, zero_parametrization(), noise, x_grid, rng);
    return out;
}

/// HJM realization r_t = phi_t + sum Z^i lambda_i plus optional noise.
inline SimulatedPanel simulate_hjm_panel(Rng& rng, const NoiseSpec& noise = NoiseSpec::none(),
                                         const Vector& t_grid = standard_time_grid(),
                                         const Vector& x_grid = standard_space_grid()) {
    const HjmRealization model = model_hjm_fdr();
    SimulatedPanel out;
    out.factors = euler_maruyama(model.factors, t_grid, rng);
    out.loadings = model.loadings;
    out.panel = build_panel(out.factors, out.loadings, model.phi, noise, x_grid, rng);
    return out;
}

struct VarianceVersusQvModels {
    MultiPath brownian;
    MultiPath x_factors; // (B, sin(15t) - B)
    MultiPath u_factors; // (B, sin(3t) - B)
    SpaceTimePanel x_panel;
    SpaceTimePanel u_panel;
};

/// X_t = B_t lambda_1 + (sin(15t) - B_t) lambda_2 and
/// U_t = B_t lambda_1 + (sin(3t) - B_t) lambda_2, driven by one Brownian path.
inline VarianceVersusQvModels models_7_2(Rng& rng, const Vector& t_grid = standard_time_grid(),
                                         const Vector& x_grid = standard_space_grid()) {
    VarianceVersusQvModels out;
    out.brownian = euler_maruyama(brownian_model(), t_grid, rng);
    const Vector b = out.brownian.values().col(0);
    const auto factor_pair = [&](double frequency) {
        Matrix f(t_grid.size(), 2);
        for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
            f(i, 0) = b[i];
            f(i, 1) = std::sin(frequency * t_grid[i]) - b[i];
        }
        return MultiPath(t_grid, std::move(f), {"B", "Gamma-B"});
    };
    out.x_factors = factor_pair(15.0);
    out.u_factors = factor_pair(3.0);
    const LoadingSet loadings = standard_loadings().first(2);
    out.x_panel = build_panel(out.x_factors, loadings, zero_parametrization(), NoiseSpec::none(), x_grid, rng);
    out.u_panel = build_panel(out.u_factors, loadings, zero_parametrization(), NoiseSpec::none(), x_grid, rng);
    return out;
}

} // namespace qvpca
