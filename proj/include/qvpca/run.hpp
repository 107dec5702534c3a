#pragma once

// Command orchestration shared by the qvpca executable and the tests.
// run() computes a ResultBundle in memory; write_bundle() puts it on disk.

#include <qvpca/io.hpp>
#include <qvpca/manifold.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qvpca {

inline constexpr const char* version = "0.1.0";

struct RunConfig {
    std::string command;
    std::vector<std::uint64_t> seeds{7};
    std::string model = "7.1"; // bm | 7.1 | 7.1-fdr | hjm | 7.2
    std::string input;         // paths CSV for pca, panel CSV otherwise
    std::string phi;           // optional parametrization samples, panel layout
    long time_points = 2000;
    long space_points = 31;
    double horizon = 2.0 * std::numbers::pi;
    double space_start = 0.0;
    double space_end = 5.0;
    std::string noise = "none"; // none | sine
    int kmax = 8;
    std::string penalty = "p1";
    std::optional<double> eps_rel;
    std::string p_route = "threshold"; // threshold | fourier | fixed
    int fixed_p = 0;
    std::optional<int> d;
    std::optional<int> fourier_m;
    std::optional<double> fourier_eps;
    bool relative = false;
    std::vector<int> lags{0};
    std::string output = "qvpca-out";
};

/// Named CSV files plus the JSON run summary.
struct ResultBundle {
    std::map<std::string, std::string> files;
    nlohmann::json summary;
};

namespace run_detail {

inline constexpr const char* module = "cli_io";

inline nlohmann::json optional_json(const auto& value) {
    if (value) return *value;
    return nullptr;
}

inline nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["seeds"] = c.seeds;
    j["model"] = c.model;
    j["input"] = c.input;
    j["phi"] = c.phi;
    j["time_points"] = c.time_points;
    j["space_points"] = c.space_points;
    j["horizon"] = c.horizon;
    j["space_start"] = c.space_start;
    j["space_end"] = c.space_end;
    j["noise"] = c.noise;
    j["kmax"] = c.kmax;
    j["penalty"] = c.penalty;
    j["eps_rel"] = optional_json(c.eps_rel);
    j["p_route"] = c.p_route;
    j["fixed_p"] = c.fixed_p;
    j["d"] = optional_json(c.d);
    j["fourier_m"] = optional_json(c.fourier_m);
    j["fourier_eps"] = optional_json(c.fourier_eps);
    j["relative"] = c.relative;
    j["lags"] = c.lags;
    j["output"] = c.output;
    return j;
}

inline void validate(const RunConfig& c) {
    static const std::vector<std::string> commands{"simulate", "pca", "factors", "manifold", "qdim", "distance"};
    detail::require(std::find(commands.begin(), commands.end(), c.command) != commands.end(),
                    ErrorKind::invalid_input, module, "unknown command '" + c.command + "'");
    detail::require(c.time_points >= 2 && c.space_points >= 2, ErrorKind::invalid_input, module,
                    "grid sizes must be at least 2");
    detail::require(c.horizon > 0.0 && c.space_end > c.space_start, ErrorKind::invalid_input, module,
                    "horizon and space interval must be positive");
    detail::require(c.kmax >= 1, ErrorKind::invalid_input, module, "kmax must be positive");
    if (c.command == "simulate")
        detail::require(!c.seeds.empty(), ErrorKind::invalid_input, module, "seed list is empty");
    else
        detail::require(!c.input.empty(), ErrorKind::invalid_input, module, c.command + " needs --input");
    detail::require(c.noise == "none" || c.noise == "sine", ErrorKind::invalid_input, module,
                    "noise must be 'none' or 'sine'");
}

inline SplitOptions split_options(const RunConfig& c) {
    SplitOptions s;
    if (c.p_route == "threshold")
        s.source = SplitOptions::Source::threshold;
    else if (c.p_route == "fourier")
        s.source = SplitOptions::Source::fourier;
    else if (c.p_route == "fixed")
        s.source = SplitOptions::Source::fixed;
    else
        detail::fail(ErrorKind::invalid_input, module, "unknown p-route '" + c.p_route + "'");
    s.eps_rel = c.eps_rel;
    s.fourier_cutoff = c.fourier_m;
    s.fourier_eps = c.fourier_eps;
    s.fourier_relative = c.relative;
    s.fixed_p = c.fixed_p;
    return s;
}

inline PipelineConfig pipeline(const RunConfig& c) {
    PipelineConfig p;
    p.kmax = c.kmax;
    p.penalty = PenaltySpec::parse(c.penalty);
    p.d_override = c.d;
    p.split = split_options(c);
    return p;
}

inline SpaceTimePanel load_panel(const RunConfig& c) {
    SpaceTimePanel panel = ingest_panel(c.input);
    if (!c.phi.empty()) panel = with_parametrization(panel, ingest_panel(c.phi));
    return panel;
}

inline Vector iota(Eigen::Index count, double start = 1.0) {
    return Vector::LinSpaced(count, start, start + static_cast<double>(count) - 1.0);
}

inline std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> out;
    for (Eigen::Index i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

/// One column per grid function, first column the grid itself.
inline std::string curves_csv(const std::string& grid_name, const Vector& grid,
                              const std::vector<std::pair<std::string, const Matrix*>>& blocks) {
    Table table;
    table.header.push_back(grid_name);
    table.columns.push_back(grid);
    for (const auto& [prefix, m] : blocks)
        for (Eigen::Index j = 0; j < m->cols(); ++j) {
            table.header.push_back(prefix + std::to_string(j + 1));
            table.columns.push_back(m->col(j));
        }
    return table.to_csv();
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

struct SeedOutput {
    std::map<std::string, std::string> files;
    nlohmann::json summary;
};

inline SeedOutput simulate_one(const RunConfig& c, std::uint64_t seed) {
    SeedOutput out;
    Rng rng(seed);
    const Vector t = uniform_grid(0.0, c.horizon, c.time_points);
    const Vector x = uniform_grid(c.space_start, c.space_end, c.space_points);
    const NoiseSpec noise = c.noise == "sine" ? NoiseSpec::sine_mode() : NoiseSpec::none();
    out.summary["seed"] = seed;
    const auto emit_panel = [&](const std::string& suffix, const SpaceTimePanel& panel, const MultiPath& factors) {
        out.files["panel" + suffix + ".csv"] = panel_to_csv(panel);
        const Matrix phi = panel.phi() ? *panel.phi() : Matrix::Zero(panel.time_points(), panel.space_points());
        out.files["phi" + suffix + ".csv"] = panel_to_csv(panel.t_grid(), panel.x_grid(), phi);
        out.files["factors" + suffix + ".csv"] = path_to_csv(factors);
    };
    if (c.model == "bm" || c.model == "7.1") {
        const SdeModel model = c.model == "bm" ? brownian_model() : model_7_1();
        const MultiPath path = euler_maruyama(model, t, rng);
        out.files["paths.csv"] = path_to_csv(path);
        out.summary["dim"] = path.dim();
    } else if (c.model == "7.1-fdr") {
        const auto sim = simulate_fdr_panel(rng, noise, t, x);
        emit_panel("", sim.panel, sim.factors);
    } else if (c.model == "hjm") {
        const auto sim = simulate_hjm_panel(rng, noise, t, x);
        emit_panel("", sim.panel, sim.factors);
    } else if (c.model == "7.2") {
        const auto sim = models_7_2(rng, t, x);
        emit_panel("_x", sim.x_panel, sim.x_factors);
        emit_panel("_u", sim.u_panel, sim.u_factors);
    } else {
        detail::fail(ErrorKind::invalid_input, module, "unknown model '" + c.model + "'");
    }
    return out;
}

inline void simulate(const RunConfig& c, ResultBundle& bundle) {
    // Each seed gets its own generator and its own output prefix.
    std::vector<std::future<SeedOutput>> jobs;
    for (auto seed : c.seeds) jobs.push_back(std::async(std::launch::async, simulate_one, std::cref(c), seed));
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        SeedOutput one = jobs[i].get();
        const std::string prefix = c.seeds.size() == 1 ? "" : "seed_" + std::to_string(c.seeds[i]) + "/";
        for (auto& [name, text] : one.files) {
            one.summary["files"].push_back(prefix + name);
            bundle.files[prefix + name] = std::move(text);
        }
        runs.push_back(std::move(one.summary));
    }
    bundle.summary["results"]["runs"] = std::move(runs);
}

inline void pca(const RunConfig& c, ResultBundle& bundle) {
    const MultiPath path = ingest_path(c.input);
    const PcaSplit split = pca_split(path, c.eps_rel);
    const Vector eta = explained_qv_ratios(split.eigenvalues);
    const Eigen::Index d = path.dim();
    bundle.files["pca_eigen.csv"] =
        Table{{"component", "eigenvalue", "eta"}, {iota(d), split.eigenvalues, eta}}.to_csv();
    // Row j of the rotation is the j-th eigenvector of [X]_T.
    Table rotation{{"component"}, {iota(d)}};
    for (Eigen::Index k = 0; k < d; ++k) {
        rotation.header.push_back(path.names()[static_cast<std::size_t>(k)]);
        rotation.columns.push_back(split.rotation.col(k));
    }
    bundle.files["rotation.csv"] = rotation.to_csv();
    bundle.files["j_paths.csv"] = path_to_csv(split.j_paths);
    auto& r = bundle.summary["results"];
    r["p_hat"] = split.p_hat;
    r["eps_rel"] = split.eps_rel;
    r["dim"] = d;
    r["eigenvalues"] = to_std(split.eigenvalues);
    r["eta"] = to_std(eta);
    r["w_indices"] = split.w_indices();
    r["d_indices"] = split.d_indices();
    bundle.summary["config"]["eps_rel"] = split.eps_rel;
}

inline void factors(const RunConfig& c, ResultBundle& bundle) {
    const CenteredPanel centered = remove_parametrization(load_panel(c));
    const PcTable table = pc_criterion(centered.panel, c.kmax, PenaltySpec::parse(c.penalty));
    bundle.files["pc_table.csv"] =
        Table{{"k", "V", "PC"}, {iota(c.kmax), table.v.tail(c.kmax), table.pc}}.to_csv();
    const FactorFit fit = extract_factors(centered.panel, table.d_hat);
    bundle.files["factors_y.csv"] =
        path_to_csv(MultiPath(centered.panel.t_grid(), fit.y_hat, numbered("Y", fit.k)));
    bundle.files["loadings_lambda.csv"] = curves_csv("x", centered.panel.x_grid(), {{"lambda", &fit.lambda_hat}});
    auto& r = bundle.summary["results"];
    r["d_hat"] = table.d_hat;
    r["v0"] = table.v[0];
    r["sigma2"] = table.sigma2;
    r["q"] = table.q;
    r["demeaned"] = centered.demeaned;
}

inline nlohmann::json fourier_json(const FourierEstimate& f) {
    nlohmann::json j;
    j["M"] = f.M;
    j["eps"] = f.eps;
    j["relative"] = f.relative;
    j["p_hat_eps"] = f.p_hat_eps;
    j["trace"] = f.trace;
    j["eigenvalues_head"] = to_std(f.eigenvalues.head(std::min<Eigen::Index>(10, f.eigenvalues.size())));
    return j;
}

inline void manifold(const RunConfig& c, ResultBundle& bundle) {
    const SpaceTimePanel raw_grid = load_panel(c);
    const PipelineResult res = estimate_manifold(raw_grid, pipeline(c));
    const ManifoldEstimate& e = res.estimate;
    bundle.files["factors_y.csv"] = path_to_csv(MultiPath(raw_grid.t_grid(), e.fit.y_hat, numbered("Y", e.d_hat)));
    bundle.files["factors_z.csv"] = path_to_csv(MultiPath(raw_grid.t_grid(), e.z_paths, numbered("Z", e.d_hat)));
    bundle.files["loadings.csv"] =
        curves_csv("x", raw_grid.x_grid(), {{"phi", &e.phi_hat}, {"rotated", &e.rotated_loadings}});
    const Matrix& q_basis = e.q_space.vectors;
    const Matrix& n_basis = e.n_space.vectors;
    bundle.files["subspaces.csv"] = curves_csv("x", raw_grid.x_grid(), {{"q", &q_basis}, {"n", &n_basis}});
    const Vector lambda = variance_factor_qv_ratios(e.y_qv);
    const Vector eta = explained_qv_ratios(e.theta);
    bundle.files["qv_explained.csv"] =
        Table{{"k", "lambda_hat", "eta_hat", "theta"}, {iota(e.d_hat), lambda, eta, e.theta}}.to_csv();
    if (res.pc)
        bundle.files["pc_table.csv"] =
            Table{{"k", "V", "PC"}, {iota(c.kmax), res.pc->v.tail(c.kmax), res.pc->pc}}.to_csv();
    auto& r = bundle.summary["results"];
    r["d_hat"] = e.d_hat;
    r["p_hat"] = e.p_hat;
    r["dim_q"] = e.q_space.size();
    r["dim_n"] = e.n_space.size();
    r["theta"] = to_std(e.theta);
    r["hs_energy"] = hs_energy(e.theta);
    r["threshold"] = e.threshold;
    r["residual_increment_energy"] = e.residual_increment_energy;
    r["demeaned"] = res.demeaned;
    if (e.fourier) r["fourier"] = fourier_json(*e.fourier);
    if (c.p_route == "threshold") bundle.summary["config"]["eps_rel"] = e.threshold;
}

inline void qdim(const RunConfig& c, ResultBundle& bundle) {
    const CenteredPanel centered = remove_parametrization(load_panel(c));
    const FourierEstimate f = reduced_operator(centered.panel, c.fourier_m, c.fourier_eps, c.relative);
    bundle.files["fourier_eigen.csv"] =
        Table{{"index", "eigenvalue"}, {iota(f.eigenvalues.size()), f.eigenvalues}}.to_csv();
    const Eigenfunctions ef = eigenfunctions(f);
    bundle.files["eigenfunctions.csv"] = curves_csv("x", centered.panel.x_grid(), {{"f", &ef.functions}});
    auto& r = bundle.summary["results"];
    r = fourier_json(f);
    r["imaginary_share"] = to_std(ef.imaginary_share);
    r["demeaned"] = centered.demeaned;
    bundle.summary["config"]["fourier_m"] = f.M;
    bundle.summary["config"]["fourier_eps"] = f.eps;
}

inline void distance(const RunConfig& c, ResultBundle& bundle) {
    const std::vector<double> d = dynamic_distance(load_panel(c), c.lags, pipeline(c));
    Vector lags(static_cast<Eigen::Index>(c.lags.size()));
    for (std::size_t i = 0; i < c.lags.size(); ++i) lags[static_cast<Eigen::Index>(i)] = c.lags[i];
    bundle.files["distance.csv"] =
        Table{{"lag", "distance"}, {lags, Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()))}}
            .to_csv();
    bundle.summary["results"]["distances"] = d;
}

} // namespace run_detail

inline ResultBundle run(const RunConfig& config) {
    using namespace run_detail;
    const auto start = std::chrono::steady_clock::now();
    validate(config);
    ResultBundle bundle;
    bundle.summary["version"] = version;
    bundle.summary["command"] = config.command;
    bundle.summary["config"] = config_json(config);
    bundle.summary["results"] = nlohmann::json::object();
    if (config.command == "simulate") simulate(config, bundle);
    else if (config.command == "pca") pca(config, bundle);
    else if (config.command == "factors") factors(config, bundle);
    else if (config.command == "manifold") manifold(config, bundle);
    else if (config.command == "qdim") qdim(config, bundle);
    else distance(config, bundle);
    for (const auto& [name, text] : bundle.files) bundle.summary["files"].push_back(name);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    bundle.summary["timings"]["seconds"] = elapsed.count();
    return bundle;
}

inline void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir) {
    for (const auto& [name, text] : bundle.files) io_detail::write_file(dir / name, text);
    io_detail::write_file(dir / "summary.json", bundle.summary.dump(2) + "\n");
}

/// {"error": {"module": ..., "kind": ..., "message": ...}}
inline nlohmann::json error_json(const std::exception& e) {
    nlohmann::json j;
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        j["error"]["module"] = err->module();
        j["error"]["kind"] = to_string(err->kind());
    } else {
        j["error"]["module"] = "cli_io";
        j["error"]["kind"] = "internal";
    }
    j["error"]["message"] = e.what();
    return j;
}

} // namespace qvpca
