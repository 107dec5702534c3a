// qvpca: command-line front end.
//
//   qvpca simulate --model 7.1 --n 2000 --seed 7 --out run1
//   qvpca pca --input run1/paths.csv --out run1/pca
//   qvpca manifold --input panel.csv --phi phi.csv --p-route fourier
//   qvpca distance --input panel.csv --lags 5:250:5
//
// Every option may also come from a key=value file given with --config.

#include <qvpca/run.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <iostream>

namespace {

std::vector<int> parse_lags(const std::string& text) {
    const auto to_int = [&](std::string_view s) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
            qvpca::detail::fail(qvpca::ErrorKind::parse, "cli_io", "bad lag '" + std::string(s) + "'");
        return v;
    };
    std::vector<int> out;
    if (text.find(':') != std::string::npos) {
        std::vector<int> parts;
        std::size_t start = 0;
        while (true) {
            const auto colon = text.find(':', start);
            parts.push_back(to_int(std::string_view(text).substr(start, colon - start)));
            if (colon == std::string::npos) break;
            start = colon + 1;
        }
        if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0])
            qvpca::detail::fail(qvpca::ErrorKind::parse, "cli_io", "lag range must be start:end:step");
        for (int k = parts[0]; k <= parts[1]; k += parts[2]) out.push_back(k);
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(to_int(std::string_view(text).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    qvpca::RunConfig config;
    std::string lags = "0";
    std::optional<double> eps_rel, fourier_eps;
    std::optional<int> d, fourier_m;

    CLI::App app{"Quadratic-variation PCA and invariant-manifold estimation"};
    app.set_config("--config", "", "key=value configuration file");
    app.add_option("command", config.command, "simulate | pca | factors | manifold | qdim | distance")
        ->required()
        ->check(CLI::IsMember({"simulate", "pca", "factors", "manifold", "qdim", "distance"}));
    app.add_option("--seed", config.seeds, "seed, or several seeds separated by commas")->delimiter(',');
    app.add_option("--model", config.model, "bm | 7.1 | 7.1-fdr | hjm | 7.2");
    app.add_option("--input", config.input, "input CSV (paths for pca, panel otherwise)");
    app.add_option("--phi", config.phi, "parametrization samples in panel layout");
    app.add_option("--n", config.time_points, "number of time points");
    app.add_option("--grid-points", config.space_points, "number of space grid points");
    app.add_option("--horizon", config.horizon, "time horizon T");
    app.add_option("--space-start", config.space_start, "left end of the space interval");
    app.add_option("--space-end", config.space_end, "right end of the space interval");
    app.add_option("--noise", config.noise, "none | sine");
    app.add_option("--kmax", config.kmax, "largest factor count tried by PC(k)");
    app.add_option("--penalty", config.penalty, "p1 | p2 | p3");
    app.add_option("--eps-rel", eps_rel, "relative rank threshold");
    app.add_option("--p-route", config.p_route, "threshold | fourier | fixed");
    app.add_option("--p", config.fixed_p, "dimension of Q for --p-route fixed");
    app.add_option("--d", d, "number of factors, skipping PC(k)");
    app.add_option("--M", fourier_m, "Fourier cutoff");
    app.add_option("--eps", fourier_eps, "Fourier eigenvalue threshold");
    app.add_flag("--relative", config.relative, "Fourier threshold relative to the trace");
    app.add_option("--lags", lags, "lags as a,b,c or start:end:step");
    app.add_option("--out", config.output, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        config.eps_rel = eps_rel;
        config.fourier_eps = fourier_eps;
        config.d = d;
        config.fourier_m = fourier_m;
        config.lags = parse_lags(lags);
        const qvpca::ResultBundle bundle = qvpca::run(config);
        qvpca::write_bundle(bundle, config.output);
        std::cout << bundle.summary["results"].dump() << "\n";
    } catch (const std::exception& e) {
        std::cerr << qvpca::error_json(e).dump() << "\n";
        return 1;
    }
    return 0;
}
