// Variance ranking versus QV ranking on the two-factor models X and U.
//
// Both panels share one Brownian path B and the loadings lambda_1, lambda_2.
// In U the deterministic factor sin(3t) - B carries most of the variance but
// none of the quadratic variation, so the variance-leading factor says little
// about the volatility of the curve.

#include <qvpca/qvpca.hpp>

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    qvpca::Rng rng(seed);
    const auto models = qvpca::models_7_2(rng);

    for (const auto& [name, panel] : {std::pair{"X", &models.x_panel}, std::pair{"U", &models.u_panel}}) {
        qvpca::PipelineConfig config;
        config.d_override = 2;
        const auto result = qvpca::estimate_manifold(*panel, config);
        const auto& e = result.estimate;
        const qvpca::Vector lambda = qvpca::variance_factor_qv_ratios(e.y_qv);
        const qvpca::Vector eta = qvpca::explained_qv_ratios(e.theta);
        std::printf("model %s\n", name);
        std::printf("  k  lambda_hat  eta_hat\n");
        for (int k = 0; k < 2; ++k) std::printf("  %d  %10.4f  %7.4f\n", k + 1, lambda[k], eta[k]);
    }
    return 0;
}
