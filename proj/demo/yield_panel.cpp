// Two-step manifold estimation on a curve panel read from CSV.
//
//   demo_yield_panel panel.csv [kmax]
//
// Without phi samples the time mean of each maturity is removed first.
// Prints the PC(k) table, the QV explained by the rotated factors and the
// Fourier estimate of dim Q.

#include <qvpca/qvpca.hpp>

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s panel.csv [kmax]\n", argv[0]);
        return 2;
    }
    try {
        const auto panel = qvpca::ingest_panel(argv[1]);
        qvpca::PipelineConfig config;
        if (argc > 2) config.kmax = std::atoi(argv[2]);
        config.split.source = qvpca::SplitOptions::Source::fourier;
        const auto result = qvpca::estimate_manifold(panel, config);
        const auto& e = result.estimate;

        std::printf("%ld times x %ld maturities%s\n", static_cast<long>(panel.time_points()),
                    static_cast<long>(panel.space_points()), result.demeaned ? " (demeaned)" : "");
        std::printf("\n  k          V(k)         PC(k)\n");
        for (int k = 1; k <= result.pc->kmax; ++k)
            std::printf("%3d  %12.6g  %12.6g%s\n", k, result.pc->v[k], result.pc->pc[k - 1],
                        k == e.d_hat ? "  <" : "");

        const qvpca::Vector lambda = qvpca::variance_factor_qv_ratios(e.y_qv);
        const qvpca::Vector eta = qvpca::explained_qv_ratios(e.theta);
        std::printf("\n  k  lambda_hat  eta_hat\n");
        for (int k = 0; k < e.d_hat; ++k) std::printf("%3d  %10.4f  %7.4f\n", k + 1, lambda[k], eta[k]);

        std::printf("\nFourier: M = %d, eps = %.4g, p_hat = %d\n", e.fourier->M, e.fourier->eps, e.fourier->p_hat_eps);
        std::printf("dim Q = %ld, dim N = %ld\n", static_cast<long>(e.q_space.size()),
                    static_cast<long>(e.n_space.size()));
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "%s\n", ex.what());
        return 1;
    }
    return 0;
}
