// Exact moments of the cross-polytope and of one random symmetric polytope.

#include "isohull/isohull.hpp"

#include <cstdio>

int main()
{
    using namespace isohull;

    for (std::size_t n = 2; n <= 6; ++n) {
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < n; ++i) {
            Vector e(n, 0.0);
            e[i] = 1.0;
            pts.push_back(e);
        }
        const auto fc = symmetric_hull(PointCloud::from_points(n, pts));
        const auto mom = summarize_moments(fc);
        const auto iso = isotropy_constant(mom);
        std::printf("cross-polytope n=%zu  facets=%zu  volume=%.6f  mean_square=%.6f  L_K=%.6f\n", n, fc.facets.size(),
                    mom.volume, mom.mean_square, iso.l_k);
    }

    const auto cloud = sample_symmetric_cloud(5, 15, 42);
    const auto fc = symmetric_hull(cloud);
    const auto mom = summarize_moments(fc);
    const auto iso = isotropy_constant(mom);
    std::printf("random n=5 m=15  facets=%zu  inradius=%.4f  L_K=%.6f  identity bound=%.6f\n", fc.facets.size(),
                inradius(fc), iso.l_k, iso.identity_bound);

    const auto est = mc_moment_oracle(fc, 100000, 7);
    std::printf("Monte Carlo: volume %.5f +- %.5f (exact %.5f)\n", *est.volume, *est.volume_se, mom.volume);
    return 0;
}
