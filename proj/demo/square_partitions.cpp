// Optimal k-partitions of the unit square for k = 1..4, next to the
// corresponding Dirichlet eigenvalues.

#include "minpart/minpart.hpp"

#include <cstdio>

int main() {
    using namespace minpart;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    DomainSpec square;
    square.n = 32;
    const auto levels = build_levels(square, 2);
    const auto spec = solve_eigen(levels.back(), 0.0, 4);
    std::printf(" k   Lambda/pi^2   lambda_k/pi^2   gap       bipartite\n");
    for (int k = 1; k <= 4; ++k) {
        const Partition p = optimize_multilevel(levels, k);
        const bool bip = is_bipartite(partition_graph(p.labeling)).bipartite;
        std::printf("%2d   %10.5f    %10.5f      %.2e  %s\n", k, p.objective / pi2, spec.pairs[k - 1].value / pi2,
                    equalization_gap(p), bip ? "yes" : "no");
    }
}
