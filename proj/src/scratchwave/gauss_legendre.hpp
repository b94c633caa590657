#pragma once

#include <array>
#include <cmath>

namespace scratchwave {

// Nodes and weights of the N-point Gauss-Legendre rule on [-1, 1], computed
// once by Newton iteration on P_N.
template <int N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    GaussLegendre() {
        for (int i = 0; i < N; ++i) {
            double x = std::cos(3.14159265358979323846 * (i + 0.75) / (N + 0.5));
            double dp = 1.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= N; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[static_cast<size_t>(i)] = x;
            weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    static const GaussLegendre& instance() {
        static const GaussLegendre rule;
        return rule;
    }
};

}  // namespace scratchwave
