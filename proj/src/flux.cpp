#include "spinfv/flux.hpp"

#include <cmath>
#include <stdexcept>

namespace spinfv {

namespace {
// Branch points: below kSeries the direct quotient loses accuracy at the
// removable singularity, above kLarge exp(x) would overflow.
constexpr double kSeries = 1e-4;
constexpr double kLarge = 700.0;
} // namespace

double bernoulli(double x) {
    const double ax = std::abs(x);
    if (ax < kSeries) {
        // x/(e^x - 1) = 1 - x/2 + x^2/12 - x^4/720 + x^6/30240 - ...
        const double x2 = x * x;
        return 1.0 - 0.5 * x + x2 * (1.0 / 12.0) - x2 * x2 * (1.0 / 720.0) +
               x2 * x2 * x2 * (1.0 / 30240.0);
    }
    if (x > kLarge) {
        const double e = std::exp(-x);
        return x * e / (1.0 - e);
    }
    return x / std::expm1(x);
}

double bernoulli_sym(double x) {
    // B(x) + x/2 evaluated at |x| so that symmetry is exact.
    const double ax = std::abs(x);
    return bernoulli(ax) + 0.5 * ax;
}

double bernoulli_deriv(double x) {
    const double ax = std::abs(x);
    if (ax < kSeries) {
        // B'(x) = -1/2 + x/6 - x^3/180 + x^5/5040 - ...
        return -0.5 + x / 6.0 - x * x * x / 180.0;
    }
    if (x > kLarge) {
        const double e = std::exp(-x);
        const double d = 1.0 - e;
        return (e * (1.0 - x) - e * e) / (d * d);
    }
    const double u = std::expm1(x);
    return (u - x * (u + 1.0)) / (u * u);
}

double sg_edge_flux(double n_k, double n_ksig, double dv, double tau) {
    return tau * (bernoulli(dv) * n_k - bernoulli(-dv) * n_ksig);
}

SgFluxDeriv sg_edge_flux_deriv(double n_k, double n_ksig, double dv, double tau) {
    SgFluxDeriv d;
    d.d_nk = tau * bernoulli(dv);
    d.d_nksig = -tau * bernoulli(-dv);
    d.d_dv = tau * (bernoulli_deriv(dv) * n_k + bernoulli_deriv(-dv) * n_ksig);
    return d;
}

std::pair<double, Vec3> spin_combine(double J0, Vec3 J, double D_sigma,
                                     double p_sigma, double eta_sigma, Vec3 m_sigma) {
    if (p_sigma >= 1.0)
        throw std::invalid_argument("spin_combine: p_sigma must be < 1");
    const double f = D_sigma / (eta_sigma * eta_sigma);
    const double jm = dot(J, m_sigma);
    const double j0 = f * (J0 - 2.0 * p_sigma * jm);
    const Vec3 j = f * (eta_sigma * J + ((1.0 - eta_sigma) * jm - 0.5 * p_sigma * J0) * m_sigma);
    return {j0, j};
}

std::array<std::array<double, 4>, 4> spin_mix_matrix(double D_sigma, double p_sigma,
                                                     double eta_sigma, Vec3 m_sigma) {
    if (p_sigma >= 1.0)
        throw std::invalid_argument("spin_mix_matrix: p_sigma must be < 1");
    const double f = D_sigma / (eta_sigma * eta_sigma);
    std::array<std::array<double, 4>, 4> s{};
    s[0][0] = f;
    for (int l = 0; l < 3; ++l) {
        s[0][l + 1] = -2.0 * f * p_sigma * m_sigma[l];
        s[l + 1][0] = -0.5 * f * p_sigma * m_sigma[l];
        for (int q = 0; q < 3; ++q)
            s[l + 1][q + 1] = f * ((l == q ? eta_sigma : 0.0) +
                                   (1.0 - eta_sigma) * m_sigma[l] * m_sigma[q]);
    }
    return s;
}

} // namespace spinfv
