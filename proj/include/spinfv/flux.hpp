#ifndef SPINFV_FLUX_HPP
#define SPINFV_FLUX_HPP

#include <array>
#include <utility>

#include "spinfv/geometry.hpp"

namespace spinfv {

// B(x) = x / (e^x - 1), B(0) = 1. Accurate to ~1e-13 relative across
// |x| <= 700; large arguments use the e^{-x} form to avoid overflow.
double bernoulli(double x);

// B^s(x) = (x/2) coth(x/2) = (B(x) + B(-x)) / 2 >= 1, even in x.
double bernoulli_sym(double x);

// dB/dx, with a series branch near the removable singularity.
double bernoulli_deriv(double x);

// Scharfetter-Gummel edge flux tau * (B(dV) n_K - B(-dV) n_{K,sigma}).
double sg_edge_flux(double n_k, double n_ksig, double dv, double tau);

// d(sg_edge_flux)/d(n_K, n_{K,sigma}, dV).
struct SgFluxDeriv {
    double d_nk = 0.0;
    double d_nksig = 0.0;
    double d_dv = 0.0;
};
SgFluxDeriv sg_edge_flux_deriv(double n_k, double n_ksig, double dv, double tau);

// Charge/spin coupling on an edge:
//   j0 = (D/eta^2) (J0 - 2 p J.m)
//   j  = (D/eta^2) (eta J + (1-eta)(J.m) m - (p/2) J0 m)
std::pair<double, Vec3> spin_combine(double J0, Vec3 J, double D_sigma,
                                     double p_sigma, double eta_sigma, Vec3 m_sigma);

// The same coupling as a 4x4 matrix acting on (J0, J1, J2, J3).
std::array<std::array<double, 4>, 4> spin_mix_matrix(double D_sigma, double p_sigma,
                                                     double eta_sigma, Vec3 m_sigma);

} // namespace spinfv

#endif
