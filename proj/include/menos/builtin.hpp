#pragma once

#include "menos/model.hpp"

#include <Eigen/Dense>

#include <optional>

namespace menos {

// rho = 1/2 [[1, e^{-i phi - Delta}], [e^{i phi - Delta}, 1]]; parameters (phi, Delta), Delta > 0.
StatisticalModel qubit_phase_dephasing();

// Projectors onto |+-x>, |+-y>, each weighted 1/2.
Povm separable_povm();

// Psi+, Psi-, Phi+, Phi- on two qubits (basis |00>, |01>, |10>, |11>).
Povm bell_povm();

// Hermite-Gauss modes centred at x_m: Phi_n(u) = (2 pi)^{-1/4} H_n(u / sqrt 2) e^{-u^2/4},
// u = x - x_m, with ||Phi_n||^2 = 2^n n!. The PSF is Phi_0 centred at the source.

// <Phi_n / ||Phi_n|| | psi_{x0}> by adaptive Gauss-Kronrod quadrature.
double hg_overlap(int n, double x0, double x_m = 0.0);
// e^{-d^2/8} (d/2)^n / sqrt(n!), d = x0 - x_m.
double hg_overlap_closed_form(int n, double x0, double x_m = 0.0);
// ||Phi_n||^2 by quadrature.
double hg_norm_squared(int n);
// Gram matrix of the normalized modes 0..n_max by quadrature.
RMatrix hg_gram(int n_max);

struct PointSourceConfig {
  int n_max = 20;
  std::optional<double> x_m;  // mode centre; x_opt(theta) when unset
};

// x_c + (q - 1/2) dx
double x_opt(double x_c, double dx, double q);
double x_opt(const ParamPoint& theta);

// Two incoherent point sources: rho = q |psi_+><psi_+| + (1 - q) |psi_-><psi_-|,
// psi_+- at x_c +- dx/2, in the first n_max + 1 modes. Parameters (x_c, dx, q).
// x_m stays fixed under differentiation; cfg.x_m must be set.
StatisticalModel point_source_model(const PointSourceConfig& cfg);
// Same, with x_m = cfg.x_m or x_opt(theta).
StatisticalModel point_source_model_at(const PointSourceConfig& cfg, const ParamPoint& theta);

// Rows: weights of v_j over Phi_0..Phi_3 for the four projective outcomes.
Eigen::Matrix4d optimal_weight_matrix();
// max |W W^T - I|
double weight_orthonormality_residual(const Eigen::Matrix4d& w);

// M_j = v_j v_j^T (j < 4), M_4 = I - sum_j M_j. ConstructionError when M_4 is not PSD.
Povm optimal_povm_point_sources(const PointSourceConfig& cfg);
Povm optimal_povm_point_sources(const PointSourceConfig& cfg, const Eigen::Matrix4d& w);

}  // namespace menos
