#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "rsub/wtfit.hpp"

namespace rsub::states {

struct StateMatrixSet {
  Eigen::MatrixXd T;       // diag(1/tau_i), 1/s
  Eigen::MatrixXd A;       // state-exchange generator, 1/s
  Eigen::MatrixXd D;       // sigma^2 T, m^2/s
  Eigen::VectorXd mu_hat;  // redistribution vector used to build A
  double sigma2 = 0.0;
};

// A = (mu e^T - I) T. With `normalize` (default) mu is rescaled to unit sum
// so that columns of A sum to zero; with normalize = false the published raw
// weights are used as-is and the column-sum deficit is left in place for
// inspection.
StateMatrixSet build_state_matrix(const wtfit::StateParams& sp,
                                  bool normalize = true);

// Unique nonnegative null vector of A with unit 1-norm (bordered solve).
Eigen::VectorXd stationary_distribution(const StateMatrixSet& m);

enum class ReactionKind { annihilation, monomolecular, bimolecular };
enum class RateScaling { model_I, model_II, cross_state, general };

struct ReactionSpec {
  ReactionKind kind = ReactionKind::annihilation;
  RateScaling scaling = RateScaling::model_I;
  double k = 0.0;    // forward
  double ell = 0.0;  // backward
  double theta = 0.5;  // cross-state time-scale split
  Eigen::MatrixXd K_general;  // monomolecular general rates
  Eigen::MatrixXd L_general;
  std::vector<double> K_tensor;  // bimolecular general, index i*N*N + j*N + k
  std::vector<double> L_tensor;
};

struct MonoOps {
  Eigen::MatrixXd K1, K2, L1, L2;  // K1 = diag(K e), K2 = K^T, same for L
};

struct BimolTensors {
  int n = 0;
  std::vector<double> K, L;  // i*n*n + j*n + k
  double kv(int i, int j, int k) const { return K[(i * n + j) * n + k]; }
  double lv(int i, int j, int k) const { return L[(i * n + j) * n + k]; }
};

MonoOps build_reaction_ops(const ReactionSpec& rs, const wtfit::StateParams& sp);
BimolTensors build_bimol_tensors(const ReactionSpec& rs,
                                 const wtfit::StateParams& sp);

struct BlockJacobian {
  Eigen::MatrixXd B;
  std::vector<std::string> species;
  Eigen::VectorXd weights;  // conservation weighting per block row
};

// Linearized generator around equilibrium. Bimolecular requires the
// unnormalized steady concentrations of A and B.
BlockJacobian assemble_jacobian(const ReactionSpec& rs, const StateMatrixSet& m,
                                const wtfit::StateParams& sp,
                                std::optional<std::pair<Eigen::VectorXd,
                                                        Eigen::VectorXd>>
                                    steady = std::nullopt);

struct WVerdict {
  bool pass = false;
  std::string reason;  // empty when pass
};

WVerdict is_w_matrix(const Eigen::MatrixXd& M, double tol = 1e-9);

// Monomolecular equivalent rates from normalized steady vectors.
std::pair<double, double> equivalent_rates(const MonoOps& ops,
                                           const Eigen::VectorXd& u_inf,
                                           const Eigen::VectorXd& v_inf);
// Bimolecular variant.
std::pair<double, double> equivalent_rates(const BimolTensors& tt,
                                           const Eigen::VectorXd& u_inf,
                                           const Eigen::VectorXd& v_inf,
                                           const Eigen::VectorXd& w_inf);

// Long-time macroscopic diffusion coefficient sigma^2 (e^T T s1)/(e^T s1)
// from the dominant eigenvector of (-omega^2 sigma^2 T + A).
double longtime_diffusion_coeff(const StateMatrixSet& m, double omega);

struct KprimeResult {
  std::vector<double> k_of_t;
  double k0 = 0.0;     // e^T K1 u0 / e^T u0
  double k_inf = 0.0;  // -lambda_1(A - K1)
};

KprimeResult kprime_curve(const StateMatrixSet& m, const Eigen::MatrixXd& K1,
                          const Eigen::VectorXd& ubar0,
                          const std::vector<double>& times);

Eigen::VectorXd total_amount_evolution(const StateMatrixSet& m,
                                       const Eigen::MatrixXd& K1,
                                       const Eigen::VectorXd& ubar0, double t);

// Matrix exponential: eigendecomposition when well conditioned, otherwise
// scaling-and-squaring.
Eigen::MatrixXd expm(const Eigen::MatrixXd& M);

}  // namespace rsub::states
