#include "rsub/states.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numeric>
#include <queue>

namespace rsub::states {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), (Eigen::Index)v.size());
}

// Dominant eigenpair (max real part) of a real matrix; returns a real
// eigenvector (the dominant eigenvalue is real for the matrices used here).
std::pair<double, Eigen::VectorXd> dominant_eig(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  int best = 0;
  for (int i = 1; i < M.rows(); ++i)
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  Eigen::VectorXcd v = es.eigenvectors().col(best);
  if (std::fabs(es.eigenvalues()[best].imag()) >
      1e-8 * (1.0 + std::fabs(es.eigenvalues()[best].real())))
    throw std::runtime_error("dominant eigenvalue is not real");
  Eigen::VectorXd vr = v.real();
  if (v.imag().norm() > 1e-8 * vr.norm())
    throw std::runtime_error("dominant eigenvector is not real");
  return {es.eigenvalues()[best].real(), vr};
}

bool reachable_all(const Eigen::MatrixXd& M, bool transpose, double tol) {
  const int n = (int)M.rows();
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int j = q.front();
    q.pop();
    for (int i = 0; i < n; ++i) {
      if (i == j || seen[i]) continue;
      const double w = transpose ? M(j, i) : M(i, j);
      if (std::fabs(w) > tol) {
        seen[i] = 1;
        ++count;
        q.push(i);
      }
    }
  }
  return count == n;
}

}  // namespace

StateMatrixSet build_state_matrix(const wtfit::StateParams& sp, bool normalize) {
  require(sp.n_states >= 1, "build_state_matrix: empty StateParams");
  const int n = sp.n_states;
  StateMatrixSet m;
  m.sigma2 = sp.sigma2;
  m.T = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m.T(i, i) = 1.0 / sp.tau_i[i];
  Eigen::VectorXd mu = vec(normalize ? sp.mu_i : sp.raw_weights);
  if (normalize) mu /= mu.sum();
  m.mu_hat = mu;
  m.A = (mu * Eigen::RowVectorXd::Ones(n) - Eigen::MatrixXd::Identity(n, n)) * m.T;
  m.D = sp.sigma2 * m.T;
  return m;
}

Eigen::VectorXd stationary_distribution(const StateMatrixSet& m) {
  const int n = (int)m.A.rows();
  // bordered system [A; e^T] x = [0; 1]
  Eigen::MatrixXd M(n + 1, n);
  M.topRows(n) = m.A;
  M.bottomRows(1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = 1.0;
  Eigen::VectorXd x = M.colPivHouseholderQr().solve(rhs);
  const double resid = (m.A * x).norm();
  if (resid > 1e-8 * m.A.norm() || x.minCoeff() < -1e-10)
    throw std::runtime_error(
        "stationary_distribution: nullspace not one-dimensional nonnegative");
  return x / x.sum();
}

MonoOps build_reaction_ops(const ReactionSpec& rs, const wtfit::StateParams& sp) {
  require(rs.kind != ReactionKind::bimolecular,
          "build_reaction_ops: use build_bimol_tensors for bimolecular");
  const int n = sp.n_states;
  Eigen::MatrixXd K, L;
  switch (rs.scaling) {
    case RateScaling::model_I: {
      K = Eigen::MatrixXd::Zero(n, n);
      L = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        K(i, i) = rs.k / sp.tau_i[i];
        L(i, i) = rs.ell / sp.tau_i[i];
      }
      break;
    }
    case RateScaling::model_II: {
      K = rs.k * Eigen::MatrixXd::Identity(n, n);
      L = rs.ell * Eigen::MatrixXd::Identity(n, n);
      break;
    }
    case RateScaling::general: {
      require(rs.K_general.rows() == n && rs.K_general.cols() == n,
              "build_reaction_ops: K_general dimensions");
      K = rs.K_general;
      L = (rs.L_general.size() > 0) ? rs.L_general
                                    : Eigen::MatrixXd::Zero(n, n).eval();
      require(L.rows() == n && L.cols() == n,
              "build_reaction_ops: L_general dimensions");
      break;
    }
    default:
      throw std::invalid_argument(
          "build_reaction_ops: cross_state applies to bimolecular only");
  }
  require(K.minCoeff() >= 0.0 && L.minCoeff() >= 0.0,
          "build_reaction_ops: negative rates");
  MonoOps ops;
  ops.K1 = K.rowwise().sum().asDiagonal();
  ops.K2 = K.transpose();
  ops.L1 = L.rowwise().sum().asDiagonal();
  ops.L2 = L.transpose();
  return ops;
}

BimolTensors build_bimol_tensors(const ReactionSpec& rs,
                                 const wtfit::StateParams& sp) {
  require(rs.kind == ReactionKind::bimolecular,
          "build_bimol_tensors: bimolecular spec required");
  const int n = sp.n_states;
  BimolTensors t;
  t.n = n;
  t.K.assign((size_t)n * n * n, 0.0);
  t.L.assign((size_t)n * n * n, 0.0);
  auto K = [&](int i, int j, int k) -> double& {
    return t.K[(size_t)(i * n + j) * n + k];
  };
  auto L = [&](int i, int j, int k) -> double& {
    return t.L[(size_t)(i * n + j) * n + k];
  };
  switch (rs.scaling) {
    case RateScaling::model_I:
      for (int i = 0; i < n; ++i) {
        K(i, i, i) = rs.k / sp.tau_i[i];
        L(i, i, i) = rs.ell / sp.tau_i[i];
      }
      break;
    case RateScaling::model_II:
      for (int i = 0; i < n; ++i) {
        K(i, i, i) = rs.k;
        L(i, i, i) = rs.ell;
      }
      break;
    case RateScaling::cross_state:
      // A_i + B_j -> C_k at k (theta/tau_i + (1-theta)/tau_j), every k;
      // C_k -> A_i + B_j at ell/tau_k, every (i,j).
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double rate =
              rs.k * (rs.theta / sp.tau_i[i] + (1.0 - rs.theta) / sp.tau_i[j]);
          for (int k = 0; k < n; ++k) {
            K(i, j, k) = rate;
            L(i, j, k) = rs.ell / sp.tau_i[k];
          }
        }
      break;
    case RateScaling::general:
      require(rs.K_tensor.size() == (size_t)n * n * n &&
                  rs.L_tensor.size() == (size_t)n * n * n,
              "build_bimol_tensors: tensor dimensions");
      t.K = rs.K_tensor;
      t.L = rs.L_tensor;
      break;
  }
  for (double v : t.K) require(v >= 0.0, "build_bimol_tensors: negative K");
  for (double v : t.L) require(v >= 0.0, "build_bimol_tensors: negative L");
  return t;
}

BlockJacobian assemble_jacobian(
    const ReactionSpec& rs, const StateMatrixSet& m,
    const wtfit::StateParams& sp,
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> steady) {
  const int n = (int)m.A.rows();
  BlockJacobian J;
  if (rs.kind == ReactionKind::monomolecular) {
    const MonoOps ops = build_reaction_ops(rs, sp);
    J.B.resize(2 * n, 2 * n);
    J.B.topLeftCorner(n, n) = m.A - ops.K1;
    J.B.topRightCorner(n, n) = ops.L2;
    J.B.bottomLeftCorner(n, n) = ops.K2;
    J.B.bottomRightCorner(n, n) = m.A - ops.L1;
    J.species = {"A", "B"};
    J.weights = Eigen::VectorXd::Ones(2 * n);
    return J;
  }
  if (rs.kind == ReactionKind::annihilation) {
    const MonoOps ops = build_reaction_ops(rs, sp);
    J.B = m.A - ops.K1;
    J.species = {"A"};
    J.weights = Eigen::VectorXd::Ones(n);
    return J;
  }
  require(steady.has_value(),
          "assemble_jacobian: bimolecular requires steady vectors");
  const BimolTensors t = build_bimol_tensors(rs, sp);
  const Eigen::VectorXd& u = steady->first;
  const Eigen::VectorXd& v = steady->second;
  Eigen::MatrixXd K11 = Eigen::MatrixXd::Zero(n, n), K22 = K11, K12 = K11,
                  K21 = K11, K31 = K11, K32 = K11, L1 = K11, L2 = K11,
                  L3 = K11;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        K11(i, i) += t.kv(i, j, k) * v[j];
        K22(i, i) += t.kv(j, i, k) * u[j];
        L3(i, i) += t.lv(j, k, i);
        L1(i, j) += t.lv(i, k, j);
        L2(i, j) += t.lv(k, i, j);
        K12(i, j) += t.kv(i, j, k) * u[i];
        K21(i, j) += t.kv(j, i, k) * v[i];
        K32(i, j) += t.kv(k, j, i) * u[k];
        K31(i, j) += t.kv(j, k, i) * v[k];
      }
  J.B.resize(3 * n, 3 * n);
  J.B.block(0, 0, n, n) = m.A - K11;
  J.B.block(0, n, n, n) = -K12;
  J.B.block(0, 2 * n, n, n) = L1;
  J.B.block(n, 0, n, n) = -K21;
  J.B.block(n, n, n, n) = m.A - K22;
  J.B.block(n, 2 * n, n, n) = L2;
  J.B.block(2 * n, 0, n, n) = K31;
  J.B.block(2 * n, n, n, n) = K32;
  J.B.block(2 * n, 2 * n, n, n) = m.A - L3;
  J.species = {"A", "B", "C"};
  J.weights.resize(3 * n);
  J.weights.head(2 * n).setOnes();
  J.weights.tail(n).setConstant(2.0);  // each C counts twice
  return J;
}

WVerdict is_w_matrix(const Eigen::MatrixXd& M, double tol) {
  require(M.rows() == M.cols(), "is_w_matrix: square matrix required");
  const int n = (int)M.rows();
  const double scale = std::max(M.cwiseAbs().maxCoeff(), 1.0);
  for (int j = 0; j < n; ++j) {
    if (std::fabs(M.col(j).sum()) > tol * scale)
      return {false, "column sums are not zero"};
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && M(i, j) < -tol * scale)
        return {false, "negative off-diagonal entries"};
  if (!reachable_all(M, false, tol * scale) || !reachable_all(M, true, tol * scale))
    return {false, "off-diagonal support graph is not strongly connected"};
  return {true, ""};
}

std::pair<double, double> equivalent_rates(const MonoOps& ops,
                                           const Eigen::VectorXd& u_inf,
                                           const Eigen::VectorXd& v_inf) {
  const double keq = (ops.K1 * u_inf).sum();
  const double leq = (ops.L1 * v_inf).sum();
  return {keq, leq};
}

std::pair<double, double> equivalent_rates(const BimolTensors& t,
                                           const Eigen::VectorXd& u_inf,
                                           const Eigen::VectorXd& v_inf,
                                           const Eigen::VectorXd& w_inf) {
  double keq = 0.0, leq = 0.0;
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j)
      for (int k = 0; k < t.n; ++k) {
        keq += t.kv(i, j, k) * u_inf[i] * v_inf[j];
        leq += t.lv(i, j, k) * w_inf[k];
      }
  return {keq, leq};
}

double longtime_diffusion_coeff(const StateMatrixSet& m, double omega) {
  require(omega > 0.0, "longtime_diffusion_coeff: omega > 0");
  const Eigen::MatrixXd M = -omega * omega * m.sigma2 * m.T + m.A;
  auto [lam, s1] = dominant_eig(M);
  (void)lam;
  const double denom = s1.sum();
  if (std::fabs(denom) < 1e-14 * s1.norm())
    throw std::runtime_error("longtime_diffusion_coeff: defective eigenvector");
  return m.sigma2 * (m.T * s1).sum() / denom;
}

KprimeResult kprime_curve(const StateMatrixSet& m, const Eigen::MatrixXd& K1,
                          const Eigen::VectorXd& ubar0,
                          const std::vector<double>& times) {
  KprimeResult r;
  const Eigen::MatrixXd M = m.A - K1;
  r.k0 = (K1 * ubar0).sum() / ubar0.sum();
  r.k_inf = -dominant_eig(M).first;
  for (double t : times) {
    const Eigen::VectorXd u = expm(M * t) * ubar0;
    r.k_of_t.push_back((K1 * u).sum() / u.sum());
  }
  return r;
}

Eigen::VectorXd total_amount_evolution(const StateMatrixSet& m,
                                       const Eigen::MatrixXd& K1,
                                       const Eigen::VectorXd& ubar0, double t) {
  require(t >= 0.0, "total_amount_evolution: t >= 0");
  return expm((m.A - K1) * t) * ubar0;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  const Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(V);
  if (lu.isInvertible()) {
    const double cond = V.norm() * lu.inverse().norm();
    if (cond < 1e8) {
      Eigen::VectorXcd e = es.eigenvalues().array().exp();
      Eigen::MatrixXcd R = V * e.asDiagonal() * lu.inverse();
      return R.real();
    }
  }
  return M.exp();  // scaling-and-squaring fallback
}

}  // namespace rsub::states
