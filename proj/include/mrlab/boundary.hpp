#pragma once

// Boundary triples (A_m, G, K) on an extended grid. Domains are realized by
// eliminating ghost unknowns with exact algebraic constraints, so the
// resolvent identities relating A, the perturbed generator, the Dirichlet
// operators and the control matrix hold to roundoff.

#include <string>
#include <vector>

#include "mrlab/linalg.hpp"
#include "mrlab/semigroup.hpp"

namespace mrlab {

struct BoundaryDescription {
  std::string label;
  CMatrix am;             // n_state x n_ext: the maximal operator A_m
  CMatrix g;              // m x n_ext
  CMatrix k;              // m x n_ext
  CMatrix z_constraints;  // c x n_ext: conditions that define Z itself
  std::vector<Index> state_index;  // state node positions inside the extended vector
  std::vector<double> weights;     // spatial quadrature weights on the state grid
};

enum class Domain { Free, Perturbed };  // ker G  or  {Gx = Kx}

struct DirichletOp {
  cplx lambda;
  CMatrix D;  // n_state x m
  double interior_residual = 0.0;
  double constraint_residual = 0.0;
};

struct ControlVector {
  cplx lambda_build;
  CMatrix B;  // n_state x m
  double consistency_residual = 0.0;  // max over checks of |R(mu, A) B - D_mu| / |D_mu|
};

class BoundarySystem {
 public:
  explicit BoundarySystem(BoundaryDescription d);

  const std::string& label() const { return d_.label; }
  Index n_ext() const { return d_.am.cols(); }
  Index n_state() const { return d_.am.rows(); }
  Index m() const { return d_.g.rows(); }
  const CMatrix& am_ext() const { return d_.am; }
  const CMatrix& g() const { return d_.g; }
  const CMatrix& k() const { return d_.k; }
  const CMatrix& z_constraints() const { return d_.z_constraints; }
  const std::vector<double>& weights() const { return d_.weights; }
  const std::vector<Index>& state_index() const { return d_.state_index; }
  const std::vector<Index>& ghost_index() const { return ghost_; }

  /// Same operator and G, different boundary perturbation K.
  BoundarySystem with_k(const CMatrix& k) const;

  CMatrix restrict(const CMatrix& x_ext) const;
  /// Ghost values reconstructed from state values for the given domain.
  CMatrix ghost_map(Domain dom) const;
  CMatrix extend(const CMatrix& x_state, Domain dom) const;

  Generator realize_A() const;
  Generator realize_perturbed() const;

  /// K expressed on the state grid through the perturbed ghost map.
  CMatrix k_state() const;

  DirichletOp dirichlet(cplx lambda) const;
  ControlVector control_vector(cplx lambda) const;

 private:
  CMatrix eliminate(Domain dom) const;
  CMatrix generator_matrix(Domain dom) const;

  BoundaryDescription d_;
  std::vector<Index> ghost_;
  CMatrix am_state_;  // columns of A_m on state nodes
  CMatrix am_ghost_;  // columns of A_m on ghost nodes
  CMatrix ghost_free_;
  CMatrix ghost_pert_;
  CMatrix a_free_;
  CMatrix a_pert_;
  double a_norm1_ = 0.0;
};

struct ResolventIdentityReport {
  cplx lambda;
  double thm32_iv = 0.0;       // |R(l, A_pert) - (I - D_l K)^{-1} R(l, A)| / |R(l, A_pert)|
  double sv_perturbed = 0.0;   // smallest singular value of l - A_pert
  double sv_feedback = 0.0;    // smallest singular value of I - K D_l
  bool feedback_obstruction = false;
  double generator_eq = 0.0;   // |A_pert - (A + B_l K)| / |A_pert|
};

ResolventIdentityReport resolvent_identity_check(const BoundarySystem& bs, cplx lambda);

/// Pearson correlation between log sv(l - A_pert) and log sv(I - K D_l)
/// over a lambda grid: both detect l in sigma(A_pert).
double singularity_detector_correlation(const BoundarySystem& bs, const std::vector<cplx>& grid);

/// |(A + B_1 K) - (A + B_2 K)| / |A_pert| for control matrices built at two
/// different lambdas.
double generator_lambda_independence(const BoundarySystem& bs, cplx l1, cplx l2);

}  // namespace mrlab
