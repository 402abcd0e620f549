#include "afrelay/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace afrelay {

const char* to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::optimal:
      return "optimal";
    case SdpStatus::infeasible:
      return "infeasible";
    case SdpStatus::numerical_failure:
      return "numerical-failure";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  const Eigen::Index n = num_variables();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const LmiBlock& blk = blocks[b];
    const std::string where = "sdp block " + std::to_string(b);
    if (blk.constant.rows() != blk.constant.cols() || blk.constant.rows() == 0) {
      throw InvalidInput(where + ": constant matrix must be square and non-empty");
    }
    if (static_cast<Eigen::Index>(blk.coefficients.size()) != n) {
      throw InvalidInput(where + ": expected " + std::to_string(n) + " coefficient matrices");
    }
    auto check = [&](const RealMatrix& m) {
      if (m.rows() != blk.dim() || m.cols() != blk.dim()) {
        throw InvalidInput(where + ": coefficient dimension mismatch");
      }
      const double scale = std::max(1.0, m.norm());
      if ((m - m.transpose()).norm() > 1e-10 * scale) {
        throw InvalidInput(where + ": matrix is not symmetric");
      }
      if (!m.allFinite()) throw InvalidInput(where + ": non-finite entry");
    };
    check(blk.constant);
    for (const auto& m : blk.coefficients) check(m);
  }
  for (const auto& eq : equalities) {
    if (eq.a.size() != n) throw InvalidInput("sdp equality: coefficient length mismatch");
  }
}

namespace {

struct PreparedBlock {
  const LmiBlock* src = nullptr;
  Eigen::Index dim = 0;
  std::vector<Eigen::Index> active;
  // Coefficients with a low-rank form F_i = U_i D_i U_i^T. The factors of all
  // such variables are concatenated column-wise into `u` with the small
  // symmetric D_i placed on the diagonal of `d`.
  std::vector<Eigen::Index> low_rank;
  std::vector<Eigen::Index> start;  // column offsets into u, size low_rank + 1
  RealMatrix u;
  RealMatrix d;
  RealMatrix ud;  // U D
  std::vector<Eigen::Index> dense;
};

// Nonzeros confined to one row and column k: F = a e_k^T + e_k a^T - F_kk e_k e_k^T.
bool arrow_factor(const RealMatrix& f, RealMatrix& u, RealMatrix& d) {
  const Eigen::Index n = f.rows();
  Eigen::Index hub = -1;
  for (Eigen::Index j = 0; j < n && hub < 0; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j && f(i, j) != 0.0) {
        hub = j;
        break;
      }
    }
  }
  if (hub < 0) {
    // Diagonal matrix.
    std::vector<Eigen::Index> nz;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (f(i, i) != 0.0) nz.push_back(i);
    }
    const auto r = static_cast<Eigen::Index>(nz.size());
    if (3 * r > n) return false;
    u = RealMatrix::Zero(n, r);
    d = RealMatrix::Zero(r, r);
    for (Eigen::Index k = 0; k < r; ++k) {
      u(nz[static_cast<std::size_t>(k)], k) = 1.0;
      d(k, k) = f(nz[static_cast<std::size_t>(k)], nz[static_cast<std::size_t>(k)]);
    }
    return true;
  }
  // Column `hub` carries an off-diagonal entry; check everything else is zero.
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == hub) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != hub && f(i, j) != 0.0) return false;
    }
  }
  if (6 > n) return false;
  u = RealMatrix::Zero(n, 2);
  u.col(0) = f.col(hub);
  u(hub, 1) = 1.0;
  d = RealMatrix::Zero(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  d(1, 1) = -f(hub, hub);
  return true;
}

bool eigen_factor(const RealMatrix& f, RealMatrix& u, RealMatrix& d) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(0.5 * (f + f.transpose()));
  const RealVector& lam = eig.eigenvalues();
  const double cut = 1e-13 * lam.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (std::abs(lam(k)) > cut) keep.push_back(k);
  }
  const auto rank = static_cast<Eigen::Index>(keep.size());
  if (3 * rank > f.rows()) return false;
  u.resize(f.rows(), rank);
  d = RealMatrix::Zero(rank, rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    u.col(k) = eig.eigenvectors().col(keep[static_cast<std::size_t>(k)]);
    d(k, k) = lam(keep[static_cast<std::size_t>(k)]);
  }
  return true;
}

PreparedBlock prepare(const LmiBlock& blk) {
  PreparedBlock out;
  out.src = &blk;
  out.dim = blk.dim();
  std::vector<RealMatrix> us;
  std::vector<RealMatrix> ds;
  Eigen::Index total = 0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(blk.coefficients.size()); ++i) {
    const RealMatrix& f = blk.coefficients[static_cast<std::size_t>(i)];
    if (f.cwiseAbs().maxCoeff() == 0.0) continue;
    out.active.push_back(i);
    RealMatrix u;
    RealMatrix d;
    if (arrow_factor(f, u, d) || eigen_factor(f, u, d)) {
      out.low_rank.push_back(i);
      out.start.push_back(total);
      total += u.cols();
      us.push_back(std::move(u));
      ds.push_back(std::move(d));
    } else {
      out.dense.push_back(i);
    }
  }
  out.start.push_back(total);
  out.u.resize(out.dim, total);
  out.d = RealMatrix::Zero(total, total);
  for (std::size_t k = 0; k < us.size(); ++k) {
    const Eigen::Index off = out.start[k];
    const Eigen::Index r = us[k].cols();
    out.u.middleCols(off, r) = us[k];
    out.d.block(off, off, r, r) = ds[k];
  }
  out.ud = out.u * out.d;
  return out;
}

RealMatrix symmetrize(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

RealMatrix affine_value(const PreparedBlock& pb, const RealVector& x) {
  RealMatrix out = pb.src->constant;
  for (Eigen::Index i : pb.active) {
    if (x(i) != 0.0) out += x(i) * pb.src->coefficients[static_cast<std::size_t>(i)];
  }
  return out;
}

RealMatrix linear_value(const PreparedBlock& pb, const RealVector& dx) {
  RealMatrix out = RealMatrix::Zero(pb.dim, pb.dim);
  for (Eigen::Index i : pb.active) {
    if (dx(i) != 0.0) out += dx(i) * pb.src->coefficients[static_cast<std::size_t>(i)];
  }
  return out;
}

// Adds Tr(F_i X) into out(i).
void add_adjoint(const PreparedBlock& pb, const RealMatrix& x, RealVector& out) {
  if (!pb.low_rank.empty()) {
    // Tr(U_k D_k U_k^T X) = sum((X U_k D_k) o U_k)
    const RealMatrix xud = x * pb.ud;
    for (std::size_t k = 0; k < pb.low_rank.size(); ++k) {
      const Eigen::Index off = pb.start[k];
      const Eigen::Index r = pb.start[k + 1] - off;
      out(pb.low_rank[k]) += xud.middleCols(off, r).cwiseProduct(pb.u.middleCols(off, r)).sum();
    }
  }
  for (Eigen::Index i : pb.dense) {
    out(i) += pb.src->coefficients[static_cast<std::size_t>(i)].cwiseProduct(x).sum();
  }
}

// Largest alpha with X + alpha dX >= 0 (infinity if unbounded), given the
// Cholesky factor of X.
double max_step(const Eigen::LLT<RealMatrix>& llt, const RealMatrix& dx) {
  RealMatrix w = dx;
  llt.matrixL().solveInPlace(w);
  w.transposeInPlace();
  llt.matrixL().solveInPlace(w);
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(w, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

bool is_positive_definite(const RealMatrix& m) {
  Eigen::LLT<RealMatrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  return llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-12;
}

struct Direction {
  RealVector dx;
  RealVector dy;
  std::vector<RealMatrix> ds;
  std::vector<RealMatrix> dz;
};

}  // namespace

std::vector<double> lmi_min_eigenvalues(const SdpProblem& problem, const RealVector& x) {
  std::vector<double> out;
  for (const auto& blk : problem.blocks) {
    RealMatrix m = blk.constant;
    for (Eigen::Index i = 0; i < x.size(); ++i) m += x(i) * blk.coefficients[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(symmetrize(m), Eigen::EigenvaluesOnly);
    out.push_back(eig.eigenvalues().minCoeff());
  }
  return out;
}

SdpSolution solve_sdp(const SdpProblem& problem, double gap_tol, int max_iter) {
  SdpSettings s;
  s.gap_tol = gap_tol;
  s.max_iter = max_iter;
  return solve_sdp(problem, s);
}

SdpSolution solve_sdp(const SdpProblem& problem, const SdpSettings& settings) {
  problem.validate();
  const Eigen::Index n = problem.num_variables();
  const auto p = static_cast<Eigen::Index>(problem.equalities.size());
  const RealVector& c = problem.objective;

  std::vector<PreparedBlock> blocks;
  blocks.reserve(problem.blocks.size());
  for (const auto& blk : problem.blocks) blocks.push_back(prepare(blk));
  const std::size_t nb = blocks.size();

  RealMatrix a_eq(p, n);
  RealVector b_eq(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    a_eq.row(k) = problem.equalities[static_cast<std::size_t>(k)].a.transpose();
    b_eq(k) = problem.equalities[static_cast<std::size_t>(k)].b;
  }

  double total_dim = 0.0;
  double f0_norm = 0.0;
  for (const auto& pb : blocks) {
    total_dim += static_cast<double>(pb.dim);
    f0_norm = std::max(f0_norm, pb.src->constant.norm());
  }

  SdpSolution sol;
  sol.x = RealVector::Zero(n);
  if (nb == 0) {
    if (n > 0 && c.cwiseAbs().maxCoeff() > 0.0) {
      sol.status = SdpStatus::numerical_failure;
      return sol;
    }
    sol.status = SdpStatus::optimal;
    return sol;
  }

  // Starting point: F_0 itself when strictly feasible, otherwise a big-M
  // scaled identity (infeasible start).
  RealVector x = RealVector::Zero(n);
  RealVector y = RealVector::Zero(p);
  std::vector<RealMatrix> S(nb);
  std::vector<RealMatrix> Z(nb);
  const double zeta = std::max(1.0, c.size() > 0 ? c.cwiseAbs().maxCoeff() : 1.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& pb = blocks[b];
    if (is_positive_definite(pb.src->constant)) {
      S[b] = pb.src->constant;
    } else {
      double max_entry = pb.src->constant.cwiseAbs().maxCoeff();
      for (Eigen::Index i : pb.active) {
        max_entry = std::max(max_entry, pb.src->coefficients[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff());
      }
      S[b] = std::max(1.0, 1e3 * max_entry) * RealMatrix::Identity(pb.dim, pb.dim);
    }
    Z[b] = zeta * RealMatrix::Identity(pb.dim, pb.dim);
  }

  const double c_norm = c.size() > 0 ? c.norm() : 0.0;
  const double b_norm = p > 0 ? b_eq.norm() : 0.0;
  int small_steps = 0;
  // Degenerate problems can stall with the dual residual hovering just above
  // tolerance; keep the best primal-feasible, gap-closed iterate as a fallback.
  SdpSolution best;
  double best_dinf = std::numeric_limits<double>::infinity();
  auto fail = [&]() {
    if (std::isfinite(best_dinf)) {
      best.status = SdpStatus::optimal;
      best.history = std::move(sol.history);
      return best;
    }
    sol.status = SdpStatus::numerical_failure;
    return sol;
  };

  for (int iter = 0;; ++iter) {
    // Residuals.
    std::vector<RealMatrix> rs(nb);
    double rs_norm2 = 0.0;
    double complementarity = 0.0;
    double f0_dot_z = 0.0;
    RealVector adj_z = RealVector::Zero(n);
    for (std::size_t b = 0; b < nb; ++b) {
      rs[b] = affine_value(blocks[b], x) - S[b];
      rs_norm2 += rs[b].squaredNorm();
      complementarity += Z[b].cwiseProduct(S[b]).sum();
      f0_dot_z += blocks[b].src->constant.cwiseProduct(Z[b]).sum();
      add_adjoint(blocks[b], Z[b], adj_z);
    }
    RealVector rb = b_eq - a_eq * x;
    RealVector cert = adj_z + a_eq.transpose() * y;
    RealVector rd = c - cert;

    const double pobj = c.dot(x);
    const double dobj = -f0_dot_z + b_eq.dot(y);
    const double mu = complementarity / total_dim;
    const double pinf = std::max(std::sqrt(rs_norm2) / (1.0 + f0_norm), rb.norm() / (1.0 + b_norm));
    const double dinf = rd.norm() / (1.0 + c_norm);
    const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

    sol.history.push_back({iter, pobj, dobj, pinf, dinf, mu});
    sol.x = x;
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.duality_gap = rel_gap;
    sol.iterations = iter;
    sol.dual_blocks = Z;

    if (rel_gap <= settings.gap_tol && pinf <= settings.feasibility_tol &&
        dinf <= settings.feasibility_tol) {
      sol.status = SdpStatus::optimal;
      return sol;
    }
    if (rel_gap <= settings.gap_tol && pinf <= settings.feasibility_tol && dinf <= settings.stall_dual_tol &&
        dinf < best_dinf) {
      best_dinf = dinf;
      best = sol;
    }
    // Primal infeasibility certificate: Z >= 0 with F*(Z) + A^T y ~ 0 and a
    // strictly positive dual objective.
    if (dobj > 0.0 && cert.norm() <= 1e-8 * dobj && pinf > settings.feasibility_tol) {
      sol.status = SdpStatus::infeasible;
      return sol;
    }
    if (iter >= settings.max_iter || small_steps >= 3) {
      return fail();
    }

    // Schur complement M_ij = sum_blocks Tr(F_i Z F_j S^{-1}).
    std::vector<RealMatrix> s_inv(nb);
    std::vector<Eigen::LLT<RealMatrix>> s_llt(nb);
    std::vector<Eigen::LLT<RealMatrix>> z_llt(nb);
    RealMatrix schur = RealMatrix::Zero(n, n);
    bool factor_ok = true;
    for (std::size_t b = 0; b < nb && factor_ok; ++b) {
      const auto& pb = blocks[b];
      s_llt[b].compute(S[b]);
      z_llt[b].compute(Z[b]);
      if (s_llt[b].info() != Eigen::Success || z_llt[b].info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      s_inv[b] = symmetrize(s_llt[b].solve(RealMatrix::Identity(pb.dim, pb.dim)));
      // Low-rank pairs: M_ij = sum((D A D)_ij o B_ij), A = U^T Z U, B = U^T S^{-1} U.
      const std::size_t nl = pb.low_rank.size();
      if (nl > 0) {
        const RealMatrix a = pb.ud.transpose() * (Z[b] * pb.ud);
        const RealMatrix bm = pb.u.transpose() * (s_inv[b] * pb.u);
        const RealMatrix h = a.cwiseProduct(bm);
        for (std::size_t k = 0; k < nl; ++k) {
          const Eigen::Index ok = pb.start[k];
          const Eigen::Index rk = pb.start[k + 1] - ok;
          for (std::size_t q = 0; q <= k; ++q) {
            const Eigen::Index oq = pb.start[q];
            const Eigen::Index rq = pb.start[q + 1] - oq;
            const double val = h.block(ok, oq, rk, rq).sum();
            const Eigen::Index i = pb.low_rank[k];
            const Eigen::Index j = pb.low_rank[q];
            schur(i, j) += val;
            if (i != j) schur(j, i) += val;
          }
        }
      }
      // Dense rows against everything: M_ij = Tr(F_j Z F_i S^{-1}).
      for (std::size_t k = 0; k < pb.dense.size(); ++k) {
        const Eigen::Index i = pb.dense[k];
        const RealMatrix g = Z[b] * pb.src->coefficients[static_cast<std::size_t>(i)] * s_inv[b];
        RealVector row = RealVector::Zero(n);
        add_adjoint(pb, g, row);
        for (Eigen::Index j : pb.low_rank) {
          schur(i, j) += row(j);
          schur(j, i) += row(j);
        }
        for (std::size_t q = 0; q <= k; ++q) {
          const Eigen::Index j = pb.dense[q];
          schur(i, j) += row(j);
          if (i != j) schur(j, i) += row(j);
        }
      }
    }
    if (!factor_ok) {
      return fail();
    }

    Eigen::LLT<RealMatrix> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success) {
      const double reg = 1e-13 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      schur.diagonal().array() += reg;
      schur_llt.compute(schur);
      if (schur_llt.info() != Eigen::Success) {
        return fail();
      }
    }
    RealMatrix eq_schur;
    Eigen::LDLT<RealMatrix> eq_ldlt;
    RealMatrix minv_at;
    if (p > 0) {
      minv_at = schur_llt.solve(a_eq.transpose());
      eq_schur = a_eq * minv_at;
      eq_ldlt.compute(eq_schur);
    }

    // Solves for the direction whose complementarity target is
    // K_b = target_b (already includes sigma*mu*S^{-1} - Z - corrections).
    auto solve_direction = [&](const std::vector<RealMatrix>& target) {
      Direction d;
      RealVector rhs = -rd;
      for (std::size_t b = 0; b < nb; ++b) {
        add_adjoint(blocks[b], RealMatrix(target[b] - Z[b] * rs[b] * s_inv[b]), rhs);
      }
      if (p > 0) {
        const RealVector minv_g = schur_llt.solve(rhs);
        d.dy = eq_ldlt.solve(rb - a_eq * minv_g);
        d.dx = minv_g + minv_at * d.dy;
      } else {
        d.dy = RealVector::Zero(0);
        d.dx = schur_llt.solve(rhs);
      }
      d.ds.resize(nb);
      d.dz.resize(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        d.ds[b] = linear_value(blocks[b], d.dx) + rs[b];
        d.dz[b] = target[b] - symmetrize(Z[b] * d.ds[b] * s_inv[b]);
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(s_llt[b], d.ds[b]));
        ad = std::min(ad, max_step(z_llt[b], d.dz[b]));
      }
      ap = std::min(1.0, settings.step_fraction * ap);
      ad = std::min(1.0, settings.step_fraction * ad);
    };

    // Predictor (affine scaling).
    std::vector<RealMatrix> target(nb);
    for (std::size_t b = 0; b < nb; ++b) target[b] = -Z[b];
    Direction pred = solve_direction(target);
    double ap = 0.0;
    double ad = 0.0;
    step_lengths(pred, ap, ad);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      mu_aff += (Z[b] + ad * pred.dz[b]).cwiseProduct(S[b] + ap * pred.ds[b]).sum();
    }
    mu_aff /= total_dim;
    const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
    const double sigma = ratio * ratio * ratio;

    // Corrector.
    for (std::size_t b = 0; b < nb; ++b) {
      target[b] = sigma * mu * s_inv[b] - Z[b] - symmetrize(pred.dz[b] * pred.ds[b] * s_inv[b]);
    }
    Direction corr = solve_direction(target);
    step_lengths(corr, ap, ad);
    if (!corr.dx.allFinite()) {
      return fail();
    }

    x += ap * corr.dx;
    if (p > 0) y += ad * corr.dy;
    for (std::size_t b = 0; b < nb; ++b) {
      S[b] = symmetrize(S[b] + ap * corr.ds[b]);
      Z[b] = symmetrize(Z[b] + ad * corr.dz[b]);
    }
    small_steps = (ap < 1e-9 && ad < 1e-9) ? small_steps + 1 : 0;
  }
}

LmiBlock schur_lmi(const ComplexMatrix& quad_factor, Eigen::Index offset, const AffineScalar& rhs) {
  const Eigen::Index r = quad_factor.rows();
  const Eigen::Index m = quad_factor.cols();
  const Eigen::Index n = rhs.coefficients.size();
  if (offset < 0 || offset + 2 * m > n) {
    throw InvalidInput("schur_lmi: complex variable does not fit in the decision vector");
  }
  const Eigen::Index dim = 2 * r + 1;
  LmiBlock blk;
  blk.constant = RealMatrix::Zero(dim, dim);
  blk.constant.topLeftCorner(2 * r, 2 * r).setIdentity();
  blk.constant(2 * r, 2 * r) = rhs.constant;
  blk.coefficients.assign(static_cast<std::size_t>(n), RealMatrix::Zero(dim, dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    blk.coefficients[static_cast<std::size_t>(i)](2 * r, 2 * r) = rhs.coefficients(i);
  }
  const RealMatrix re = quad_factor.real();
  const RealMatrix im = quad_factor.imag();
  for (Eigen::Index j = 0; j < m; ++j) {
    RealVector col_re(2 * r);  // d(Re z; Im z) / d Re v_j
    col_re << re.col(j), im.col(j);
    RealVector col_im(2 * r);  // d(Re z; Im z) / d Im v_j
    col_im << -im.col(j), re.col(j);
    RealMatrix& fre = blk.coefficients[static_cast<std::size_t>(offset + j)];
    fre.col(2 * r).head(2 * r) += col_re;
    fre.row(2 * r).head(2 * r) += col_re.transpose();
    RealMatrix& fim = blk.coefficients[static_cast<std::size_t>(offset + m + j)];
    fim.col(2 * r).head(2 * r) += col_im;
    fim.row(2 * r).head(2 * r) += col_im.transpose();
  }
  return blk;
}

RealMatrix realify(const ComplexMatrix& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = a.cols();
  RealMatrix out(2 * n, 2 * m);
  out.topLeftCorner(n, m) = a.real();
  out.topRightCorner(n, m) = -a.imag();
  out.bottomLeftCorner(n, m) = a.imag();
  out.bottomRightCorner(n, m) = a.real();
  return out;
}

LmiBlock complex_lmi(const ComplexMatrix& constant, const std::vector<ComplexMatrix>& coefficients) {
  LmiBlock blk;
  blk.constant = realify(0.5 * (constant + constant.adjoint()));
  blk.coefficients.reserve(coefficients.size());
  for (const auto& m : coefficients) {
    if (m.rows() != constant.rows() || m.cols() != constant.cols()) {
      throw InvalidInput("complex_lmi: coefficient dimension mismatch");
    }
    blk.coefficients.push_back(realify(0.5 * (m + m.adjoint())));
  }
  return blk;
}

std::vector<ComplexMatrix> hermitian_basis(Eigen::Index d) {
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(i, i) = 1.0;
    out.push_back(e);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      ComplexMatrix re = ComplexMatrix::Zero(d, d);
      re(i, j) = 1.0;
      re(j, i) = 1.0;
      out.push_back(re);
      ComplexMatrix im = ComplexMatrix::Zero(d, d);
      im(i, j) = Complex(0.0, 1.0);
      im(j, i) = Complex(0.0, -1.0);
      out.push_back(im);
    }
  }
  return out;
}

ComplexMatrix hermitian_from_params(const RealVector& x, Eigen::Index offset, Eigen::Index d) {
  if (offset < 0 || offset + d * d > x.size()) {
    throw InvalidInput("hermitian_from_params: parameter range out of bounds");
  }
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  Eigen::Index k = offset;
  for (Eigen::Index i = 0; i < d; ++i) out(i, i) = x(k++);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const Complex v(x(k), x(k + 1));
      k += 2;
      out(i, j) = v;
      out(j, i) = std::conj(v);
    }
  }
  return out;
}

void write_sdp_text(std::ostream& out, const SdpProblem& problem) {
  const auto n = problem.num_variables();
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << "afrelay-sdp 1\n";
  s << "variables " << n << "\n";
  s << "blocks " << problem.blocks.size();
  for (const auto& blk : problem.blocks) s << ' ' << blk.dim();
  s << "\nequalities " << problem.equalities.size() << "\n";
  s << "objective";
  for (Eigen::Index i = 0; i < n; ++i) s << ' ' << problem.objective(i);
  s << "\n";
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    const LmiBlock& blk = problem.blocks[b];
    for (Eigen::Index mat = 0; mat <= n; ++mat) {
      const RealMatrix& m = mat == 0 ? blk.constant : blk.coefficients[static_cast<std::size_t>(mat - 1)];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i; j < m.cols(); ++j) {
          if (m(i, j) != 0.0) {
            s << mat << ' ' << b + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << m(i, j) << "\n";
          }
        }
      }
    }
  }
  for (std::size_t k = 0; k < problem.equalities.size(); ++k) {
    s << "eq " << k + 1;
    for (Eigen::Index i = 0; i < n; ++i) s << ' ' << problem.equalities[k].a(i);
    s << ' ' << problem.equalities[k].b << "\n";
  }
  out << s.str();
}

SdpProblem read_sdp_text(std::istream& in) {
  auto fail = [](const std::string& msg) { throw InvalidInput("read_sdp_text: " + msg); };
  std::string line;
  std::string word;
  auto next_line = [&](std::istringstream& ls) {
    if (!std::getline(in, line)) fail("unexpected end of input");
    ls = std::istringstream(line);
    ls.imbue(std::locale::classic());
  };
  std::istringstream ls;
  next_line(ls);
  int version = 0;
  if (!(ls >> word >> version) || word != "afrelay-sdp" || version != 1) fail("bad header");
  Eigen::Index n = 0;
  next_line(ls);
  if (!(ls >> word >> n) || word != "variables" || n < 0) fail("bad variables line");
  std::size_t nb = 0;
  next_line(ls);
  if (!(ls >> word >> nb) || word != "blocks") fail("bad blocks line");
  SdpProblem p;
  p.objective = RealVector::Zero(n);
  for (std::size_t b = 0; b < nb; ++b) {
    Eigen::Index d = 0;
    if (!(ls >> d) || d <= 0) fail("bad block dimension");
    LmiBlock blk;
    blk.constant = RealMatrix::Zero(d, d);
    blk.coefficients.assign(static_cast<std::size_t>(n), RealMatrix::Zero(d, d));
    p.blocks.push_back(std::move(blk));
  }
  std::size_t neq = 0;
  next_line(ls);
  if (!(ls >> word >> neq) || word != "equalities") fail("bad equalities line");
  next_line(ls);
  if (!(ls >> word) || word != "objective") fail("bad objective line");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(ls >> p.objective(i))) fail("short objective line");
  }
  p.equalities.resize(neq);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ls = std::istringstream(line);
    ls.imbue(std::locale::classic());
    if (line.rfind("eq", 0) == 0) {
      std::size_t k = 0;
      ls >> word >> k;
      if (k == 0 || k > neq) fail("equality index out of range");
      auto& eq = p.equalities[k - 1];
      eq.a = RealVector::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!(ls >> eq.a(i))) fail("short equality line");
      }
      if (!(ls >> eq.b)) fail("missing equality right-hand side");
      continue;
    }
    Eigen::Index mat = 0;
    std::size_t b = 0;
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    double v = 0.0;
    if (!(ls >> mat >> b >> i >> j >> v)) fail("malformed entry: " + line);
    if (mat < 0 || mat > n || b == 0 || b > nb) fail("entry index out of range");
    LmiBlock& blk = p.blocks[b - 1];
    if (i < 1 || j < 1 || i > blk.dim() || j > blk.dim()) fail("entry position out of range");
    RealMatrix& m = mat == 0 ? blk.constant : blk.coefficients[static_cast<std::size_t>(mat - 1)];
    m(i - 1, j - 1) = v;
    m(j - 1, i - 1) = v;
  }
  return p;
}

}  // namespace afrelay
