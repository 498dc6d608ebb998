#include "greenbf/socp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace greenbf::socp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kGamma = 0.99;        // step shrink after line search
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 0.9999;
constexpr double kStepMin = 1e-6;
constexpr double kStepMax = 0.999;
constexpr double kSafeguard = 500.0;   // primal-residual blowup factor
constexpr double kDeltaStat = 1e-9;    // static KKT regularization
constexpr double kFeasTolInacc = 1e-4;
constexpr double kAbsTolInacc = 5e-5;
constexpr double kRelTolInacc = 5e-5;
constexpr int kRefineRounds = 2;

struct BlockRef {
  ConeKind kind;
  int offset;
  int size;
};

std::vector<BlockRef> block_refs(const ConeSpec& spec) {
  std::vector<BlockRef> refs;
  refs.reserve(spec.blocks.size());
  int off = 0;
  for (const ConeBlock& b : spec.blocks) {
    refs.push_back({b.kind, off, b.size});
    off += b.size;
  }
  return refs;
}

/// s = r shifted into the strict interior of the cone.
VectorXd bring_to_cone(const std::vector<BlockRef>& blocks, const VectorXd& r) {
  double alpha = -kGamma;
  for (const BlockRef& b : blocks) {
    if (b.kind == ConeKind::NonNeg) {
      for (int i = 0; i < b.size; ++i) {
        const double v = r(b.offset + i);
        if (v <= 0.0 && -v > alpha) alpha = -v;
      }
    } else {
      const double cres = r(b.offset) - r.segment(b.offset + 1, b.size - 1).norm();
      if (cres <= 0.0 && -cres > alpha) alpha = -cres;
    }
  }
  alpha += 1.0;
  VectorXd s = r;
  for (const BlockRef& b : blocks) {
    if (b.kind == ConeKind::NonNeg) {
      s.segment(b.offset, b.size).array() += alpha;
    } else {
      s(b.offset) += alpha;
    }
  }
  return s;
}

/// Nesterov-Todd scaling state. For each nonneg row, w = sqrt(s/z). For each
/// second-order cone, the normalized scaling point wbar = (a, q) with
/// a^2 - ||q||^2 = 1 and the magnitude eta, so that W = eta * H(wbar).
struct Scaling {
  struct Block {
    ConeKind kind;
    int offset;
    int size;
    VectorXd w;      // NonNeg only
    double eta = 1.0;
    double eta2 = 1.0;
    double a = 1.0;
    VectorXd q;      // SOC only, zero for the identity scaling
  };
  std::vector<Block> blocks;

  static Scaling identity(const std::vector<BlockRef>& refs) {
    Scaling sc;
    for (const BlockRef& r : refs) {
      Block b;
      b.kind = r.kind;
      b.offset = r.offset;
      b.size = r.size;
      if (r.kind == ConeKind::NonNeg) {
        b.w = VectorXd::Ones(r.size);
      } else {
        b.q = VectorXd::Zero(r.size - 1);
      }
      sc.blocks.push_back(std::move(b));
    }
    return sc;
  }

  /// Recompute from a strictly interior (s, z) pair; false when either
  /// vector has left the cone interior.
  bool update(const VectorXd& s, const VectorXd& z) {
    for (Block& b : blocks) {
      if (b.kind == ConeKind::NonNeg) {
        for (int i = 0; i < b.size; ++i) {
          const double si = s(b.offset + i);
          const double zi = z(b.offset + i);
          if (si <= 0.0 || zi <= 0.0) return false;
          b.w(i) = std::sqrt(si / zi);
        }
      } else {
        const auto s1 = s.segment(b.offset + 1, b.size - 1);
        const auto z1 = z.segment(b.offset + 1, b.size - 1);
        const double sres = s(b.offset) * s(b.offset) - s1.squaredNorm();
        const double zres = z(b.offset) * z(b.offset) - z1.squaredNorm();
        if (sres <= 0.0 || zres <= 0.0) return false;
        const double snorm = std::sqrt(sres);
        const double znorm = std::sqrt(zres);
        const double s0 = s(b.offset) / snorm;
        const double z0 = z(b.offset) / znorm;
        double gamma = 1.0 + s0 * z0 + s1.dot(z1) / (snorm * znorm);
        gamma = std::sqrt(0.5 * gamma);
        b.a = (0.5 / gamma) * (s0 + z0);
        b.q = (0.5 / gamma) * (s1 / snorm - z1 / znorm);
        b.eta2 = snorm / znorm;
        b.eta = std::sqrt(b.eta2);
      }
    }
    return true;
  }

  /// out = W v.
  void apply_w(const VectorXd& v, VectorXd& out) const {
    for (const Block& b : blocks) {
      if (b.kind == ConeKind::NonNeg) {
        out.segment(b.offset, b.size) =
            b.w.cwiseProduct(v.segment(b.offset, b.size));
      } else {
        const auto v1 = v.segment(b.offset + 1, b.size - 1);
        const double zeta = b.q.dot(v1);
        out(b.offset) = b.eta * (b.a * v(b.offset) + zeta);
        out.segment(b.offset + 1, b.size - 1) =
            b.eta * (v1 + (v(b.offset) + zeta / (1.0 + b.a)) * b.q);
      }
    }
  }

  /// out = W^{-1} v (W is symmetric).
  void apply_w_inv(const VectorXd& v, VectorXd& out) const {
    for (const Block& b : blocks) {
      if (b.kind == ConeKind::NonNeg) {
        out.segment(b.offset, b.size) =
            v.segment(b.offset, b.size).cwiseQuotient(b.w);
      } else {
        const auto v1 = v.segment(b.offset + 1, b.size - 1);
        const double zeta = b.q.dot(v1);
        out(b.offset) = (b.a * v(b.offset) - zeta) / b.eta;
        out.segment(b.offset + 1, b.size - 1) =
            (v1 + (-v(b.offset) + zeta / (1.0 + b.a)) * b.q) / b.eta;
      }
    }
  }

  /// out = W^2 v, using W^2 = eta^2 (2 wbar wbar' - J).
  void apply_w2(const VectorXd& v, VectorXd& out) const {
    for (const Block& b : blocks) {
      if (b.kind == ConeKind::NonNeg) {
        out.segment(b.offset, b.size) =
            b.w.array().square() * v.segment(b.offset, b.size).array();
      } else {
        const auto v1 = v.segment(b.offset + 1, b.size - 1);
        const double d = b.a * v(b.offset) + b.q.dot(v1);
        out(b.offset) = b.eta2 * (2.0 * b.a * d - v(b.offset));
        out.segment(b.offset + 1, b.size - 1) = b.eta2 * (2.0 * d * b.q + v1);
      }
    }
  }
};

/// w = u o v (Jordan product); returns sum of |w| over block heads (the
/// 1-norm against the cone identity, used for mu bookkeeping in EiCOS; we
/// only need w).
void conic_product(const std::vector<BlockRef>& blocks, const VectorXd& u,
                   const VectorXd& v, VectorXd& w) {
  for (const BlockRef& b : blocks) {
    if (b.kind == ConeKind::NonNeg) {
      w.segment(b.offset, b.size) = u.segment(b.offset, b.size)
                                        .cwiseProduct(v.segment(b.offset, b.size));
    } else {
      const auto u1 = u.segment(b.offset + 1, b.size - 1);
      const auto v1 = v.segment(b.offset + 1, b.size - 1);
      w(b.offset) = u.segment(b.offset, b.size).dot(v.segment(b.offset, b.size));
      w.segment(b.offset + 1, b.size - 1) = u(b.offset) * v1 + v(b.offset) * u1;
    }
  }
}

/// v = u \ w (inverse Jordan product).
void conic_division(const std::vector<BlockRef>& blocks, const VectorXd& u,
                    const VectorXd& w, VectorXd& v) {
  for (const BlockRef& b : blocks) {
    if (b.kind == ConeKind::NonNeg) {
      v.segment(b.offset, b.size) = w.segment(b.offset, b.size)
                                        .cwiseQuotient(u.segment(b.offset, b.size));
    } else {
      const auto u1 = u.segment(b.offset + 1, b.size - 1);
      const auto w1 = w.segment(b.offset + 1, b.size - 1);
      const double u0 = u(b.offset);
      const double w0 = w(b.offset);
      const double rho = u0 * u0 - u1.squaredNorm();
      const double zeta = u1.dot(w1);
      v(b.offset) = (u0 * w0 - zeta) / rho;
      v.segment(b.offset + 1, b.size - 1) =
          ((zeta / u0 - w0) / rho) * u1 + w1 / u0;
    }
  }
}

/// Largest step alpha so that lambda + alpha*ds and lambda + alpha*dz stay in
/// the cone (ds, dz given in the scaled space), also bounded by tau/kappa
/// ratios. Mirrors the ECOS line search.
double line_search(const std::vector<BlockRef>& blocks, const VectorXd& lambda,
                   const VectorXd& ds, const VectorXd& dz, double tau,
                   double dtau, double kap, double dkap) {
  double alpha = 10.0;
  constexpr double eps = 1e-13;
  for (const BlockRef& b : blocks) {
    if (b.kind == ConeKind::NonNeg) {
      for (int i = 0; i < b.size; ++i) {
        const double rho = ds(b.offset + i) / lambda(b.offset + i);
        const double sig = dz(b.offset + i) / lambda(b.offset + i);
        const double worst = std::min(rho, sig);
        const double bound = worst < 0.0 ? 1.0 / (-worst) : 1.0 / eps;
        alpha = std::min(alpha, bound);
      }
    } else {
      const auto l1 = lambda.segment(b.offset + 1, b.size - 1);
      const double lknorm2 = lambda(b.offset) * lambda(b.offset) - l1.squaredNorm();
      if (lknorm2 <= 0.0) continue;
      const double lknorm = std::sqrt(lknorm2);
      const double l0 = lambda(b.offset) / lknorm;
      const VectorXd lbar1 = l1 / lknorm;

      const auto ds1 = ds.segment(b.offset + 1, b.size - 1);
      const auto dz1 = dz.segment(b.offset + 1, b.size - 1);
      const double lds = l0 * ds(b.offset) - lbar1.dot(ds1);
      const double ldz = l0 * dz(b.offset) - lbar1.dot(dz1);

      double factor = (lds + ds(b.offset)) / (l0 + 1.0);
      const double rhonorm =
          ((ds1 - factor * lbar1) / lknorm).norm() - lds / lknorm;
      factor = (ldz + dz(b.offset)) / (l0 + 1.0);
      const double signorm =
          ((dz1 - factor * lbar1) / lknorm).norm() - ldz / lknorm;

      const double conic_step = std::max({0.0, rhonorm, signorm});
      if (conic_step != 0.0) alpha = std::min(alpha, 1.0 / conic_step);
    }
  }
  const double mtdt = -tau / dtau;
  if (mtdt > 0.0 && mtdt < alpha) alpha = mtdt;
  const double mkdk = -kap / dkap;
  if (mkdk > 0.0 && mkdk < alpha) alpha = mkdk;
  return std::clamp(alpha, kStepMin, kStepMax);
}

// ---------------------------------------------------------------------------
// Ruiz equilibration. Row scalings are uniform within each SOC block so the
// cone is preserved; columns get their own scaling; the objective is
// normalized separately.
// ---------------------------------------------------------------------------

struct ScaledData {
  MatrixXd G, A;
  VectorXd c, h, b;
  VectorXd row_scale;   // m
  VectorXd eq_scale;    // p
  VectorXd col_scale;   // n
  double obj_scale = 1.0;
};

ScaledData equilibrate(const ConeProblem& p, const std::vector<BlockRef>& blocks) {
  const int n = p.n_vars();
  const int m = p.n_cone_rows();
  const int np = p.n_eqs();

  ScaledData d;
  d.G = p.G;
  d.A = p.A;
  d.row_scale = VectorXd::Ones(m);
  d.eq_scale = VectorXd::Ones(np);
  d.col_scale = VectorXd::Ones(n);

  auto clamp_scale = [](double v) { return std::clamp(v, 1e-8, 1e8); };

  for (int pass = 0; pass < 3; ++pass) {
    // Row pass: max |entry| per row, shared across each SOC block.
    VectorXd rnorm = VectorXd::Zero(m);
    for (const BlockRef& b : blocks) {
      double blockmax = 0.0;
      for (int i = 0; i < b.size; ++i)
        blockmax = std::max(blockmax, d.G.row(b.offset + i).cwiseAbs().maxCoeff());
      if (b.kind == ConeKind::NonNeg) {
        for (int i = 0; i < b.size; ++i)
          rnorm(b.offset + i) = d.G.row(b.offset + i).cwiseAbs().maxCoeff();
      } else {
        rnorm.segment(b.offset, b.size).setConstant(blockmax);
      }
    }
    for (int i = 0; i < m; ++i) {
      if (rnorm(i) > 0.0) {
        const double f = clamp_scale(1.0 / std::sqrt(rnorm(i)));
        d.G.row(i) *= f;
        d.row_scale(i) *= f;
      }
    }
    for (int i = 0; i < np; ++i) {
      const double an = d.A.row(i).cwiseAbs().maxCoeff();
      if (an > 0.0) {
        const double f = clamp_scale(1.0 / std::sqrt(an));
        d.A.row(i) *= f;
        d.eq_scale(i) *= f;
      }
    }
    // Column pass.
    for (int j = 0; j < n; ++j) {
      double cn = d.G.col(j).cwiseAbs().maxCoeff();
      if (np > 0) cn = std::max(cn, d.A.col(j).cwiseAbs().maxCoeff());
      if (cn > 0.0) {
        const double f = clamp_scale(1.0 / std::sqrt(cn));
        d.G.col(j) *= f;
        if (np > 0) d.A.col(j) *= f;
        d.col_scale(j) *= f;
      }
    }
  }

  d.h = d.row_scale.cwiseProduct(p.h);
  d.b = d.eq_scale.cwiseProduct(p.b);
  d.c = d.col_scale.cwiseProduct(p.c);
  d.obj_scale = std::max(1.0, d.c.lpNorm<Eigen::Infinity>());
  d.c /= d.obj_scale;
  return d;
}

// ---------------------------------------------------------------------------
// KKT system
//   [ dI   A'   G' ] [dx]   [bx]
//   [ A   -dI   0  ] [dy] = [by]
//   [ G    0  -W^2 ] [dz]   [bz]
// Without equalities this reduces to the SPD normal system
//   (G' W^{-2} G + dI) dx = bx + G' W^{-2} bz,   dz = W^{-2}(G dx - bz),
// assembled blockwise from per-block column supports:
//   G_b' W_b^{-2} G_b = eta^{-2} (2 u u' - G_b' J G_b),  u = G_b'(J wbar).
// ---------------------------------------------------------------------------

class KktSolver {
 public:
  KktSolver(const MatrixXd& G, const MatrixXd& A,
            const std::vector<BlockRef>& blocks)
      : G_(G), A_(A), blocks_(blocks),
        n_(static_cast<int>(G.cols())),
        m_(static_cast<int>(G.rows())),
        p_(static_cast<int>(A.rows())) {
    if (p_ == 0) precompute_supports();
  }

  bool factor(const Scaling& w) {
    scaling_ = &w;
    return p_ == 0 ? factor_normal(w) : factor_augmented(w);
  }

  void solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
             VectorXd& dx, VectorXd& dy, VectorXd& dz) const {
    if (p_ == 0) {
      solve_normal(bx, bz, dx, dz);
      dy.resize(0);
    } else {
      solve_augmented(bx, by, bz, dx, dy, dz);
    }
  }

 private:
  struct SocSupport {
    int block_index;             // into blocks_
    std::vector<int> cols;       // column support
    MatrixXd g;                  // restricted block rows (d x s)
    MatrixXd c;                  // g' J g (s x s)
  };
  struct LpRow {
    int row;
    std::vector<std::pair<int, double>> nz;
  };

  void precompute_supports() {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
      const BlockRef& b = blocks_[bi];
      if (b.kind == ConeKind::NonNeg) {
        for (int i = 0; i < b.size; ++i) {
          LpRow r;
          r.row = b.offset + i;
          for (int j = 0; j < n_; ++j)
            if (G_(r.row, j) != 0.0) r.nz.emplace_back(j, G_(r.row, j));
          lp_rows_.push_back(std::move(r));
        }
      } else {
        SocSupport s;
        s.block_index = static_cast<int>(bi);
        std::vector<bool> used(n_, false);
        for (int i = 0; i < b.size; ++i)
          for (int j = 0; j < n_; ++j)
            if (G_(b.offset + i, j) != 0.0) used[j] = true;
        for (int j = 0; j < n_; ++j)
          if (used[j]) s.cols.push_back(j);
        const int sc = static_cast<int>(s.cols.size());
        s.g.resize(b.size, sc);
        for (int j = 0; j < sc; ++j)
          s.g.col(j) = G_.block(b.offset, s.cols[j], b.size, 1);
        if (sc > 0) {
          s.c.noalias() = s.g.row(0).transpose() * s.g.row(0);
          if (b.size > 1)
            s.c.noalias() -= s.g.bottomRows(b.size - 1).transpose() *
                             s.g.bottomRows(b.size - 1);
        }
        soc_supports_.push_back(std::move(s));
      }
    }
  }

  bool factor_normal(const Scaling& w) {
    M_ = MatrixXd::Zero(n_, n_);
    M_.diagonal().setConstant(kDeltaStat);
    int lp_i = 0;
    int soc_i = 0;
    for (const Scaling::Block& sb : w.blocks) {
      if (sb.kind == ConeKind::NonNeg) {
        for (int i = 0; i < sb.size; ++i) {
          const LpRow& r = lp_rows_[lp_i++];
          const double wi = 1.0 / (sb.w(i) * sb.w(i));
          for (const auto& [j1, v1] : r.nz)
            for (const auto& [j2, v2] : r.nz) M_(j1, j2) += wi * v1 * v2;
        }
      } else {
        const SocSupport& sup = soc_supports_[soc_i++];
        const int sc = static_cast<int>(sup.cols.size());
        if (sc == 0) continue;
        VectorXd jw(sb.size);
        jw(0) = sb.a;
        if (sb.size > 1) jw.tail(sb.size - 1) = -sb.q;
        const VectorXd u = sup.g.transpose() * jw;
        const double inv_eta2 = 1.0 / sb.eta2;
        blk_.noalias() = 2.0 * u * u.transpose();
        blk_ -= sup.c;
        blk_ *= inv_eta2;
        for (int jj = 0; jj < sc; ++jj) {
          const int cj = sup.cols[jj];
          for (int ii = 0; ii < sc; ++ii) M_(sup.cols[ii], cj) += blk_(ii, jj);
        }
      }
    }
    llt_.compute(M_);
    return llt_.info() == Eigen::Success;
  }

  bool factor_augmented(const Scaling& w) {
    const int dim = n_ + p_ + m_;
    MatrixXd K = MatrixXd::Zero(dim, dim);
    K.topLeftCorner(n_, n_).diagonal().setConstant(kDeltaStat);
    K.block(n_, 0, p_, n_) = A_;
    K.block(0, n_, n_, p_) = A_.transpose();
    K.block(n_, n_, p_, p_).diagonal().setConstant(-kDeltaStat);
    K.block(n_ + p_, 0, m_, n_) = G_;
    K.block(0, n_ + p_, n_, m_) = G_.transpose();
    // -W^2 in the bottom-right corner, built blockwise.
    for (const Scaling::Block& sb : w.blocks) {
      const int o = n_ + p_ + sb.offset;
      if (sb.kind == ConeKind::NonNeg) {
        for (int i = 0; i < sb.size; ++i)
          K(o + i, o + i) = -(sb.w(i) * sb.w(i)) - kDeltaStat;
      } else {
        VectorXd wbar(sb.size);
        wbar(0) = sb.a;
        if (sb.size > 1) wbar.tail(sb.size - 1) = sb.q;
        MatrixXd w2 = 2.0 * sb.eta2 * wbar * wbar.transpose();
        w2(0, 0) -= sb.eta2;
        for (int i = 1; i < sb.size; ++i) w2(i, i) += sb.eta2;
        K.block(o, o, sb.size, sb.size) = -w2;
        K.block(o, o, sb.size, sb.size).diagonal().array() -= kDeltaStat;
      }
    }
    lu_.compute(K);
    return lu_.isInvertible();
  }

  void solve_normal(const VectorXd& bx, const VectorXd& bz, VectorXd& dx,
                    VectorXd& dz) const {
    const Scaling& w = *scaling_;
    VectorXd t1(m_), t2(m_);
    w.apply_w_inv(bz, t1);
    w.apply_w_inv(t1, t2);  // t2 = W^{-2} bz
    VectorXd rhs = bx;
    rhs.noalias() += G_.transpose() * t2;
    dx = llt_.solve(rhs);
    VectorXd gz = G_ * dx - bz;
    w.apply_w_inv(gz, t1);
    w.apply_w_inv(t1, dz);  // dz = W^{-2}(G dx - bz)

    // Refinement against the augmented system.
    VectorXd e1(n_), e3(m_), w2dz(m_), ddx(n_), ddz(m_);
    double prev_err = std::numeric_limits<double>::max();
    for (int round = 0; round < kRefineRounds; ++round) {
      w.apply_w2(dz, w2dz);
      e1 = bx - G_.transpose() * dz - kDeltaStat * dx;
      e3 = bz - G_ * dx + w2dz;
      const double err = std::max(e1.lpNorm<Eigen::Infinity>(),
                                  e3.lpNorm<Eigen::Infinity>());
      const double thresh =
          1e-14 * (1.0 + std::max(bx.lpNorm<Eigen::Infinity>(),
                                  bz.lpNorm<Eigen::Infinity>()));
      if (err <= thresh || err >= prev_err) break;
      prev_err = err;
      w.apply_w_inv(e3, t1);
      w.apply_w_inv(t1, t2);
      rhs = e1;
      rhs.noalias() += G_.transpose() * t2;
      ddx = llt_.solve(rhs);
      gz = G_ * ddx - e3;
      w.apply_w_inv(gz, t1);
      w.apply_w_inv(t1, ddz);
      dx += ddx;
      dz += ddz;
    }
  }

  void solve_augmented(const VectorXd& bx, const VectorXd& by,
                       const VectorXd& bz, VectorXd& dx, VectorXd& dy,
                       VectorXd& dz) const {
    const int dim = n_ + p_ + m_;
    VectorXd rhs(dim);
    rhs << bx, by, bz;
    VectorXd sol = lu_.solve(rhs);
    // One refinement round against the unregularized system.
    const Scaling& w = *scaling_;
    VectorXd w2dz(m_);
    for (int round = 0; round < kRefineRounds; ++round) {
      dx = sol.head(n_);
      dy = sol.segment(n_, p_);
      dz = sol.tail(m_);
      w.apply_w2(dz, w2dz);
      VectorXd err(dim);
      err.head(n_) = bx - A_.transpose() * dy - G_.transpose() * dz;
      err.segment(n_, p_) = by - A_ * dx;
      err.tail(m_) = bz - G_ * dx + w2dz;
      if (err.lpNorm<Eigen::Infinity>() <=
          1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
        break;
      sol += lu_.solve(err);
    }
    dx = sol.head(n_);
    dy = sol.segment(n_, p_);
    dz = sol.tail(m_);
  }

  const MatrixXd& G_;
  const MatrixXd& A_;
  const std::vector<BlockRef>& blocks_;
  int n_, m_, p_;
  const Scaling* scaling_ = nullptr;
  std::vector<LpRow> lp_rows_;
  std::vector<SocSupport> soc_supports_;
  MatrixXd M_;
  mutable MatrixXd blk_;
  Eigen::LLT<MatrixXd> llt_;
  Eigen::FullPivLU<MatrixXd> lu_;
};

// ---------------------------------------------------------------------------
// Iterate bookkeeping for the best-iterate safeguard.
// ---------------------------------------------------------------------------

struct Infos {
  double pres = 0, dres = 0, gap = 0, mu = 0, kapovert = 0;
  double pcost = 0, dcost = 0;
  std::optional<double> relgap, pinfres, dinfres;
  int iter = 0;

  bool better_than(const Infos& o) const {
    if (pinfres.has_value() && kapovert > 1.0) {
      return gap > 0.0 && o.gap > 0.0 && gap < o.gap &&
             *pinfres > 0.0 && *pinfres < o.pres && mu > 0.0 && mu < o.mu;
    }
    return gap > 0.0 && o.gap > 0.0 && gap < o.gap && pres > 0.0 &&
           pres < o.pres && dres > 0.0 && dres < o.dres && kapovert > 0.0 &&
           kapovert < o.kapovert && mu > 0.0 && mu < o.mu;
  }
};

struct Iterate {
  VectorXd x, y, z, s;
  double tau = 1.0, kap = 1.0;
  double cx = 0, by = 0, hz = 0;
  Infos info;
};

enum class CheckResult { NotConverged, Optimal, PrimalInfeasible, DualInfeasible };

CheckResult check_exit(const Iterate& it, double feastol, double abstol,
                       double reltol) {
  const Infos& i = it.info;
  if ((-it.cx > 0.0 || -it.by - it.hz >= -abstol) &&
      i.pres < feastol && i.dres < feastol &&
      (i.gap < abstol || (i.relgap.has_value() && *i.relgap < reltol))) {
    return CheckResult::Optimal;
  }
  if (i.dinfres.has_value() && *i.dinfres < feastol && it.tau < it.kap)
    return CheckResult::DualInfeasible;
  if ((i.pinfres.has_value() && *i.pinfres < feastol && it.tau < it.kap) ||
      (it.tau < feastol && it.kap < feastol && i.pinfres.has_value() &&
       *i.pinfres < feastol)) {
    return CheckResult::PrimalInfeasible;
  }
  return CheckResult::NotConverged;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public cone helpers
// ---------------------------------------------------------------------------

int ConeSpec::total_dim() const {
  int t = 0;
  for (const ConeBlock& b : blocks) t += b.size;
  return t;
}

int ConeSpec::degree() const {
  int d = 0;
  for (const ConeBlock& b : blocks)
    d += b.kind == ConeKind::NonNeg ? b.size : 1;
  return d;
}

void ConeSpec::validate() const {
  if (blocks.empty()) throw std::invalid_argument("cone spec has no blocks");
  for (const ConeBlock& b : blocks)
    if (b.size < 1) throw std::invalid_argument("cone block size must be >= 1");
}

void ConeProblem::validate() const {
  cones.validate();
  const int n = n_vars();
  if (n < 1) throw std::invalid_argument("problem has no variables");
  if (G.rows() != h.size() || G.cols() != n)
    throw std::invalid_argument("G/h dimensions inconsistent with c");
  if (cones.total_dim() != G.rows())
    throw std::invalid_argument("cone dimension does not match G rows");
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n))
    throw std::invalid_argument("A/b dimensions inconsistent");
  if (!c.allFinite() || !G.allFinite() || !h.allFinite() ||
      (A.size() > 0 && !A.allFinite()) || (b.size() > 0 && !b.allFinite()))
    throw std::invalid_argument("problem data must be finite");
}

double cone_violation(const ConeSpec& cones, const Eigen::VectorXd& s) {
  double v = 0.0;
  int off = 0;
  for (const ConeBlock& b : cones.blocks) {
    if (b.kind == ConeKind::NonNeg) {
      for (int i = 0; i < b.size; ++i) v = std::max(v, -s(off + i));
    } else {
      const double norm1 = b.size > 1 ? s.segment(off + 1, b.size - 1).norm() : 0.0;
      v = std::max(v, norm1 - s(off));
    }
    off += b.size;
  }
  return v;
}

Residuals kkt_residuals(const ConeProblem& p, const ConeSolution& sol) {
  Residuals r;
  if (sol.x.size() != p.n_vars() || sol.s.size() != p.n_cone_rows() ||
      sol.z.size() != p.n_cone_rows())
    return r;

  double primal = (p.G * sol.x + sol.s - p.h).lpNorm<Eigen::Infinity>();
  if (p.n_eqs() > 0)
    primal = std::max(primal,
                      (p.A * sol.x - p.b).lpNorm<Eigen::Infinity>());
  primal = std::max(primal, cone_violation(p.cones, sol.s));

  Eigen::VectorXd dres = p.c + p.G.transpose() * sol.z;
  if (p.n_eqs() > 0) dres += p.A.transpose() * sol.y;
  double dual = std::max(dres.lpNorm<Eigen::Infinity>(),
                         cone_violation(p.cones, sol.z));
  dual /= std::max(1.0, p.c.lpNorm<Eigen::Infinity>());

  const double cx = p.c.dot(sol.x);
  double gap = cx + p.h.dot(sol.z);
  if (p.n_eqs() > 0) gap += p.b.dot(sol.y);
  gap = std::abs(gap) / std::max(1.0, std::abs(cx));

  r.primal = primal;
  r.dual = dual;
  r.gap = gap;
  return r;
}

// ---------------------------------------------------------------------------
// Main solver
// ---------------------------------------------------------------------------

ConeSolution solve_socp(const ConeProblem& p, double tol, int max_iter) {
  p.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  const int n = p.n_vars();
  const int m = p.n_cone_rows();
  const int np = p.n_eqs();
  const std::vector<BlockRef> blocks = block_refs(p.cones);
  const double degree = p.cones.degree();

  ConeSolution out;
  out.x = VectorXd::Zero(n);
  out.s = VectorXd::Zero(m);
  out.z = VectorXd::Zero(m);
  out.y = VectorXd::Zero(np);

  const ScaledData sd = equilibrate(p, blocks);
  KktSolver kkt(sd.G, sd.A, blocks);

  const double feastol = tol;
  const double abstol = tol;
  const double reltol = tol;

  // --- initial point ---
  Scaling w = Scaling::identity(blocks);
  if (!kkt.factor(w)) return out;  // NumericalFailure

  Iterate it;
  it.x.resize(n);
  it.y.resize(np);
  it.z.resize(m);
  it.s.resize(m);

  VectorXd dx1(n), dy1(np), dz1(m), dx2(n), dy2(np), dz2(m);
  kkt.solve(VectorXd::Zero(n), sd.b, sd.h, dx1, dy1, dz1);
  it.x = dx1;
  it.s = bring_to_cone(blocks, -dz1);
  kkt.solve(-sd.c, VectorXd::Zero(np), VectorXd::Zero(m), dx2, dy2, dz2);
  it.y = dy2;
  it.z = bring_to_cone(blocks, dz2);
  it.tau = 1.0;
  it.kap = 1.0;

  const double resx0 = std::max(1.0, sd.c.norm());
  const double resy0 = std::max(1.0, sd.b.norm());
  const double resz0 = std::max(1.0, sd.h.norm());

  VectorXd rx(n), ry(np), rz(m);
  double hresx = 0, hresy = 0, hresz = 0, rt = 0;

  VectorXd lambda(m), w_dz(m), ds_by_w(m), ds1(m), ds2(m), dsfin(m);

  Iterate best = it;
  bool have_best = false;
  double pres_prev = std::numeric_limits<double>::max();
  double last_step = 1.0;

  CheckResult result = CheckResult::NotConverged;
  bool numerical_failure = false;
  bool full_accuracy = false;

  int iter = 0;
  for (iter = 0; iter <= max_iter; ++iter) {
    // Residuals.
    rx = -sd.G.transpose() * it.z;
    if (np > 0) rx -= sd.A.transpose() * it.y;
    hresx = rx.norm();
    rx -= it.tau * sd.c;

    if (np > 0) {
      ry = sd.A * it.x;
      hresy = ry.norm();
      ry -= it.tau * sd.b;
    } else {
      ry.resize(0);
      hresy = 0.0;
    }

    rz = it.s + sd.G * it.x;
    hresz = rz.norm();
    rz -= it.tau * sd.h;

    it.cx = sd.c.dot(it.x);
    it.by = np > 0 ? sd.b.dot(it.y) : 0.0;
    it.hz = sd.h.dot(it.z);
    rt = it.kap + it.cx + it.by + it.hz;

    const double nx = it.x.norm(), ny = it.y.norm(), nz = it.z.norm(),
                 ns = it.s.norm();

    // Statistics.
    Infos& info = it.info;
    info.iter = iter;
    info.gap = it.s.dot(it.z);
    info.mu = (info.gap + it.kap * it.tau) / (degree + 1.0);
    info.kapovert = it.kap / it.tau;
    info.pcost = it.cx / it.tau;
    info.dcost = -(it.hz + it.by) / it.tau;
    if (info.pcost < 0.0)
      info.relgap = info.gap / (-info.pcost);
    else if (info.dcost > 0.0)
      info.relgap = info.gap / info.dcost;
    else
      info.relgap.reset();

    const double nry = np > 0 ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0;
    const double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.0);
    info.pres = std::max(nry, nrz) / it.tau;
    info.dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / it.tau;

    info.pinfres.reset();
    info.dinfres.reset();
    if ((it.hz + it.by) / std::max(ny + nz, 1.0) < -reltol)
      info.pinfres = hresx / std::max(ny + nz, 1.0);
    if (it.cx / std::max(nx, 1.0) < -reltol)
      info.dinfres = std::max(hresy / std::max(nx, 1.0),
                              hresz / std::max(nx + ns, 1.0));

    // Safeguard: unreliable search direction.
    if (iter > 0 && (info.pres > kSafeguard * pres_prev || info.gap < 0.0)) {
      if (have_best) it = best;
      result = check_exit(it, kFeasTolInacc, kAbsTolInacc, kRelTolInacc);
      if (result == CheckResult::NotConverged) numerical_failure = true;
      break;
    }
    pres_prev = info.pres;

    result = check_exit(it, feastol, abstol, reltol);
    if (result != CheckResult::NotConverged) {
      full_accuracy = true;
      break;
    }

    // Stalled line search?
    if (iter > 0 && last_step == kStepMin * kGamma) {
      if (have_best) it = best;
      result = check_exit(it, kFeasTolInacc, kAbsTolInacc, kRelTolInacc);
      if (result == CheckResult::NotConverged) numerical_failure = true;
      break;
    }
    if (iter == max_iter) {
      if (have_best && !it.info.better_than(best.info)) it = best;
      result = check_exit(it, kFeasTolInacc, kAbsTolInacc, kRelTolInacc);
      break;
    }
    if (std::isnan(info.pcost)) {
      if (have_best && iter > 0 && !it.info.better_than(best.info)) it = best;
      result = check_exit(it, kFeasTolInacc, kAbsTolInacc, kRelTolInacc);
      if (result == CheckResult::NotConverged) numerical_failure = true;
      break;
    }

    if (!have_best || it.info.better_than(best.info)) {
      best = it;
      have_best = true;
    }

    // NT scaling and KKT factorization.
    if (!w.update(it.s, it.z)) {
      if (have_best) it = best;
      result = check_exit(it, kFeasTolInacc, kAbsTolInacc, kRelTolInacc);
      if (result == CheckResult::NotConverged) numerical_failure = true;
      break;
    }
    w.apply_w(it.z, lambda);
    if (!kkt.factor(w)) {
      if (have_best) it = best;
      result = check_exit(it, kFeasTolInacc, kAbsTolInacc, kRelTolInacc);
      if (result == CheckResult::NotConverged) numerical_failure = true;
      break;
    }

    // RHS1 = [-c; b; h], reused for the tau updates.
    kkt.solve(-sd.c, sd.b, sd.h, dx1, dy1, dz1);
    const double dtau_denom = it.kap / it.tau - sd.c.dot(dx1) -
                              (np > 0 ? sd.b.dot(dy1) : 0.0) - sd.h.dot(dz1);

    // Affine (predictor) direction.
    kkt.solve(rx, np > 0 ? VectorXd(-ry) : VectorXd(), it.s - rz, dx2, dy2, dz2);
    const double dtauaff = (rt - it.kap + sd.c.dot(dx2) +
                            (np > 0 ? sd.b.dot(dy2) : 0.0) + sd.h.dot(dz2)) /
                           dtau_denom;
    dz2 += dtauaff * dz1;
    w.apply_w(dz2, w_dz);
    ds_by_w = -w_dz - lambda;
    const double dkapaff = -it.kap - it.kap / it.tau * dtauaff;

    const double step_aff = line_search(blocks, lambda, ds_by_w, w_dz, it.tau,
                                        dtauaff, it.kap, dkapaff);
    const double sigma =
        std::clamp(std::pow(1.0 - step_aff, 3), kSigmaMin, kSigmaMax);

    // Combined (centering + corrector) direction.
    conic_product(blocks, lambda, lambda, ds1);
    conic_product(blocks, ds_by_w, w_dz, ds2);
    const double sigmamu = sigma * info.mu;
    ds1 += ds2;
    for (const BlockRef& b : blocks) {
      if (b.kind == ConeKind::NonNeg)
        ds1.segment(b.offset, b.size).array() -= sigmamu;
      else
        ds1(b.offset) -= sigmamu;
    }
    conic_division(blocks, lambda, ds1, ds_by_w);  // ds_by_w = lambda \ ds
    w.apply_w(ds_by_w, ds1);                       // ds1 = W(lambda \ ds)
    const double one_minus_sigma = 1.0 - sigma;
    kkt.solve(one_minus_sigma * rx,
              np > 0 ? VectorXd(-one_minus_sigma * ry) : VectorXd(),
              VectorXd(-one_minus_sigma * rz + ds1), dx2, dy2, dz2);

    const double bkap = it.kap * it.tau + dkapaff * dtauaff - sigmamu;
    const double dtau = (one_minus_sigma * rt - bkap / it.tau + sd.c.dot(dx2) +
                         (np > 0 ? sd.b.dot(dy2) : 0.0) + sd.h.dot(dz2)) /
                        dtau_denom;
    dx2 += dtau * dx1;
    if (np > 0) dy2 += dtau * dy1;
    dz2 += dtau * dz1;
    w.apply_w(dz2, w_dz);
    ds_by_w = -(ds_by_w + w_dz);
    const double dkap = -(bkap + it.kap * dtau) / it.tau;

    const double step = kGamma * line_search(blocks, lambda, ds_by_w, w_dz,
                                             it.tau, dtau, it.kap, dkap);
    last_step = step;
    w.apply_w(ds_by_w, dsfin);

    it.x += step * dx2;
    if (np > 0) it.y += step * dy2;
    it.z += step * dz2;
    it.s += step * dsfin;
    it.kap += step * dkap;
    it.tau += step * dtau;
  }

  out.iterations = iter;

  // Map outcome and unscale. col_scale maps scaled x back to user space;
  // row scalings map slacks and cone duals.
  const auto unscale_x = [&](const VectorXd& xs) -> VectorXd {
    return sd.col_scale.cwiseProduct(xs);
  };
  const auto unscale_s = [&](const VectorXd& ss) -> VectorXd {
    return ss.cwiseQuotient(sd.row_scale);
  };
  const auto unscale_z = [&](const VectorXd& zs) -> VectorXd {
    return sd.obj_scale * sd.row_scale.cwiseProduct(zs);
  };
  const auto unscale_y = [&](const VectorXd& ys) -> VectorXd {
    return sd.obj_scale * sd.eq_scale.cwiseProduct(ys);
  };

  switch (result) {
    case CheckResult::Optimal: {
      // Reduced-accuracy convergence is reported as MaxIterations so that
      // Optimal always certifies residuals <= tol.
      out.status = full_accuracy ? SolveStatus::Optimal
                                 : SolveStatus::MaxIterations;
      out.x = unscale_x(it.x) / it.tau;
      out.s = unscale_s(it.s) / it.tau;
      out.z = unscale_z(it.z) / it.tau;
      out.y = unscale_y(it.y) / it.tau;
      out.objective = p.c.dot(out.x);
      out.residuals.primal = it.info.pres;
      out.residuals.dual = it.info.dres;
      out.residuals.gap = it.info.relgap.value_or(it.info.gap);
      break;
    }
    case CheckResult::PrimalInfeasible: {
      out.status = SolveStatus::PrimalInfeasible;
      VectorXd zr = unscale_z(it.z);
      VectorXd yr = unscale_y(it.y);
      const double denom = p.h.dot(zr) + (np > 0 ? p.b.dot(yr) : 0.0);
      if (denom < 0.0) {
        zr /= -denom;
        yr /= -denom;
      }
      out.z = zr;
      out.y = yr;
      Eigen::VectorXd viol = p.G.transpose() * zr;
      if (np > 0) viol += p.A.transpose() * yr;
      out.residuals.dual = viol.lpNorm<Eigen::Infinity>();
      break;
    }
    case CheckResult::DualInfeasible: {
      out.status = SolveStatus::DualInfeasible;
      VectorXd xr = unscale_x(it.x);
      VectorXd sr = unscale_s(it.s);
      const double cxr = p.c.dot(xr);
      if (cxr < 0.0) {
        xr /= -cxr;
        sr /= -cxr;
      }
      out.x = xr;
      out.s = sr;
      out.objective = -std::numeric_limits<double>::infinity();
      double viol = (p.G * xr + sr).lpNorm<Eigen::Infinity>();
      if (np > 0)
        viol = std::max(viol, (p.A * xr).lpNorm<Eigen::Infinity>());
      out.residuals.primal = viol;
      break;
    }
    case CheckResult::NotConverged: {
      out.status = numerical_failure ? SolveStatus::NumericalFailure
                                     : SolveStatus::MaxIterations;
      if (it.tau > 0.0) {
        out.x = unscale_x(it.x) / it.tau;
        out.s = unscale_s(it.s) / it.tau;
        out.z = unscale_z(it.z) / it.tau;
        out.y = unscale_y(it.y) / it.tau;
        out.objective = p.c.dot(out.x);
      }
      out.residuals.primal = it.info.pres;
      out.residuals.dual = it.info.dres;
      out.residuals.gap = it.info.relgap.value_or(it.info.gap);
      break;
    }
  }
  return out;
}

}  // namespace greenbf::socp
