#include "dagma/acyclicity.hpp"

#include <cmath>
#include <string>

#include "dagma/error.hpp"

namespace dagma {

namespace {

constexpr double kDomainSlack = 1e-9;

Matrix squared_entries(const Matrix& w) {
  if (w.rows() != w.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "weighted adjacency must be square");
  }
  return w.cwiseProduct(w);
}

Matrix shifted(const Matrix& b, double s) {
  Matrix m = -b;
  m.diagonal().array() += s;
  return m;
}

LogDetBarrier barrier_or_throw(const Matrix& b, double s) {
  auto barrier = LogDetBarrier::factor(b, s);
  if (!barrier) {
    throw Error(ErrorCode::out_of_domain,
                "sI - W∘W is not an M-matrix for s = " + std::to_string(s));
  }
  return std::move(*barrier);
}

void require_positive_s(double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::out_of_domain, "s must be positive");
}

}  // namespace

std::string to_string(const Acyclicity& kind) {
  switch (kind.kind) {
    case Acyclicity::Kind::ldet: return "ldet";
    case Acyclicity::Kind::expm: return "expm";
    case Acyclicity::Kind::poly: return "poly";
    case Acyclicity::Kind::tinv: return "tinv";
  }
  return "unknown";
}

bool in_domain_squared(const Matrix& b, double s, DomainCheck mode) {
  if (!(s > 0.0)) return false;
  if (mode == DomainCheck::fast) {
    const LogDet ld = log_det(shifted(b, s));
    return ld.sign == 1 && std::isfinite(ld.log_abs_det);
  }
  const SpectralRadius rho = spectral_radius_nonneg(b);
  if (rho.upper < s) return true;
  if (rho.lower >= s) return false;
  if (rho.converged) return rho.value + kDomainSlack < s;
  // Power iteration could not separate rho from s; a Z-matrix is a
  // nonsingular M-matrix iff elimination without pivoting keeps every pivot
  // positive.
  return MMatrixLu::factor(shifted(b, s)).has_value();
}

bool in_domain(const Matrix& w, double s, DomainCheck mode) {
  return in_domain_squared(squared_entries(w), s, mode);
}

std::optional<LogDetBarrier> LogDetBarrier::factor(const Matrix& squared, double s) {
  if (!(s > 0.0)) return std::nullopt;
  auto lu = MMatrixLu::factor(shifted(squared, s));
  if (!lu) return std::nullopt;
  // -sum log(u_ii / s): each ratio is <= 1 for a nonnegative B, so the value
  // is nonnegative term by term and exactly zero when every pivot equals s.
  double value = 0.0;
  const Vector pivots = lu->pivots();
  for (Index i = 0; i < pivots.size(); ++i) value -= std::log(pivots[i] / s);
  return LogDetBarrier(std::move(*lu), value);
}

HEvaluation h_value_and_gradient(const Matrix& w, const Acyclicity& kind) {
  const Matrix b = squared_entries(w);
  const Index d = b.rows();
  HEvaluation out;
  switch (kind.kind) {
    case Acyclicity::Kind::ldet: {
      require_positive_s(kind.s);
      const LogDetBarrier barrier = barrier_or_throw(b, kind.s);
      out.value = barrier.value();
      out.gradient = 2.0 * barrier.resolvent().transpose().cwiseProduct(w);
      break;
    }
    case Acyclicity::Kind::expm: {
      Matrix e = matrix_expm1(b);
      out.value = e.trace();
      e.diagonal().array() += 1.0;
      out.gradient = 2.0 * e.transpose().cwiseProduct(w);
      break;
    }
    case Acyclicity::Kind::poly: {
      const Matrix a = b / static_cast<double>(d);
      Matrix q = matrix_power_minus_identity(a, static_cast<std::uint64_t>(d - 1));
      // (I + A)^d - I = Q + A + Q A; trace of Q A without forming it.
      out.value = q.trace() + a.trace() + q.cwiseProduct(a.transpose()).sum();
      q.diagonal().array() += 1.0;
      out.gradient = 2.0 * q.transpose().cwiseProduct(w);
      break;
    }
    case Acyclicity::Kind::tinv: {
      const LogDetBarrier barrier = barrier_or_throw(b, 1.0);
      const Matrix n = barrier.resolvent();
      // Tr(N) - d = Tr(B N) since N = I + B N.
      out.value = b.cwiseProduct(n.transpose()).sum();
      const Matrix n2 = n * n;
      out.gradient = 2.0 * n2.transpose().cwiseProduct(w);
      break;
    }
  }
  return out;
}

double h_value(const Matrix& w, const Acyclicity& kind) {
  const Matrix b = squared_entries(w);
  const Index d = b.rows();
  switch (kind.kind) {
    case Acyclicity::Kind::ldet:
      require_positive_s(kind.s);
      return barrier_or_throw(b, kind.s).value();
    case Acyclicity::Kind::expm:
      return matrix_expm1(b).trace();
    case Acyclicity::Kind::poly:
      return matrix_power_minus_identity(b / static_cast<double>(d), static_cast<std::uint64_t>(d))
          .trace();
    case Acyclicity::Kind::tinv:
      return b.cwiseProduct(barrier_or_throw(b, 1.0).resolvent().transpose()).sum();
  }
  return 0.0;
}

Matrix h_gradient(const Matrix& w, const Acyclicity& kind) {
  return h_value_and_gradient(w, kind).gradient;
}

Matrix h_hessian_full(const Matrix& w, double s, Index max_dim) {
  require_positive_s(s);
  const Index d = w.rows();
  if (d > max_dim) {
    throw Error(ErrorCode::dimension_too_large,
                "full Hessian requested for d = " + std::to_string(d) + " above cap " +
                    std::to_string(max_dim));
  }
  const Matrix n = barrier_or_throw(squared_entries(w), s).resolvent();
  const Vector vec_w = vec(w);
  const Vector vec_wt = vec(w.transpose());
  const Vector vec_nt = vec(n.transpose());
  const Matrix kn = kron(n, n.transpose());

  // Diag(vec W) * kn * Diag(vec W^T) * K; right-multiplying by K permutes
  // columns, column p + q d of X K being column q + p d of X.
  const Index dd = d * d;
  Matrix hess(dd, dd);
  for (Index p = 0; p < d; ++p) {
    for (Index q = 0; q < d; ++q) {
      const Index col = p + q * d;
      const Index src = q + p * d;
      hess.col(col) = 4.0 * vec_wt[src] * vec_w.cwiseProduct(kn.col(src));
    }
  }
  hess.diagonal() += 2.0 * vec_nt;
  return hess;
}

double h_hessian_entry(const Matrix& w, double s, Index k, Index l, Index p, Index q) {
  require_positive_s(s);
  const Index d = w.rows();
  if (k < 0 || l < 0 || p < 0 || q < 0 || k >= d || l >= d || p >= d || q >= d) {
    throw Error(ErrorCode::dimension_mismatch, "Hessian index out of range");
  }
  const Matrix n = barrier_or_throw(squared_entries(w), s).resolvent();
  if (k == p && l == q) {
    const double wlk = w(l, k);
    return 4.0 * wlk * wlk * n(k, l) * n(k, l) + 2.0 * n(k, l);
  }
  return 4.0 * w(l, k) * n(k, q) * n(p, l) * w(q, p);
}

}  // namespace dagma
