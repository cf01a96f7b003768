#pragma once

#include <Eigen/Dense>

#include <optional>

#include "privsub/errors.hpp"
#include "privsub/linalg.hpp"
#include "privsub/network.hpp"

namespace privsub {

struct DiscoverabilityVerdict {
  int span_rank = 0;
  int controllability_rank = 0;
  bool discoverable = false;
  // Alternative (A*, b) producing identical trajectories; only ever set when
  // discoverable is false.
  std::optional<AdjacencyPartition> certificate;
  // False when the span is deficient but no row of A can be perturbed.
  bool certificate_constructible = true;
};

// rank(b, Ab, ..., A^{n-2} b).
inline int controllability_rank(const AdjacencyPartition& p) {
  return numerical_rank(krylov(p.A, p.b, p.regular_count()));
}

// Generators {1, b, Ab, ..., A^{n-2} b, x0, Ax0, ..., A^{n-2} x0} as columns.
inline Eigen::MatrixXd span_generators(const AdjacencyPartition& p, const Eigen::VectorXd& x0) {
  const int dim = p.regular_count();
  if (x0.size() != dim) throw DomainError("initial state must have one entry per regular agent");
  Eigen::MatrixXd g(dim, 1 + 2 * dim);
  g.col(0).setOnes();
  g.middleCols(1, dim) = krylov(p.A, p.b, dim);
  g.middleCols(1 + dim, dim) = krylov(p.A, x0, dim);
  return g;
}

inline DiscoverabilityVerdict discoverability_span_rank(const AdjacencyPartition& p,
                                                        const Eigen::VectorXd& x0) {
  DiscoverabilityVerdict v;
  v.span_rank = numerical_rank(span_generators(p, x0));
  v.controllability_rank = controllability_rank(p);
  v.discoverable = v.span_rank == p.regular_count();
  return v;
}

// Perturbs the first strictly positive row of A along a direction orthogonal
// to every generator. Since 1 is a generator the row sum is unchanged, and the
// step is half the smallest row entry over the direction's max-norm.
inline std::optional<AdjacencyPartition> nondiscoverability_certificate(
    const AdjacencyPartition& p, const Eigen::VectorXd& x0) {
  const Eigen::MatrixXd gens = span_generators(p, x0);
  if (numerical_rank(gens) == p.regular_count()) return std::nullopt;

  Eigen::Index row = -1;
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    if (p.A.row(i).minCoeff() > 0.0) {
      row = i;
      break;
    }
  }
  if (row < 0)
    throw CertificateNotConstructibleError(
        "span is deficient but no row of A is strictly positive");

  const Eigen::VectorXd dir = orthogonal_complement(gens).col(0);
  const double step = 0.5 * p.A.row(row).minCoeff() / dir.cwiseAbs().maxCoeff();
  AdjacencyPartition cert = p;
  cert.A.row(row) -= step * dir.transpose();
  return cert;
}

inline DiscoverabilityVerdict analyze_discoverability(const AdjacencyPartition& p,
                                                      const Eigen::VectorXd& x0) {
  DiscoverabilityVerdict v = discoverability_span_rank(p, x0);
  if (v.discoverable) return v;
  try {
    v.certificate = nondiscoverability_certificate(p, x0);
  } catch (const CertificateNotConstructibleError&) {
    v.certificate_constructible = false;
  }
  return v;
}

}  // namespace privsub
