#include "dagma/metrics.hpp"

#include <algorithm>

#include "dagma/error.hpp"

namespace dagma {

EvalReport evaluate(const Adjacency& truth, const Adjacency& estimate) {
  if (truth.rows() != truth.cols() || estimate.rows() != estimate.cols() ||
      truth.rows() != estimate.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "graphs must be square and of the same size");
  }
  if (!topological_order(truth)) throw Error(ErrorCode::cyclic_truth, "true graph has a cycle");

  const Index d = truth.rows();
  EvalReport r;
  for (Index i = 0; i < d; ++i) {
    if (estimate(i, i) != 0) ++r.extra;  // self-loop
    for (Index j = i + 1; j < d; ++j) {
      const bool tij = truth(i, j) != 0, tji = truth(j, i) != 0;
      const bool eij = estimate(i, j) != 0, eji = estimate(j, i) != 0;
      r.true_edges += tij + tji;
      r.predicted_edges += eij + eji;
      if (!tij && !tji) {
        r.extra += eij + eji;
      } else {
        const bool same = tij ? eij : eji;
        const bool opposite = tij ? eji : eij;
        if (same) {
          ++r.correct;
          if (opposite) ++r.extra;
        } else if (opposite) {
          ++r.reversed;
        } else {
          ++r.missing;
        }
      }
    }
  }
  r.predicted_edges += (estimate.diagonal().array() != 0).count();
  r.shd = r.missing + r.extra + r.reversed;
  r.tpr = static_cast<double>(r.correct) / static_cast<double>(std::max<Index>(r.true_edges, 1));
  const Index non_edges = d * (d - 1) - r.true_edges;
  r.fpr = non_edges > 0 ? static_cast<double>(r.extra + r.reversed) / static_cast<double>(non_edges) : 0.0;
  r.fpr = std::min(r.fpr, 1.0);
  r.fdr = static_cast<double>(r.extra + r.reversed) /
          static_cast<double>(std::max<Index>(r.predicted_edges, 1));
  return r;
}

}  // namespace dagma
