#pragma once

// Structural comparison of an estimated graph against the true DAG.

#include "dagma/matrix.hpp"

namespace dagma {

struct EvalReport {
  Index shd = 0;
  double tpr = 0.0;
  double fpr = 0.0;
  double fdr = 0.0;
  Index true_edges = 0;
  Index predicted_edges = 0;
  Index correct = 0;
  Index reversed = 0;
  Index missing = 0;
  Index extra = 0;
};

/// Pairs are scored once each: a reversal costs 1, an estimated edge with no
/// true edge in either direction is extra, a true edge matched in neither
/// direction is missing. When the estimate has both i->j and j->i over a
/// single true edge, the wrong direction counts as extra.
/// Throws Error(dimension_mismatch) or Error(cyclic_truth).
EvalReport evaluate(const Adjacency& truth, const Adjacency& estimate);

}  // namespace dagma
