#include "flowtopo/pipeline.hpp"

namespace flowtopo {

ReconstructionResult reconstruct_exact(const FlowDataMatrix& data, double zero_tol, double round_tol,
                                       const CanonicalizeOptions& canonicalize_options) {
  const NullBasis basis = estimate_null_basis(data, zero_tol);
  Partition partition = find_valid_partition(basis);
  const CutsetMatrix cutset = to_fcutset_form(basis, partition, round_tol);
  ReconstructionResult result = realize_topology(canonicalize(cutset, canonicalize_options));
  result.diagnostics.estimated_m = basis.rank_deficiency;
  result.diagnostics.partition = std::move(partition);
  result.diagnostics.singular_values = basis.singular_values;
  return result;
}

}  // namespace flowtopo
