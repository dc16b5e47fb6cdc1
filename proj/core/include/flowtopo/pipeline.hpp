#pragma once

#include "flowtopo/canonical_cutset.hpp"
#include "flowtopo/nullspace.hpp"
#include "flowtopo/realize.hpp"

namespace flowtopo {

/// Noise-free reconstruction: null basis, valid partition, [I | R_D], canonical form, realisation.
ReconstructionResult reconstruct_exact(const FlowDataMatrix& data, double zero_tol = kDefaultZeroTol,
                                       double round_tol = kDefaultRoundTol,
                                       const CanonicalizeOptions& canonicalize_options = {});

}  // namespace flowtopo
