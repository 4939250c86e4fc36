#pragma once

#include "psido/grid.hpp"
#include "psido/symbols.hpp"

namespace psido {

enum class ApplyPath {
  /// Structure-aware: exact for constant and multiplication symbols, one FFT
  /// pair for multipliers and separable symbols, direct sum otherwise.
  automatic,
  /// Always the O(n^{2d}) direct sum, whatever the symbol kind.
  direct,
};

/// Largest n accepted by the direct O(n^{2d}) path for dimension d
/// (4096, 128, 32 for d = 1, 2, 3).
std::size_t direct_path_cap(int dim);

/// T_sigma f(x) = (2 pi)^{-d} integral exp(i x.xi) sigma(x, xi) f_hat(xi) dxi,
/// discretized on the grid of f. Throws EvaluationError on non-finite
/// symbol values and InvalidInput when the direct path exceeds its cap.
SampledFunction apply_psido(const Symbol& s, const SampledFunction& f, ApplyPath path = ApplyPath::automatic);

/// Conjugate transpose of the discretized T_sigma under the pairing
/// <u, v> = h^d sum u conj(v); matrix-free, same cost as apply_psido.
SampledFunction discrete_adjoint_apply(const Symbol& s, const SampledFunction& g,
                                       ApplyPath path = ApplyPath::automatic);

/// h^d sum u conj(v).
Complex discrete_pairing(const SampledFunction& u, const SampledFunction& v);

/// sigma(., xi_j) at x = 0 on the frequency grid (FFT order); requires a
/// symbol that does not depend on x.
SampledFunction sample_multiplier(const Symbol& s, const Grid& grid);

}  // namespace psido
