#pragma once

#include <array>

#include "todalab/torus.hpp"

namespace todalab {

// Fourier differentiation on the periodic grid. The Laplacian keeps the
// Nyquist modes (symbol -|k|^2), first derivatives zero them.

GridField laplacian(const GridField& f);
std::array<GridField, 2> gradient(const GridField& f);

/// div(grad f) built from the same truncated symbols as gradient(), so that
/// integrate(|grad f|^2) == -inner(f, gradient_divergence(f)) exactly.
GridField gradient_divergence(const GridField& f);

/// Zero-mean u solving -Laplace u = rhs - mean(rhs).
GridField solve_poisson(const GridField& rhs);

/// (-Laplace + tau)^{-1} f, tau > 0.
GridField shifted_inverse(const GridField& f, double tau);

}  // namespace todalab
