#pragma once

#include "delaymargin/plant.hpp"

namespace delaymargin {

/// Rectangle [sigma0, real_max] x [-imag_max, imag_max].
struct CountRegion {
    double sigma0 = 0.0;
    double real_max = 1.0;
    double imag_max = 1.0;
};

/// Rectangle that contains every root of 1 + G(s) e^{-hs} with
/// Re(s) >= sigma0. Throws UnboundedRegion when no such rectangle exists
/// (bi-proper |d| >= 1, or h at or past ln|d|/sigma0).
CountRegion enclosure_bounds(const PoleZeroGain& plant, double h, double sigma0);

/// Roots of 1 + G(s) e^{-hs} inside the region, by the argument principle
/// (winding of the closed-loop function plus the poles of G inside).
/// Throws BoundaryRoot when a root sits on the left edge.
int count_roots(const PoleZeroGain& plant, double h, const CountRegion& region, int initial_samples = 64);

/// count_roots over enclosure_bounds.
int count_roots_right_of(const PoleZeroGain& plant, double h, double sigma0);

/// Newton refinement of a root of 1 + G(s) e^{-hs}. Throws DidNotConverge.
Complex refine_root(const PoleZeroGain& plant, double h, Complex guess);

/// sign(Re s(h0 + delta) - Re s(h0 - delta)) along the root branch through s0.
int numeric_crossing_direction(const PoleZeroGain& plant, double h0, Complex s0, double delta = 1e-4);

} // namespace delaymargin
