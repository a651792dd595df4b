#pragma once

// Thin wrapper over FFTW. Plans are created once per shape under a lock and
// executed with the new-array interface, which FFTW documents as
// thread-safe, so concurrent callers never share mutable buffers.

#include "hbundle/grid.hpp"

namespace hbundle::fft {

enum class Direction { Forward, Backward };

/// Unnormalized in-place transform over all axes of a dims-dimensional
/// N^dims row-major array. Forward uses exp(-2 pi i jk/N).
void transform(Amplitudes& data, int dims, int points, Direction dir);

/// Unnormalized in-place 1D transforms along one axis of an N x N
/// row-major array (or the single axis of a 1D array).
void transform_axis(Amplitudes& data, int dims, int points, int axis, Direction dir);

}  // namespace hbundle::fft
