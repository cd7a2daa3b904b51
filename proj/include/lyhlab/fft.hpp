#pragma once

#include <span>

#include "lyhlab/types.hpp"

namespace lyhlab::fft {

enum class Direction { Forward, Backward };

/// In-place unnormalized multi-dimensional complex DFT (row-major `dims`).
/// Forward uses exp(-i k x). Safe to call from several threads.
void transform(std::span<Complex> data, std::span<const int> dims, Direction direction);

/// Transforms along the last axis only, for `rows` contiguous rows of length `length`.
void transform_rows(std::span<Complex> data, int rows, int length, Direction direction);

}  // namespace lyhlab::fft
