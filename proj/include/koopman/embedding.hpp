#pragma once

// Time-delay embedding and Hankel snapshot construction.

#include "koopman/snapshot.hpp"

namespace koopman {

/// Column k of the result stacks series columns k, k + stride, ...,
/// k + num_delays * stride. The series has one column per time sample.
/// Throws SizeError unless cols > num_delays * stride.
CMatrix delay_embed(const CMatrix& series, std::size_t num_delays, std::size_t stride = 1);

/// Hankel snapshot pair with `rows` delay blocks per column: X holds the delay
/// vectors starting at times 0 .. m-1 and X' the ones starting at 1 .. m, where
/// m = cols - rows. Throws SizeError unless cols >= rows + 1.
SnapshotPair hankel_pair(const CMatrix& series, std::size_t rows, double dt = 0.0);

}  // namespace koopman
