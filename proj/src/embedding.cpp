#include "koopman/embedding.hpp"

#include <string>

namespace koopman {

SnapshotPair::SnapshotPair(CMatrix x, CMatrix xp, double dt) : x_(std::move(x)), xp_(std::move(xp)), dt_(dt) {
  if (x_.rows() != xp_.rows() || x_.cols() != xp_.cols())
    throw SizeError("snapshot pair: X and X' must have matching dimensions");
  if (x_.cols() < 1 || x_.rows() < 1) throw SizeError("snapshot pair: need at least one observable and one sample");
  if (dt_ < 0.0) throw UsageError("snapshot pair: dt must be >= 0");
}

CMatrix delay_embed(const CMatrix& series, std::size_t num_delays, std::size_t stride) {
  if (stride < 1) throw UsageError("delay_embed: stride must be >= 1");
  const auto len = static_cast<std::size_t>(series.cols());
  const std::size_t span = num_delays * stride;
  if (len <= span)
    throw SizeError("delay_embed: series of length " + std::to_string(len) + " is too short for " +
                    std::to_string(num_delays) + " delays with stride " + std::to_string(stride));
  const Eigen::Index d = series.rows();
  const auto out_len = static_cast<Eigen::Index>(len - span);
  CMatrix out(d * static_cast<Eigen::Index>(num_delays + 1), out_len);
  for (std::size_t b = 0; b <= num_delays; ++b)
    out.middleRows(static_cast<Eigen::Index>(b) * d, d) =
        series.middleCols(static_cast<Eigen::Index>(b * stride), out_len);
  return out;
}

SnapshotPair hankel_pair(const CMatrix& series, std::size_t rows, double dt) {
  if (rows < 1) throw UsageError("hankel_pair: rows must be >= 1");
  const auto len = static_cast<std::size_t>(series.cols());
  if (len < rows + 1)
    throw SizeError("hankel_pair: series of length " + std::to_string(len) + " is too short for " +
                    std::to_string(rows) + " rows");
  const CMatrix embedded = delay_embed(series, rows - 1, 1);
  const Eigen::Index m = embedded.cols() - 1;
  return SnapshotPair(embedded.leftCols(m), embedded.rightCols(m), dt);
}

}  // namespace koopman
