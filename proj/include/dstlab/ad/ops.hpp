#pragma once

#include <vector>

#include "dstlab/ad/tape.hpp"
#include "dstlab/rng.hpp"
#include "dstlab/types.hpp"

namespace dstlab::ad {

/// Probability floor applied inside softmax_cross_entropy before the log.
/// Keeps cross-entropy maximization (the adversarial direction) bounded.
inline constexpr double kDefaultProbClamp = 1e-7;

/// Class index marking a row that contributes nothing to the loss.
inline constexpr int kIgnoreTarget = -1;

Tensor matmul(Tensor a, Tensor b);

/// x [B x N] plus a row vector b [1 x N], broadcast over rows.
Tensor add_rowvec(Tensor x, Tensor b);

Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor scale(Tensor a, double c);
Tensor relu(Tensor a);

/// Sum of all entries, as a 1x1 tensor.
Tensor sum(Tensor a);

/// Train mode zeroes each entry with probability `rate` and scales
/// survivors by 1/(1-rate); eval mode is the identity (and consumes no
/// random draws).
Tensor dropout(Tensor a, double rate, Mode mode, Rng& rng);

/// Fused stable softmax + cross-entropy. `targets[i]` is the class index
/// for row i, or kIgnoreTarget to skip the row entirely. Row losses are
/// summed and divided by `denominator` (which need not equal the number of
/// contributing rows; self-training losses divide by the full batch size).
/// Probabilities are clamped to [clamp_eps, 1] before the log.
Tensor softmax_cross_entropy(Tensor logits, const std::vector<int>& targets,
                             int denominator,
                             double clamp_eps = kDefaultProbClamp);

/// Row-wise softmax of a plain matrix (no tape). Used on inference paths:
/// pseudo-label generation is deliberately detached from the graph.
Matrix softmax_rows(const Matrix& logits);

/// argmax per row, ties broken toward the lowest index.
std::vector<int> argmax_rows(const Matrix& m);

}  // namespace dstlab::ad
