#include "dstlab/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dstlab::ad {

namespace {

void require_same_tape(const Tensor& a, const Tensor& b) {
  if (a.tape() != b.tape()) {
    throw ShapeError("operands recorded on different tapes");
  }
}

}  // namespace

Tensor matmul(Tensor a, Tensor b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" +
                     std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()) + ")");
  }
  Tape& t = *a.tape();
  Matrix out = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return t.emit(std::move(out), a.requires_grad() || b.requires_grad(),
                {ia, ib},
                [ia, ib](const Matrix& adj, Tape& tape,
                         std::vector<Matrix>& adjoints) {
                  if (tape.requires_grad(ia)) {
                    Tape::accumulate(adjoints[ia],
                                     adj * tape.value(ib).transpose());
                  }
                  if (tape.requires_grad(ib)) {
                    Tape::accumulate(adjoints[ib],
                                     tape.value(ia).transpose() * adj);
                  }
                });
}

Tensor add_rowvec(Tensor x, Tensor b) {
  require_same_tape(x, b);
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw ShapeError("add_rowvec: bias must be 1 x " +
                     std::to_string(x.cols()));
  }
  Tape& t = *x.tape();
  Matrix out = x.value().rowwise() + b.value().row(0);
  const int ix = x.id(), ib = b.id();
  return t.emit(std::move(out), x.requires_grad() || b.requires_grad(),
                {ix, ib},
                [ix, ib](const Matrix& adj, Tape& tape,
                         std::vector<Matrix>& adjoints) {
                  if (tape.requires_grad(ix)) {
                    Tape::accumulate(adjoints[ix], adj);
                  }
                  if (tape.requires_grad(ib)) {
                    Tape::accumulate(adjoints[ib], adj.colwise().sum());
                  }
                });
}

namespace {

Tensor binary_elementwise(Tensor a, Tensor b, double sign_b) {
  require_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("elementwise op: shape mismatch");
  }
  Tape& t = *a.tape();
  Matrix out = a.value() + sign_b * b.value();
  const int ia = a.id(), ib = b.id();
  return t.emit(std::move(out), a.requires_grad() || b.requires_grad(),
                {ia, ib},
                [ia, ib, sign_b](const Matrix& adj, Tape& tape,
                                 std::vector<Matrix>& adjoints) {
                  if (tape.requires_grad(ia)) {
                    Tape::accumulate(adjoints[ia], adj);
                  }
                  if (tape.requires_grad(ib)) {
                    Tape::accumulate(adjoints[ib], (sign_b * adj).eval());
                  }
                });
}

}  // namespace

Tensor add(Tensor a, Tensor b) { return binary_elementwise(a, b, 1.0); }
Tensor sub(Tensor a, Tensor b) { return binary_elementwise(a, b, -1.0); }

Tensor scale(Tensor a, double c) {
  Tape& t = *a.tape();
  Matrix out = c * a.value();
  const int ia = a.id();
  return t.emit(std::move(out), a.requires_grad(), {ia, -1},
                [ia, c](const Matrix& adj, Tape& tape,
                        std::vector<Matrix>& adjoints) {
                  if (tape.requires_grad(ia)) {
                    Tape::accumulate(adjoints[ia], (c * adj).eval());
                  }
                });
}

Tensor relu(Tensor a) {
  Tape& t = *a.tape();
  Matrix out = a.value().cwiseMax(0.0);
  const int ia = a.id();
  return t.emit(std::move(out), a.requires_grad(), {ia, -1},
                [ia](const Matrix& adj, Tape& tape,
                     std::vector<Matrix>& adjoints) {
                  if (!tape.requires_grad(ia)) return;
                  const Matrix& v = tape.value(ia);
                  Matrix masked =
                      (v.array() > 0.0).cast<Scalar>() * adj.array();
                  Tape::accumulate(adjoints[ia], masked);
                });
}

Tensor sum(Tensor a) {
  Tape& t = *a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id();
  const Index rows = a.rows(), cols = a.cols();
  return t.emit(std::move(out), a.requires_grad(), {ia, -1},
                [ia, rows, cols](const Matrix& adj, Tape& tape,
                                 std::vector<Matrix>& adjoints) {
                  if (!tape.requires_grad(ia)) return;
                  Tape::accumulate(
                      adjoints[ia],
                      (adj(0, 0) * Matrix::Ones(rows, cols)).eval());
                });
}

Tensor dropout(Tensor a, double rate, Mode mode, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  if (mode == Mode::Eval) return a;
  Tape& t = *a.tape();
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  for (Index i = 0; i < mask.rows(); ++i) {
    for (Index j = 0; j < mask.cols(); ++j) {
      mask(i, j) = rng.bernoulli(rate) ? 0.0 : keep_scale;
    }
  }
  Matrix out = a.value().cwiseProduct(mask);
  const int ia = a.id();
  return t.emit(std::move(out), a.requires_grad(), {ia, -1},
                [ia, mask](const Matrix& adj, Tape& tape,
                           std::vector<Matrix>& adjoints) {
                  if (!tape.requires_grad(ia)) return;
                  Tape::accumulate(adjoints[ia], adj.cwiseProduct(mask));
                });
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double row_max = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - row_max).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    int best = 0;
    for (Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = static_cast<int>(j);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

Tensor softmax_cross_entropy(Tensor logits, const std::vector<int>& targets,
                             int denominator, double clamp_eps) {
  if (logits.cols() < 2) {
    throw ShapeError("softmax_cross_entropy: need at least 2 classes");
  }
  if (static_cast<Index>(targets.size()) != logits.rows()) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(logits.rows()) +
                     " rows");
  }
  if (denominator <= 0) {
    throw ConfigError("softmax_cross_entropy: denominator must be positive");
  }
  const int num_classes = static_cast<int>(logits.cols());
  for (int tgt : targets) {
    if (tgt != kIgnoreTarget && (tgt < 0 || tgt >= num_classes)) {
      throw std::out_of_range("softmax_cross_entropy: target " +
                              std::to_string(tgt) + " out of range for K=" +
                              std::to_string(num_classes));
    }
  }

  Matrix probs = softmax_rows(logits.value());
  double total = 0.0;
  for (Index i = 0; i < probs.rows(); ++i) {
    const int tgt = targets[static_cast<std::size_t>(i)];
    if (tgt == kIgnoreTarget) continue;
    const double p = std::clamp(probs(i, tgt), clamp_eps, 1.0);
    total -= std::log(p);
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(denominator);

  Tape& t = *logits.tape();
  const int il = logits.id();
  // The clamp makes the loss locally constant in a saturated row, so a
  // saturated row contributes zero gradient.
  return t.emit(
      std::move(out), logits.requires_grad(), {il, -1},
      [il, probs, targets, denominator, clamp_eps](
          const Matrix& adj, Tape& tape, std::vector<Matrix>& adjoints) {
        if (!tape.requires_grad(il)) return;
        const double a = adj(0, 0) / static_cast<double>(denominator);
        Matrix g = Matrix::Zero(probs.rows(), probs.cols());
        for (Index i = 0; i < probs.rows(); ++i) {
          const int tgt = targets[static_cast<std::size_t>(i)];
          if (tgt == kIgnoreTarget) continue;
          if (probs(i, tgt) <= clamp_eps) continue;
          g.row(i) = a * probs.row(i);
          g(i, tgt) -= a;
        }
        Tape::accumulate(adjoints[il], g);
      });
}

}  // namespace dstlab::ad
