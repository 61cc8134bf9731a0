#include "sttraj/autodiff/ops.hpp"

#include "sttraj/errors.hpp"

#include <cmath>
#include <numeric>

namespace sttraj::ad {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()) + " differ");
  }
}

void require_rank(const Tensor& x, Index rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + to_string(x.shape()));
  }
}

/// out[i] = in[map[i]]; backward scatters.
Tensor gather(const Tensor& x, Shape shape, std::vector<Index> map) {
  const Vector& in = x.value();
  Vector out(static_cast<Index>(map.size()));
  for (std::size_t i = 0; i < map.size(); ++i) out[static_cast<Index>(i)] = in[map[i]];
  return Tape::record(std::move(shape), std::move(out), {x},
                      [x, map = std::move(map)](const Node& o) {
                        Vector g = Vector::Zero(x.size());
                        for (std::size_t i = 0; i < map.size(); ++i) {
                          g[map[i]] += o.grad[static_cast<Index>(i)];
                        }
                        accumulate(x, g);
                      });
}

std::vector<Index> strides_of(const Shape& shape) {
  std::vector<Index> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

Index normalize_axis(Index axis, Index rank) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) throw DimensionError("axis out of range");
  return axis;
}

}  // namespace

// ---------------------------------------------------------------- arithmetic

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return Tape::record(a.shape(), a.value() + b.value(), {a, b}, [a, b](const Node& o) {
    accumulate(a, o.grad);
    accumulate(b, o.grad);
  });
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return Tape::record(a.shape(), a.value() - b.value(), {a, b}, [a, b](const Node& o) {
    accumulate(a, o.grad);
    accumulate(b, -o.grad);
  });
}

Tensor operator*(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return Tape::record(a.shape(), a.value().cwiseProduct(b.value()), {a, b},
                      [a, b](const Node& o) {
                        accumulate(a, o.grad.cwiseProduct(b.value()));
                        accumulate(b, o.grad.cwiseProduct(a.value()));
                      });
}

Tensor operator/(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "div");
  return Tape::record(a.shape(), a.value().cwiseQuotient(b.value()), {a, b},
                      [a, b](const Node& o) {
                        accumulate(a, o.grad.cwiseQuotient(b.value()));
                        accumulate(b, -o.grad.cwiseProduct(o.value).cwiseQuotient(b.value()));
                      });
}

Tensor operator-(const Tensor& a) { return -1.0 * a; }

Tensor operator*(double s, const Tensor& a) {
  return Tape::record(a.shape(), s * a.value(), {a},
                      [a, s](const Node& o) { accumulate(a, s * o.grad); });
}

Tensor operator*(const Tensor& a, double s) { return s * a; }

Tensor operator+(const Tensor& a, double s) {
  return Tape::record(a.shape(), (a.value().array() + s).matrix(), {a},
                      [a](const Node& o) { accumulate(a, o.grad); });
}

Tensor operator+(double s, const Tensor& a) { return a + s; }
Tensor operator-(const Tensor& a, double s) { return a + (-s); }
Tensor operator-(double s, const Tensor& a) { return (-1.0 * a) + s; }

Tensor exp(const Tensor& x) {
  return Tape::record(x.shape(), x.value().array().exp().matrix(), {x}, [x](const Node& o) {
    accumulate(x, o.grad.cwiseProduct(o.value));
  });
}

Tensor log(const Tensor& x) {
  return Tape::record(x.shape(), x.value().array().log().matrix(), {x}, [x](const Node& o) {
    accumulate(x, o.grad.cwiseQuotient(x.value()));
  });
}

Tensor tanh(const Tensor& x) {
  return Tape::record(x.shape(), x.value().array().tanh().matrix(), {x}, [x](const Node& o) {
    accumulate(x, (o.grad.array() * (1.0 - o.value.array().square())).matrix());
  });
}

Tensor sqrt(const Tensor& x) {
  return Tape::record(x.shape(), x.value().cwiseSqrt(), {x}, [x](const Node& o) {
    accumulate(x, (0.5 * o.grad.array() / o.value.array()).matrix());
  });
}

Tensor square(const Tensor& x) {
  return Tape::record(x.shape(), x.value().cwiseAbs2(), {x}, [x](const Node& o) {
    accumulate(x, 2.0 * o.grad.cwiseProduct(x.value()));
  });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw ContractError("clamp: lower bound exceeds upper bound");
  return Tape::record(x.shape(), x.value().cwiseMax(lo).cwiseMin(hi), {x}, [x, lo, hi](const Node& o) {
    const auto inside = (x.value().array() >= lo && x.value().array() <= hi).cast<double>();
    accumulate(x, (o.grad.array() * inside).matrix());
  });
}

Tensor prelu(const Tensor& x, const Tensor& slope) {
  if (slope.size() != 1) throw DimensionError("prelu: slope must be a single value");
  const double a = slope.value()[0];
  const auto positive = (x.value().array() > 0.0);
  Vector out = positive.select(x.value().array(), a * x.value().array()).matrix();
  return Tape::record(x.shape(), std::move(out), {x, slope}, [x, slope](const Node& o) {
    const double s = slope.value()[0];
    const auto pos = (x.value().array() > 0.0);
    accumulate(x, pos.select(o.grad.array(), s * o.grad.array()).matrix());
    const double ds = pos.select(0.0, o.grad.array() * x.value().array()).sum();
    accumulate(slope, Vector::Constant(1, ds));
  });
}

Tensor softmax_lastdim(const Tensor& x) {
  if (x.rank() == 0 || x.dim(-1) < 1) throw DimensionError("softmax_lastdim: empty last axis");
  if (!x.value().allFinite()) throw ValidationError("softmax_lastdim: non-finite input");
  const ConstMatrixMap in = x.matrix();
  RowMatrix out = (in.colwise() - in.rowwise().maxCoeff()).array().exp().matrix();
  out = out.array().colwise() / out.rowwise().sum().array();
  Vector v = Eigen::Map<const Vector>(out.data(), out.size());
  return Tape::record(x.shape(), std::move(v), {x}, [x](const Node& o) {
    const Index cols = x.dim(-1);
    const Index rows = x.size() / cols;
    ConstMatrixMap y(o.value.data(), rows, cols);
    ConstMatrixMap gy(o.grad.data(), rows, cols);
    // dx = y * (gy - <gy, y>)
    const Eigen::VectorXd dots = gy.cwiseProduct(y).rowwise().sum();
    RowMatrix gx = y.array() * (gy.colwise() - dots).array();
    accumulate(x, Eigen::Map<const Vector>(gx.data(), gx.size()));
  });
}

// ------------------------------------------------------------------ products

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: inner dimensions differ for " + to_string(a.shape()) + " and " +
                         to_string(b.shape()));
  }
  RowMatrix c = a.matrix() * b.matrix();
  Vector v = Eigen::Map<const Vector>(c.data(), c.size());
  return Tape::record({a.dim(0), b.dim(1)}, std::move(v), {a, b}, [a, b](const Node& o) {
    ConstMatrixMap g(o.grad.data(), a.dim(0), b.dim(1));
    if (a.requires_grad()) {
      RowMatrix ga = g * b.matrix().transpose();
      accumulate(a, Eigen::Map<const Vector>(ga.data(), ga.size()));
    }
    if (b.requires_grad()) {
      RowMatrix gb = a.matrix().transpose() * g;
      accumulate(b, Eigen::Map<const Vector>(gb.data(), gb.size()));
    }
  });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "bmm");
  require_rank(b, 3, "bmm");
  const Index batch = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  if (b.dim(0) != batch || b.dim(1) != k) {
    throw DimensionError("bmm: incompatible shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()));
  }
  Vector out(batch * m * n);
  for (Index i = 0; i < batch; ++i) {
    MatrixMap(out.data() + i * m * n, m, n).noalias() =
        ConstMatrixMap(a.value().data() + i * m * k, m, k) *
        ConstMatrixMap(b.value().data() + i * k * n, k, n);
  }
  return Tape::record({batch, m, n}, std::move(out), {a, b}, [a, b, batch, m, k, n](const Node& o) {
    Vector ga, gb;
    if (a.requires_grad()) ga.resize(a.size());
    if (b.requires_grad()) gb.resize(b.size());
    for (Index i = 0; i < batch; ++i) {
      ConstMatrixMap g(o.grad.data() + i * m * n, m, n);
      if (a.requires_grad()) {
        MatrixMap(ga.data() + i * m * k, m, k).noalias() =
            g * ConstMatrixMap(b.value().data() + i * k * n, k, n).transpose();
      }
      if (b.requires_grad()) {
        MatrixMap(gb.data() + i * k * n, k, n).noalias() =
            ConstMatrixMap(a.value().data() + i * m * k, m, k).transpose() * g;
      }
    }
    if (a.requires_grad()) accumulate(a, ga);
    if (b.requires_grad()) accumulate(b, gb);
  });
}

Tensor linear(const Tensor& x, const Tensor& weight) {
  require_rank(weight, 2, "linear");
  if (x.rank() < 1 || x.dim(-1) != weight.dim(0)) {
    throw DimensionError("linear: input " + to_string(x.shape()) + " does not match weight " +
                         to_string(weight.shape()));
  }
  Shape out_shape = x.shape();
  out_shape.back() = weight.dim(1);
  const Tensor flat = reshape(x, {x.size() / x.dim(-1), x.dim(-1)});
  return reshape(matmul(flat, weight), std::move(out_shape));
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_bias(linear(x, weight), bias);
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
  if (b.rank() != 1 || x.rank() < 1 || x.dim(-1) != b.dim(0)) {
    throw DimensionError("add_bias: bias " + to_string(b.shape()) + " does not match " +
                         to_string(x.shape()));
  }
  RowMatrix out = x.matrix();
  out.rowwise() += b.value().transpose();
  Vector v = Eigen::Map<const Vector>(out.data(), out.size());
  return Tape::record(x.shape(), std::move(v), {x, b}, [x, b](const Node& o) {
    accumulate(x, o.grad);
    if (b.requires_grad()) {
      const Index cols = b.size();
      ConstMatrixMap g(o.grad.data(), o.grad.size() / cols, cols);
      accumulate(b, g.colwise().sum().transpose());
    }
  });
}

Tensor add_diagonal(const Tensor& x, double c) {
  if (x.rank() < 2 || x.dim(-1) != x.dim(-2)) {
    throw DimensionError("add_diagonal: trailing axes of " + to_string(x.shape()) +
                         " are not square");
  }
  const Index n = x.dim(-1);
  Vector out = x.value();
  for (Index base = 0; base < out.size(); base += n * n) {
    for (Index i = 0; i < n; ++i) out[base + i * n + i] += c;
  }
  return Tape::record(x.shape(), std::move(out), {x}, [x](const Node& o) { accumulate(x, o.grad); });
}

Tensor outer_lastdim(const Tensor& d) {
  if (d.rank() < 1) throw DimensionError("outer_lastdim: scalar input");
  const Index n = d.dim(-1);
  const Index batch = d.size() / std::max<Index>(n, 1);
  Shape shape = d.shape();
  shape.push_back(n);
  Vector out(batch * n * n);
  for (Index b = 0; b < batch; ++b) {
    const auto v = d.value().segment(b * n, n);
    MatrixMap(out.data() + b * n * n, n, n).noalias() = v * v.transpose();
  }
  return Tape::record(std::move(shape), std::move(out), {d}, [d, n, batch](const Node& o) {
    Vector g(d.size());
    for (Index b = 0; b < batch; ++b) {
      ConstMatrixMap gm(o.grad.data() + b * n * n, n, n);
      const auto v = d.value().segment(b * n, n);
      g.segment(b * n, n) = (gm + gm.transpose()) * v;
    }
    accumulate(d, g);
  });
}

// ------------------------------------------------------------------- layout

Tensor reshape(const Tensor& x, Shape shape) {
  if (element_count(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " +
                         to_string(shape));
  }
  return Tape::record(std::move(shape), x.value(), {x}, [x](const Node& o) { accumulate(x, o.grad); });
}

Tensor permute(const Tensor& x, const std::vector<Index>& perm) {
  const Index rank = x.rank();
  if (static_cast<Index>(perm.size()) != rank) throw DimensionError("permute: rank mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(rank), false);
  for (Index p : perm) {
    if (p < 0 || p >= rank || seen[static_cast<std::size_t>(p)]) {
      throw DimensionError("permute: invalid permutation");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
  const auto in_strides = strides_of(x.shape());
  Shape out_shape(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out_shape[i] = x.shape()[static_cast<std::size_t>(perm[i])];
  const Index total = x.size();
  std::vector<Index> map(static_cast<std::size_t>(total));
  std::vector<Index> idx(perm.size(), 0);
  for (Index flat = 0; flat < total; ++flat) {
    Index src = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) src += idx[i] * in_strides[static_cast<std::size_t>(perm[i])];
    map[static_cast<std::size_t>(flat)] = src;
    for (std::size_t i = perm.size(); i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  return gather(x, std::move(out_shape), std::move(map));
}

Tensor transpose(const Tensor& x) {
  if (x.rank() < 2) throw DimensionError("transpose: rank < 2");
  std::vector<Index> perm(static_cast<std::size_t>(x.rank()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::swap(perm[perm.size() - 1], perm[perm.size() - 2]);
  return permute(x, perm);
}

Tensor slice(const Tensor& x, Index axis, Index begin, Index end) {
  axis = normalize_axis(axis, x.rank());
  const Index extent = x.dim(axis);
  if (begin < 0 || end > extent || begin > end) {
    throw DimensionError("slice: range out of bounds for " + to_string(x.shape()));
  }
  Index outer = 1, inner = 1;
  for (Index i = 0; i < axis; ++i) outer *= x.dim(i);
  for (Index i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  Shape shape = x.shape();
  shape[static_cast<std::size_t>(axis)] = end - begin;
  std::vector<Index> map;
  map.reserve(static_cast<std::size_t>(outer * (end - begin) * inner));
  for (Index o = 0; o < outer; ++o) {
    for (Index a = begin; a < end; ++a) {
      for (Index i = 0; i < inner; ++i) map.push_back((o * extent + a) * inner + i);
    }
  }
  return gather(x, std::move(shape), std::move(map));
}

Tensor tile(const Tensor& x, Index reps) {
  if (reps < 1) throw DimensionError("tile: reps must be positive");
  Shape shape = x.shape();
  shape.insert(shape.begin(), reps);
  std::vector<Index> map(static_cast<std::size_t>(reps * x.size()));
  for (Index r = 0; r < reps; ++r) {
    for (Index i = 0; i < x.size(); ++i) map[static_cast<std::size_t>(r * x.size() + i)] = i;
  }
  return gather(x, std::move(shape), std::move(map));
}

Tensor stack_lastdim(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("stack_lastdim: no inputs");
  for (const auto& p : parts) require_same_shape(parts.front(), p, "stack_lastdim");
  const Index k = static_cast<Index>(parts.size());
  const Index n = parts.front().size();
  Shape shape = parts.front().shape();
  shape.push_back(k);
  Vector out(n * k);
  for (Index j = 0; j < k; ++j) {
    const Vector& v = parts[static_cast<std::size_t>(j)].value();
    for (Index i = 0; i < n; ++i) out[i * k + j] = v[i];
  }
  return Tape::record(std::move(shape), std::move(out), parts, [parts, n, k](const Node& o) {
    for (Index j = 0; j < k; ++j) {
      const Tensor& p = parts[static_cast<std::size_t>(j)];
      if (!p.requires_grad()) continue;
      Vector g(n);
      for (Index i = 0; i < n; ++i) g[i] = o.grad[i * k + j];
      accumulate(p, g);
    }
  });
}

// --------------------------------------------------------------- reductions

Tensor sum(const Tensor& x) {
  return Tape::record({}, Vector::Constant(1, x.value().sum()), {x}, [x](const Node& o) {
    accumulate(x, Vector::Constant(x.size(), o.grad[0]));
  });
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw DimensionError("mean of empty tensor");
  return sum(x) * (1.0 / static_cast<double>(x.size()));
}

Tensor sum_axis(const Tensor& x, Index axis) {
  axis = normalize_axis(axis, x.rank());
  Index outer = 1, inner = 1;
  const Index extent = x.dim(axis);
  for (Index i = 0; i < axis; ++i) outer *= x.dim(i);
  for (Index i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  Shape shape = x.shape();
  shape.erase(shape.begin() + axis);
  Vector out = Vector::Zero(outer * inner);
  const Vector& in = x.value();
  for (Index o = 0; o < outer; ++o) {
    for (Index a = 0; a < extent; ++a) {
      out.segment(o * inner, inner) += in.segment((o * extent + a) * inner, inner);
    }
  }
  return Tape::record(std::move(shape), std::move(out), {x},
                      [x, outer, extent, inner](const Node& o) {
                        Vector g(x.size());
                        for (Index ob = 0; ob < outer; ++ob) {
                          for (Index a = 0; a < extent; ++a) {
                            g.segment((ob * extent + a) * inner, inner) = o.grad.segment(ob * inner, inner);
                          }
                        }
                        accumulate(x, g);
                      });
}

// -------------------------------------------------------------- convolution

Tensor conv_over_time(const Tensor& x, const Tensor& kernels, const Tensor& bias) {
  require_rank(x, 3, "conv_over_time");
  require_rank(kernels, 3, "conv_over_time");
  const Index cin = x.dim(0), len = x.dim(1), cols = x.dim(2);
  const Index cout = kernels.dim(0), width = kernels.dim(2);
  if (width % 2 == 0) throw ConfigError("conv_over_time: kernel width must be odd");
  if (kernels.dim(1) != cin) {
    throw DimensionError("conv_over_time: kernels " + to_string(kernels.shape()) +
                         " do not match input " + to_string(x.shape()));
  }
  if (bias.rank() != 1 || bias.dim(0) != cout) {
    throw DimensionError("conv_over_time: bias " + to_string(bias.shape()) + " does not match " +
                         std::to_string(cout) + " output channels");
  }
  const Index pad = (width - 1) / 2;
  const Vector& xv = x.value();
  const Vector& kv = kernels.value();
  Vector out(cout * len * cols);
  for (Index o = 0; o < cout; ++o) {
    MatrixMap y(out.data() + o * len * cols, len, cols);
    y.setConstant(bias.value()[o]);
    for (Index c = 0; c < cin; ++c) {
      ConstMatrixMap in(xv.data() + c * len * cols, len, cols);
      for (Index j = 0; j < width; ++j) {
        const double w = kv[(o * cin + c) * width + j];
        const Index shift = j - pad;  // y[l] += w * in[l + shift]
        const Index lo = std::max<Index>(0, -shift);
        const Index hi = std::min<Index>(len, len - shift);
        if (hi > lo) y.middleRows(lo, hi - lo) += w * in.middleRows(lo + shift, hi - lo);
      }
    }
  }
  return Tape::record(
      {cout, len, cols}, std::move(out), {x, kernels, bias},
      [x, kernels, bias, cin, len, cols, cout, width, pad](const Node& o) {
        const Vector& xv = x.value();
        const Vector& kv = kernels.value();
        Vector gx = Vector::Zero(x.size());
        Vector gk = Vector::Zero(kernels.size());
        Vector gb(cout);
        for (Index oc = 0; oc < cout; ++oc) {
          ConstMatrixMap gy(o.grad.data() + oc * len * cols, len, cols);
          gb[oc] = gy.sum();
          for (Index c = 0; c < cin; ++c) {
            ConstMatrixMap in(xv.data() + c * len * cols, len, cols);
            MatrixMap gin(gx.data() + c * len * cols, len, cols);
            for (Index j = 0; j < width; ++j) {
              const Index shift = j - pad;
              const Index lo = std::max<Index>(0, -shift);
              const Index hi = std::min<Index>(len, len - shift);
              if (hi <= lo) continue;
              const Index kidx = (oc * cin + c) * width + j;
              gk[kidx] += gy.middleRows(lo, hi - lo).cwiseProduct(in.middleRows(lo + shift, hi - lo)).sum();
              gin.middleRows(lo + shift, hi - lo) += kv[kidx] * gy.middleRows(lo, hi - lo);
            }
          }
        }
        accumulate(x, gx);
        accumulate(kernels, gk);
        accumulate(bias, gb);
      });
}

// ---------------------------------------------------------------- distances

Tensor pairwise_sqdist(const Tensor& x, const Tensor& y) {
  require_rank(x, 2, "pairwise_sqdist");
  require_rank(y, 2, "pairwise_sqdist");
  if (x.dim(1) != y.dim(1)) {
    throw DimensionError("pairwise_sqdist: feature widths differ for " + to_string(x.shape()) +
                         " and " + to_string(y.shape()));
  }
  const Index m = x.dim(0), l = y.dim(0);
  const ConstMatrixMap xm = x.matrix(), ym = y.matrix();
  Vector out(m * l);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < l; ++j) out[i * l + j] = (xm.row(i) - ym.row(j)).squaredNorm();
  }
  return Tape::record({m, l}, std::move(out), {x, y}, [x, y, m, l](const Node& o) {
    const ConstMatrixMap xm = x.matrix(), ym = y.matrix();
    ConstMatrixMap g(o.grad.data(), m, l);
    // d/dx_i = 2 sum_j g_ij (x_i - y_j);  d/dy_j = -2 sum_i g_ij (x_i - y_j)
    const Eigen::VectorXd row_sums = g.rowwise().sum();
    const Eigen::VectorXd col_sums = g.colwise().sum().transpose();
    if (x.requires_grad()) {
      RowMatrix gx = 2.0 * (row_sums.asDiagonal() * xm - g * ym);
      accumulate(x, Eigen::Map<const Vector>(gx.data(), gx.size()));
    }
    if (y.requires_grad()) {
      RowMatrix gy = 2.0 * (col_sums.asDiagonal() * ym - g.transpose() * xm);
      accumulate(y, Eigen::Map<const Vector>(gy.data(), gy.size()));
    }
  });
}

}  // namespace sttraj::ad
