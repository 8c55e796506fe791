#include "songlm/ops.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "songlm/kernels.hpp"

namespace songlm::ag {

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

namespace {

template <class T>
bool tracking(std::initializer_list<const Tensor<T>*> inputs) {
  if (!GradMode::enabled()) return false;
  for (auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

template <class T>
Tensor<T> make_result(Shape shape, std::vector<T> data, std::vector<std::shared_ptr<Node<T>>> parents,
                      const char* op, bool track, std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->op = op;
  if (track) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Tensor<T>(std::move(n));
}

template <class T>
Node<T>* grad_target(Node<T>& self, std::size_t i) {
  Node<T>* p = self.parents[i].get();
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw ShapeError(what);
}

/// outer x axis x inner decomposition for axis-wise ops.
struct AxisView {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisView axis_view(const Shape& s, std::size_t axis) {
  require(axis < s.size(), "axis " + std::to_string(axis) + " out of range for shape " + to_string(s));
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

template <class T, class F, class D>
Tensor<T> unary(const Tensor<T>& x, const char* op, F f, D df_from_xy) {
  std::vector<T> y(x.numel());
  const auto xs = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<T>(f(static_cast<double>(xs[i])));
  const bool track = tracking({&x});
  return make_result<T>(x.shape(), std::move(y), {x.shared()}, op, track, [df_from_xy](Node<T>& self) {
    Node<T>* px = grad_target(self, 0);
    if (!px) return;
    for (std::size_t i = 0; i < self.data.size(); ++i)
      px->grad[i] += static_cast<T>(self.grad[i] * df_from_xy(static_cast<double>(px->data[i]),
                                                               static_cast<double>(self.data[i])));
  });
}

}  // namespace

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.size(1) == b.size(0),
          "matmul shape mismatch: " + to_string(a.shape()) + " x " + to_string(b.shape()));
  const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
  std::vector<T> c(m * n);
  kernels::gemm(false, false, m, n, k, a.ptr(), b.ptr(), c.data(), false);
  const bool track = tracking({&a, &b});
  return make_result<T>({m, n}, std::move(c), {a.shared(), b.shared()}, "matmul", track, [m, n, k](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    Node<T>* pb = self.parents[1].get();
    if (pa->requires_grad) {
      pa->ensure_grad();
      kernels::gemm(false, true, m, k, n, self.grad.data(), pb->data.data(), pa->grad.data(), true);
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      kernels::gemm(true, false, k, n, m, pa->data.data(), self.grad.data(), pb->grad.data(), true);
    }
  });
}

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
  require(a.rank() == 2, "transpose needs a matrix, got " + to_string(a.shape()));
  const std::size_t r = a.size(0), c = a.size(1);
  std::vector<T> out(r * c);
  const auto in = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  const bool track = tracking({&a});
  return make_result<T>({c, r}, std::move(out), {a.shared()}, "transpose", track, [r, c](Node<T>& self) {
    Node<T>* pa = grad_target(self, 0);
    if (!pa) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) pa->grad[i * c + j] += self.grad[j * r + i];
  });
}

namespace {

bool is_suffix(const Shape& big, const Shape& small) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

template <class T>
Tensor<T> add_impl(const Tensor<T>& a, const Tensor<T>& b, double sign, const char* op) {
  require(is_suffix(a.shape(), b.shape()),
          std::string(op) + " shape mismatch: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  const std::size_t n = a.numel(), nb = b.numel();
  std::vector<T> out(a.data().begin(), a.data().end());
  const auto bs = b.data();
  const T s = static_cast<T>(sign);
  for (std::size_t i = 0; i < n; i += nb)
    for (std::size_t j = 0; j < nb; ++j) out[i + j] += s * bs[j];
  const bool track = tracking({&a, &b});
  return make_result<T>(a.shape(), std::move(out), {a.shared(), b.shared()}, op, track, [n, nb, s](Node<T>& self) {
    if (Node<T>* pa = grad_target(self, 0))
      for (std::size_t i = 0; i < n; ++i) pa->grad[i] += self.grad[i];
    if (Node<T>* pb = grad_target(self, 1))
      for (std::size_t i = 0; i < n; i += nb)
        for (std::size_t j = 0; j < nb; ++j) pb->grad[j] += s * self.grad[i + j];
  });
}

}  // namespace

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return add_impl(a, b, 1.0, "add");
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return add_impl(a, b, -1.0, "sub");
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul shape mismatch: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  const std::size_t n = a.numel();
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a.data()[i] * b.data()[i];
  const bool track = tracking({&a, &b});
  return make_result<T>(a.shape(), std::move(out), {a.shared(), b.shared()}, "mul", track, [n](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    Node<T>* pb = self.parents[1].get();
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) pa->grad[i] += self.grad[i] * pb->data[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) pb->grad[i] += self.grad[i] * pa->data[i];
    }
  });
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, double factor) {
  const T f = static_cast<T>(factor);
  std::vector<T> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= f;
  const bool track = tracking({&a});
  return make_result<T>(a.shape(), std::move(out), {a.shared()}, "scale", track, [f](Node<T>& self) {
    if (Node<T>* pa = grad_target(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += f * self.grad[i];
  });
}

template <class T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const TokenId> ids) {
  require(table.rank() == 2, "embedding table must be a matrix");
  const std::size_t v = table.size(0), h = table.size(1), t = ids.size();
  std::vector<TokenId> rows(ids.begin(), ids.end());
  std::vector<T> out(t * h);
  for (std::size_t i = 0; i < t; ++i) {
    const auto id = rows[i];
    if (id < 0 || static_cast<std::size_t>(id) >= v)
      throw ShapeError("token id " + std::to_string(id) + " outside embedding table of " + std::to_string(v));
    std::copy_n(table.ptr() + static_cast<std::size_t>(id) * h, h, out.data() + i * h);
  }
  const bool track = tracking({&table});
  return make_result<T>({t, h}, std::move(out), {table.shared()}, "embedding", track,
                        [rows = std::move(rows), h](Node<T>& self) {
                          Node<T>* pt = grad_target(self, 0);
                          if (!pt) return;
                          for (std::size_t i = 0; i < rows.size(); ++i) {
                            T* g = pt->grad.data() + static_cast<std::size_t>(rows[i]) * h;
                            const T* src = self.grad.data() + i * h;
                            for (std::size_t j = 0; j < h; ++j) g[j] += src[j];
                          }
                        });
}

template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps) {
  require(x.rank() >= 1, "layer_norm on scalar");
  const std::size_t cols = x.shape().back();
  require(gamma.numel() == cols && beta.numel() == cols, "layer_norm affine parameters must match last axis");
  const std::size_t rows = x.numel() / cols;
  std::vector<T> y(x.numel()), xhat(x.numel()), inv_std(rows);
  kernels::layer_norm_rows(x.ptr(), gamma.ptr(), beta.ptr(), y.data(), xhat.data(), inv_std.data(), rows, cols, eps);
  const bool track = tracking({&x, &gamma, &beta});
  return make_result<T>(
      x.shape(), std::move(y), {x.shared(), gamma.shared(), beta.shared()}, "layer_norm", track,
      [xhat = std::move(xhat), inv_std = std::move(inv_std), rows, cols](Node<T>& self) {
        Node<T>* px = self.parents[0].get();
        Node<T>* pg = self.parents[1].get();
        Node<T>* pb = self.parents[2].get();
        if (pg->requires_grad) pg->ensure_grad();
        if (pb->requires_grad) pb->ensure_grad();
        if (px->requires_grad) px->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) {
          const T* dy = self.grad.data() + r * cols;
          const T* xh = xhat.data() + r * cols;
          if (pg->requires_grad)
            for (std::size_t j = 0; j < cols; ++j) pg->grad[j] += dy[j] * xh[j];
          if (pb->requires_grad)
            for (std::size_t j = 0; j < cols; ++j) pb->grad[j] += dy[j];
          if (!px->requires_grad) continue;
          double s1 = 0.0, s2 = 0.0;
          for (std::size_t j = 0; j < cols; ++j) {
            const double g = static_cast<double>(dy[j]) * pg->data[j];
            s1 += g;
            s2 += g * xh[j];
          }
          s1 /= static_cast<double>(cols);
          s2 /= static_cast<double>(cols);
          T* dx = px->grad.data() + r * cols;
          for (std::size_t j = 0; j < cols; ++j) {
            const double g = static_cast<double>(dy[j]) * pg->data[j];
            dx[j] += static_cast<T>(inv_std[r] * (g - s1 - xh[j] * s2));
          }
        }
      });
}

template <class T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  const auto v = axis_view(x.shape(), axis);
  std::vector<T> y(x.numel());
  if (v.inner == 1) {
    kernels::softmax_rows(x.ptr(), y.data(), v.outer, v.len);
  } else {
    std::vector<T> col(v.len), out(v.len);
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t in = 0; in < v.inner; ++in) {
        for (std::size_t l = 0; l < v.len; ++l) col[l] = x.ptr()[(o * v.len + l) * v.inner + in];
        kernels::softmax_rows(col.data(), out.data(), 1, v.len);
        for (std::size_t l = 0; l < v.len; ++l) y[(o * v.len + l) * v.inner + in] = out[l];
      }
  }
  const bool track = tracking({&x});
  return make_result<T>(x.shape(), std::move(y), {x.shared()}, "softmax", track, [v](Node<T>& self) {
    Node<T>* px = grad_target(self, 0);
    if (!px) return;
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t in = 0; in < v.inner; ++in) {
        double dot = 0.0;
        for (std::size_t l = 0; l < v.len; ++l) {
          const auto i = (o * v.len + l) * v.inner + in;
          dot += static_cast<double>(self.grad[i]) * self.data[i];
        }
        for (std::size_t l = 0; l < v.len; ++l) {
          const auto i = (o * v.len + l) * v.inner + in;
          px->grad[i] += static_cast<T>(self.data[i] * (self.grad[i] - dot));
        }
      }
  });
}

template <class T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  return unary(
      x, "gelu",
      [](double v) { return 0.5 * v * (1.0 + std::tanh(c * (v + 0.044715 * v * v * v))); },
      [](double v, double) {
        const double u = c * (v + 0.044715 * v * v * v);
        const double th = std::tanh(u);
        const double du = c * (1.0 + 3.0 * 0.044715 * v * v);
        return 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * du;
      });
}

template <class T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary(x, "tanh", [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

template <class T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool train, Rng* rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("dropout probability must lie in [0, 1]");
  if (!train || p == 0.0) return x;
  if (!rng) throw std::invalid_argument("dropout in training mode needs an Rng");
  const std::size_t n = x.numel();
  std::vector<T> keep(n);
  const T s = p < 1.0 ? static_cast<T>(1.0 / (1.0 - p)) : T(0);
  for (auto& k : keep) k = rng->uniform() >= p ? s : T(0);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x.data()[i] * keep[i];
  const bool track = tracking({&x});
  return make_result<T>(x.shape(), std::move(out), {x.shared()}, "dropout", track,
                        [keep = std::move(keep)](Node<T>& self) {
                          if (Node<T>* px = grad_target(self, 0))
                            for (std::size_t i = 0; i < keep.size(); ++i) px->grad[i] += self.grad[i] * keep[i];
                        });
}

template <class T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  require(!parts.empty(), "concat of nothing");
  Shape shape = parts.front().shape();
  require(axis < shape.size(), "concat axis out of range");
  std::size_t total = 0;
  for (const auto& p : parts) {
    require(p.rank() == shape.size(), "concat rank mismatch");
    for (std::size_t d = 0; d < shape.size(); ++d)
      require(d == axis || p.size(d) == shape[d], "concat shape mismatch: " + to_string(p.shape()));
    total += p.size(axis);
  }
  shape[axis] = total;
  const auto v = axis_view(shape, axis);
  std::vector<T> out(numel(shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t len = p.size(axis);
    for (std::size_t o = 0; o < v.outer; ++o)
      std::copy_n(p.ptr() + o * len * v.inner, len * v.inner, out.data() + (o * v.len + off) * v.inner);
    off += len;
  }
  bool track = false;
  std::vector<std::shared_ptr<Node<T>>> parents;
  for (const auto& p : parts) {
    track = track || (GradMode::enabled() && p.requires_grad());
    parents.push_back(p.shared());
  }
  return make_result<T>(shape, std::move(out), std::move(parents), "concat", track,
                        [v, offsets = std::move(offsets)](Node<T>& self) {
                          for (std::size_t k = 0; k < self.parents.size(); ++k) {
                            Node<T>* p = grad_target(self, k);
                            if (!p) continue;
                            const std::size_t len = p->data.size() / (v.outer * v.inner);
                            for (std::size_t o = 0; o < v.outer; ++o) {
                              const T* src = self.grad.data() + (o * v.len + offsets[k]) * v.inner;
                              T* dst = p->grad.data() + o * len * v.inner;
                              for (std::size_t i = 0; i < len * v.inner; ++i) dst[i] += src[i];
                            }
                          }
                        });
}

template <class T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const auto v = axis_view(x.shape(), axis);
  require(begin < end && end <= v.len, "slice [" + std::to_string(begin) + "," + std::to_string(end) +
                                           ") out of range for shape " + to_string(x.shape()));
  Shape shape = x.shape();
  shape[axis] = end - begin;
  const std::size_t len = end - begin;
  std::vector<T> out(numel(shape));
  for (std::size_t o = 0; o < v.outer; ++o)
    std::copy_n(x.ptr() + (o * v.len + begin) * v.inner, len * v.inner, out.data() + o * len * v.inner);
  const bool track = tracking({&x});
  return make_result<T>(shape, std::move(out), {x.shared()}, "slice", track, [v, begin, len](Node<T>& self) {
    Node<T>* px = grad_target(self, 0);
    if (!px) return;
    for (std::size_t o = 0; o < v.outer; ++o) {
      const T* src = self.grad.data() + o * len * v.inner;
      T* dst = px->grad.data() + (o * v.len + begin) * v.inner;
      for (std::size_t i = 0; i < len * v.inner; ++i) dst[i] += src[i];
    }
  });
}

template <class T>
Tensor<T> causal_mask(const Tensor<T>& scores, std::optional<std::size_t> span) {
  require(scores.rank() == 2 && scores.size(0) <= scores.size(1), "causal_mask needs [Tq, Tk] with Tq <= Tk");
  if (span && *span == 0) throw std::invalid_argument("attention span must be at least 1");
  const std::size_t tq = scores.size(0), tk = scores.size(1), offset = tk - tq;
  std::vector<T> out(scores.data().begin(), scores.data().end());
  std::vector<std::uint8_t> allowed(out.size());
  for (std::size_t i = 0; i < tq; ++i) {
    const std::size_t q = i + offset;
    for (std::size_t k = 0; k < tk; ++k) {
      const bool ok = k <= q && (!span || q - k <= *span);
      allowed[i * tk + k] = ok;
      if (!ok) out[i * tk + k] = -std::numeric_limits<T>::infinity();
    }
  }
  const bool track = tracking({&scores});
  return make_result<T>(scores.shape(), std::move(out), {scores.shared()}, "causal_mask", track,
                        [allowed = std::move(allowed)](Node<T>& self) {
                          if (Node<T>* p = grad_target(self, 0))
                            for (std::size_t i = 0; i < allowed.size(); ++i)
                              if (allowed[i]) p->grad[i] += self.grad[i];
                        });
}

template <class T>
Tensor<T> cross_entropy_loss(const Tensor<T>& logits, std::span<const TokenId> targets,
                             std::span<const std::uint8_t> mask, double normalizer) {
  require(logits.rank() == 2 && logits.size(0) == targets.size(),
          "cross_entropy_loss: logits " + to_string(logits.shape()) + " vs " + std::to_string(targets.size()) +
              " targets");
  require(mask.empty() || mask.size() == targets.size(), "cross_entropy_loss: mask length mismatch");
  const std::size_t n = logits.size(0), v = logits.size(1);
  std::vector<T> probs(n * v);
  kernels::softmax_rows(logits.ptr(), probs.data(), n, v);
  std::vector<TokenId> tgt(targets.begin(), targets.end());
  std::vector<std::uint8_t> inc(n, 1);
  if (!mask.empty()) std::copy(mask.begin(), mask.end(), inc.begin());
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!inc[i]) continue;
    const auto t = tgt[i];
    if (t < 0 || static_cast<std::size_t>(t) >= v) throw ShapeError("target id out of range");
    const T* row = logits.ptr() + i * v;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < v; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double s = 0.0;
    for (std::size_t j = 0; j < v; ++j) s += std::exp(static_cast<double>(row[j]) - mx);
    total += mx + std::log(s) - static_cast<double>(row[t]);
    ++count;
  }
  const double denom = normalizer > 0.0 ? normalizer : static_cast<double>(std::max<std::size_t>(count, 1));
  const bool track = tracking({&logits});
  return make_result<T>({}, {static_cast<T>(total / denom)}, {logits.shared()}, "cross_entropy", track,
                        [probs = std::move(probs), tgt = std::move(tgt), inc = std::move(inc), v,
                         denom](Node<T>& self) {
                          Node<T>* p = grad_target(self, 0);
                          if (!p) return;
                          const double g = static_cast<double>(self.grad[0]) / denom;
                          for (std::size_t i = 0; i < tgt.size(); ++i) {
                            if (!inc[i]) continue;
                            T* dst = p->grad.data() + i * v;
                            const T* pr = probs.data() + i * v;
                            for (std::size_t j = 0; j < v; ++j) dst[j] += static_cast<T>(g * pr[j]);
                            dst[tgt[i]] -= static_cast<T>(g);
                          }
                        });
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  double s = 0.0;
  for (auto v : x.data()) s += v;
  const bool track = tracking({&x});
  return make_result<T>({}, {static_cast<T>(s)}, {x.shared()}, "sum", track, [](Node<T>& self) {
    if (Node<T>* p = grad_target(self, 0))
      for (auto& g : p->grad) g += self.grad[0];
  });
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

#define SONGLM_INSTANTIATE(T)                                                                           \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> transpose(const Tensor<T>&);                                                       \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                           \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                           \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                           \
  template Tensor<T> scale(const Tensor<T>&, double);                                                   \
  template Tensor<T> embedding(const Tensor<T>&, std::span<const TokenId>);                             \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double);          \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                            \
  template Tensor<T> gelu(const Tensor<T>&);                                                            \
  template Tensor<T> tanh(const Tensor<T>&);                                                            \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                         \
  template Tensor<T> dropout(const Tensor<T>&, double, bool, Rng*);                                     \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);                                \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t, std::size_t);                    \
  template Tensor<T> causal_mask(const Tensor<T>&, std::optional<std::size_t>);                         \
  template Tensor<T> cross_entropy_loss(const Tensor<T>&, std::span<const TokenId>,                     \
                                        std::span<const std::uint8_t>, double);                         \
  template Tensor<T> sum(const Tensor<T>&);                                                             \
  template Tensor<T> mean(const Tensor<T>&);

SONGLM_INSTANTIATE(float)
SONGLM_INSTANTIATE(double)
#undef SONGLM_INSTANTIATE

}  // namespace songlm::ag
