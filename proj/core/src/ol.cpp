#include "stenfuse/ol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace stenfuse::ol {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Binding {
  std::string var;
  long value;
};
using Env = std::vector<Binding>;

long lookup(const Env& env, const std::string& var) {
  for (auto it = env.rbegin(); it != env.rend(); ++it) {
    if (it->var == var) return it->value;
  }
  throw ShapeError("unbound loop variable '" + var + "'");
}

[[noreturn]] void mismatch(const char* node, const std::string& detail) {
  throw ShapeError(std::string(node) + ": " + detail);
}

std::size_t checked_index(long idx, std::size_t bound, const char* node) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= bound) {
    throw DomainError(std::string(node) + ": index " + std::to_string(idx) + " outside [0, " +
                      std::to_string(bound) + ")");
  }
  return static_cast<std::size_t>(idx);
}

// Zero coefficients contribute nothing and are skipped, so a sum is formed
// from the first nonzero term onward, left to right.
class LinComb {
 public:
  void add(double c, double x) {
    if (c == 0.0) return;
    acc_ = started_ ? acc_ + c * x : c * x;
    started_ = true;
  }
  double value() const { return started_ ? acc_ : 0.0; }

 private:
  double acc_ = 0.0;
  bool started_ = false;
};

std::vector<double> eval_in(const Expr& e, std::span<const double> x, Env& env);

std::vector<double> eval_node(const NodeVariant& node, std::span<const double> x, Env& env) {
  return std::visit(
      overloaded{
          [&](const ComposeNode& n) {
            auto mid = eval_in(n.inner, x, env);
            return eval_in(n.outer, mid, env);
          },
          [&](const DirectSumNode& n) {
            const std::size_t split = n.first.shape().cols;
            auto a = eval_in(n.first, x.subspan(0, split), env);
            auto b = eval_in(n.second, x.subspan(split), env);
            a.insert(a.end(), b.begin(), b.end());
            return a;
          },
          [&](const TensorNode& n) {
            const auto& row = n.row.as<RowVecNode>()->coeffs;
            const std::size_t k = n.identity.as<IdentityNode>()->size;
            std::vector<double> y(k);
            for (std::size_t i = 0; i < k; ++i) {
              LinComb acc;
              for (std::size_t r = 0; r < row.size(); ++r) acc.add(row[r], x[r * k + i]);
              y[i] = acc.value();
            }
            return y;
          },
          [&](const VStackNode& n) {
            auto a = eval_in(n.top, x, env);
            auto b = eval_in(n.bottom, x, env);
            a.insert(a.end(), b.begin(), b.end());
            return a;
          },
          [&](const IterVStackNode& n) {
            std::vector<double> y;
            for (std::size_t i = 0; i < n.count; ++i) {
              env.push_back({n.var, static_cast<long>(i)});
              auto part = eval_in(n.body, x, env);
              env.pop_back();
              y.insert(y.end(), part.begin(), part.end());
            }
            return y;
          },
          [&](const IdentityNode&) { return std::vector<double>(x.begin(), x.end()); },
          [&](const PointwiseNode& n) {
            std::vector<double> y(x.size());
            std::transform(x.begin(), x.end(), y.begin(), [&](double v) { return apply(n.fn, v); });
            return y;
          },
          [&](const RowVecNode& n) {
            LinComb acc;
            for (std::size_t r = 0; r < n.coeffs.size(); ++r) acc.add(n.coeffs[r], x[r]);
            return std::vector<double>{acc.value()};
          },
          [&](const GatherNode& n) {
            std::vector<double> y(n.out);
            for (std::size_t k = 0; k < n.out; ++k) {
              y[k] = x[checked_index(n.map(static_cast<long>(k)), n.in, "Gather")];
            }
            return y;
          },
          [&](const ScatterNode& n) {
            std::vector<double> y(n.out, 0.0);
            for (std::size_t k = 0; k < n.in; ++k) {
              y[checked_index(n.map(static_cast<long>(k)), n.out, "Scatter")] = x[k];
            }
            return y;
          },
          [&](const FiltNode& n) {
            const long c = n.center(lookup(env, n.var));
            const long stride = static_cast<long>(n.row_stride);
            LinComb acc;
            for (long dy = -1; dy <= 1; ++dy) {
              for (long dx = -1; dx <= 1; ++dx) {
                const std::size_t idx = checked_index(c + dy * stride + dx, n.in, "Filt");
                acc.add(n.taps[static_cast<std::size_t>((dy + 1) * 3 + dx + 1)], x[idx]);
              }
            }
            return std::vector<double>{acc.value()};
          },
          [&](const MaxReduceNode&) {
            return std::vector<double>{*std::max_element(x.begin(), x.end())};
          },
      },
      node);
}

std::vector<double> eval_in(const Expr& e, std::span<const double> x, Env& env) {
  const Shape s = e.shape();
  if (x.size() != s.cols) {
    throw ShapeError(std::string(e.kind()) + ": input length " + std::to_string(x.size()) +
                     " does not match shape " + s.str());
  }
  return eval_node(e.node(), x, env);
}

void pretty_into(const Expr& e, int depth, std::ostringstream& os) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::string shape;
  try {
    shape = e.shape().str();
  } catch (const ShapeError&) {
    shape = "ill-shaped";
  }
  os << pad << e.kind();
  std::visit(overloaded{
                 [&](const IterVStackNode& n) { os << ' ' << n.var << "<" << n.count; },
                 [&](const IdentityNode& n) { os << ' ' << n.size; },
                 [&](const PointwiseNode& n) { os << ' ' << to_string(n.fn); },
                 [&](const RowVecNode& n) {
                   os << " (";
                   for (std::size_t i = 0; i < n.coeffs.size(); ++i) os << (i ? ", " : "") << n.coeffs[i];
                   os << ')';
                 },
                 [&](const GatherNode& n) { os << " k -> " << n.map.str("k"); },
                 [&](const ScatterNode& n) { os << " k -> " << n.map.str("k"); },
                 [&](const FiltNode& n) {
                   os << " [";
                   for (std::size_t i = 0; i < 9; ++i) os << (i ? "," : "") << n.taps[i];
                   os << "] at " << n.center.str(n.var) << " stride " << n.row_stride;
                 },
                 [&](const auto&) {},
             },
             e.node());
  os << "  : " << shape << '\n';
  std::visit(overloaded{
                 [&](const ComposeNode& n) {
                   pretty_into(n.outer, depth + 1, os);
                   pretty_into(n.inner, depth + 1, os);
                 },
                 [&](const DirectSumNode& n) {
                   pretty_into(n.first, depth + 1, os);
                   pretty_into(n.second, depth + 1, os);
                 },
                 [&](const TensorNode& n) {
                   pretty_into(n.row, depth + 1, os);
                   pretty_into(n.identity, depth + 1, os);
                 },
                 [&](const VStackNode& n) {
                   pretty_into(n.top, depth + 1, os);
                   pretty_into(n.bottom, depth + 1, os);
                 },
                 [&](const IterVStackNode& n) { pretty_into(n.body, depth + 1, os); },
                 [&](const auto&) {},
             },
             e.node());
}

}  // namespace

std::string Shape::str() const { return "(" + std::to_string(rows) + " x " + std::to_string(cols) + ")"; }

std::string IndexExpr::str(const std::string& var) const {
  std::string s;
  auto term = [&](long c, const std::string& t) {
    if (c == 0) return;
    if (!s.empty()) s += c < 0 ? " - " : " + ";
    else if (c < 0) s += "-";
    const long a = c < 0 ? -c : c;
    s += a == 1 ? t : std::to_string(a) + "*" + t;
  };
  term(coef, var);
  term(coef_div, "(" + var + " div " + std::to_string(divisor) + ")");
  term(coef_mod, "(" + var + " mod " + std::to_string(divisor) + ")");
  if (offset != 0 || s.empty()) {
    if (s.empty()) s = std::to_string(offset);
    else s += (offset < 0 ? " - " : " + ") + std::to_string(offset < 0 ? -offset : offset);
  }
  return s;
}

const char* to_string(PointwiseFn fn) {
  switch (fn) {
    case PointwiseFn::Abs: return "abs";
  }
  return "?";
}

double apply(PointwiseFn fn, double x) {
  switch (fn) {
    case PointwiseFn::Abs: return std::fabs(x);
  }
  return x;
}

Expr::Expr(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

const char* Expr::kind() const {
  return std::visit(overloaded{
                        [](const ComposeNode&) { return "Compose"; },
                        [](const DirectSumNode&) { return "DirectSum"; },
                        [](const TensorNode&) { return "Tensor"; },
                        [](const VStackNode&) { return "VStack"; },
                        [](const IterVStackNode&) { return "IterVStack"; },
                        [](const IdentityNode&) { return "Identity"; },
                        [](const PointwiseNode&) { return "Pointwise"; },
                        [](const RowVecNode&) { return "RowVec"; },
                        [](const GatherNode&) { return "Gather"; },
                        [](const ScatterNode&) { return "Scatter"; },
                        [](const FiltNode&) { return "Filt"; },
                        [](const MaxReduceNode&) { return "MaxReduce"; },
                    },
                    node_->v);
}

Shape Expr::shape() const {
  return std::visit(
      overloaded{
          [](const ComposeNode& n) {
            const Shape a = n.outer.shape();
            const Shape b = n.inner.shape();
            if (a.cols != b.rows) {
              mismatch("Compose", "outer " + a.str() + " cannot follow inner " + b.str());
            }
            return Shape{a.rows, b.cols};
          },
          [](const DirectSumNode& n) {
            const Shape a = n.first.shape();
            const Shape b = n.second.shape();
            return Shape{a.rows + b.rows, a.cols + b.cols};
          },
          [](const TensorNode& n) {
            if (!n.row.as<RowVecNode>() || !n.identity.as<IdentityNode>()) {
              mismatch("Tensor", std::string("only RowVec (x) Identity is supported, got ") +
                                     n.row.kind() + " (x) " + n.identity.kind());
            }
            const Shape a = n.row.shape();
            const Shape b = n.identity.shape();
            return Shape{a.rows * b.rows, a.cols * b.cols};
          },
          [](const VStackNode& n) {
            const Shape a = n.top.shape();
            const Shape b = n.bottom.shape();
            if (a.cols != b.cols) {
              mismatch("VStack", "top " + a.str() + " and bottom " + b.str() + " differ in columns");
            }
            return Shape{a.rows + b.rows, a.cols};
          },
          [](const IterVStackNode& n) {
            const Shape b = n.body.shape();
            return Shape{b.rows * n.count, b.cols};
          },
          [](const IdentityNode& n) { return Shape{n.size, n.size}; },
          [](const PointwiseNode& n) { return Shape{n.rows * n.cols, n.rows * n.cols}; },
          [](const RowVecNode& n) {
            if (n.coeffs.empty()) mismatch("RowVec", "no entries");
            return Shape{1, n.coeffs.size()};
          },
          [](const GatherNode& n) { return Shape{n.out, n.in}; },
          [](const ScatterNode& n) { return Shape{n.out, n.in}; },
          [](const FiltNode& n) {
            if (n.row_stride == 0) mismatch("Filt", "row stride must be positive");
            return Shape{1, n.in};
          },
          [](const MaxReduceNode& n) {
            if (n.in == 0) mismatch("MaxReduce", "empty input");
            return Shape{1, n.in};
          },
      },
      node_->v);
}

Expr compose(Expr outer, Expr inner) { return Expr(Node{ComposeNode{std::move(outer), std::move(inner)}}); }
Expr direct_sum(Expr first, Expr second) { return Expr(Node{DirectSumNode{std::move(first), std::move(second)}}); }
Expr tensor(Expr row, Expr identity) { return Expr(Node{TensorNode{std::move(row), std::move(identity)}}); }
Expr vstack(Expr top, Expr bottom) { return Expr(Node{VStackNode{std::move(top), std::move(bottom)}}); }
Expr iter_vstack(Expr body, std::size_t count, std::string var) {
  return Expr(Node{IterVStackNode{std::move(body), count, std::move(var)}});
}
Expr identity(std::size_t size) { return Expr(Node{IdentityNode{size}}); }
Expr pointwise(PointwiseFn fn, std::size_t rows, std::size_t cols) { return Expr(Node{PointwiseNode{fn, rows, cols}}); }
Expr row_vec(std::vector<double> coeffs) { return Expr(Node{RowVecNode{std::move(coeffs)}}); }
Expr gather(IndexExpr map, std::size_t out, std::size_t in) { return Expr(Node{GatherNode{map, out, in}}); }
Expr scatter(IndexExpr map, std::size_t out, std::size_t in) { return Expr(Node{ScatterNode{map, out, in}}); }
Expr filt(const std::array<double, 9>& taps, std::size_t in, std::size_t row_stride, IndexExpr center,
          std::string var) {
  return Expr(Node{FiltNode{taps, in, row_stride, center, std::move(var)}});
}
Expr max_reduce(std::size_t in) { return Expr(Node{MaxReduceNode{in}}); }

std::vector<double> eval(const Expr& e, std::span<const double> x) {
  Env env;
  return eval_in(e, x, env);
}

bool is_linear(const Expr& e) {
  return std::visit(overloaded{
                        [](const ComposeNode& n) { return is_linear(n.outer) && is_linear(n.inner); },
                        [](const DirectSumNode& n) { return is_linear(n.first) && is_linear(n.second); },
                        [](const TensorNode& n) { return is_linear(n.row) && is_linear(n.identity); },
                        [](const VStackNode& n) { return is_linear(n.top) && is_linear(n.bottom); },
                        [](const IterVStackNode& n) { return is_linear(n.body); },
                        [](const PointwiseNode&) { return false; },
                        [](const MaxReduceNode&) { return false; },
                        [](const auto&) { return true; },
                    },
                    e.node());
}

std::vector<double> DenseMatrix::operator*(std::span<const double> x) const {
  if (x.size() != cols) {
    throw ShapeError("dense product: vector length " + std::to_string(x.size()) + " vs " +
                     std::to_string(cols) + " columns");
  }
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += (*this)(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

DenseMatrix to_dense(const Expr& e) {
  if (!is_linear(e)) throw NonlinearError(std::string("to_dense: expression contains a nonlinear node"));
  const Shape s = e.shape();
  DenseMatrix m(s.rows, s.cols);
  std::vector<double> basis(s.cols, 0.0);
  for (std::size_t c = 0; c < s.cols; ++c) {
    basis[c] = 1.0;
    const auto col = eval(e, basis);
    for (std::size_t r = 0; r < s.rows; ++r) m(r, c) = col[r];
    basis[c] = 0.0;
  }
  return m;
}

std::string pretty(const Expr& e) {
  std::ostringstream os;
  pretty_into(e, 0, os);
  return os.str();
}

}  // namespace stenfuse::ol
