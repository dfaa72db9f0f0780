#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stenfuse/errors.hpp"

namespace stenfuse::ol {

/// Operator A: R^cols -> R^rows.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// offset + coef*v + coef_div*(v div divisor) + coef_mod*(v mod divisor).
/// The index forms that show up in gather/scatter maps over a loop variable v.
struct IndexExpr {
  long offset = 0;
  long coef = 0;
  long coef_div = 0;
  long coef_mod = 0;
  long divisor = 1;

  static IndexExpr constant(long c) { return {c, 0, 0, 0, 1}; }
  static IndexExpr identity() { return {0, 1, 0, 0, 1}; }
  /// Ordinal of interior point v of an n x n box inside its m-wide ghosted
  /// allocation, plus `shift`: m*(v div n) + (v mod n) + shift.
  static IndexExpr box_interior(long n, long m, long shift) { return {shift, 0, m, 1, n}; }

  long operator()(long v) const {
    return offset + coef * v + coef_div * (v / divisor) + coef_mod * (v % divisor);
  }
  IndexExpr plus(long d) const {
    IndexExpr e = *this;
    e.offset += d;
    return e;
  }
  /// Same non-constant part.
  bool same_base(const IndexExpr& o) const {
    return coef == o.coef && coef_div == o.coef_div && coef_mod == o.coef_mod &&
           (divisor == o.divisor || (coef_div == 0 && coef_mod == 0));
  }
  bool operator==(const IndexExpr&) const = default;
  std::string str(const std::string& var) const;
};

enum class PointwiseFn { Abs };

const char* to_string(PointwiseFn fn);
double apply(PointwiseFn fn, double x);

class Expr;

struct ComposeNode;
struct DirectSumNode;
struct TensorNode;
struct VStackNode;
struct IterVStackNode;
struct IdentityNode;
struct PointwiseNode;
struct RowVecNode;
struct GatherNode;
struct ScatterNode;
struct FiltNode;
struct MaxReduceNode;

using NodeVariant = std::variant<ComposeNode, DirectSumNode, TensorNode, VStackNode, IterVStackNode,
                          IdentityNode, PointwiseNode, RowVecNode, GatherNode, ScatterNode,
                          FiltNode, MaxReduceNode>;
struct Node;

/// Immutable, shareable handle to an operator-language expression tree.
/// Construction never validates; shape() does.
class Expr {
 public:
  explicit Expr(Node node);

  const NodeVariant& node() const;
  template <typename T>
  const T* as() const;

  /// Recursively checks dimension constraints. Throws ShapeError.
  Shape shape() const;
  const char* kind() const;

 private:
  std::shared_ptr<const Node> node_;
};

struct ComposeNode {
  Expr outer;  // applied second
  Expr inner;  // applied first
};
struct DirectSumNode {
  Expr first;
  Expr second;
};
/// RowVec (x) Identity; the only tensor form needed.
struct TensorNode {
  Expr row;
  Expr identity;
};
struct VStackNode {
  Expr top;
  Expr bottom;
};
/// Stacks `count` instances of body, with `var` bound to 0..count-1.
struct IterVStackNode {
  Expr body;
  std::size_t count;
  std::string var;
};
struct IdentityNode {
  std::size_t size;
};
/// Elementwise fn over a rows x cols block (shape (rows*cols, rows*cols)).
struct PointwiseNode {
  PointwiseFn fn;
  std::size_t rows;
  std::size_t cols;
};
struct RowVecNode {
  std::vector<double> coeffs;
};
/// y[k] = x[map(k)] for k < out.
struct GatherNode {
  IndexExpr map;
  std::size_t out;
  std::size_t in;
};
/// y[map(k)] = x[k] for k < in; every other y is 0.
struct ScatterNode {
  IndexExpr map;
  std::size_t out;
  std::size_t in;
};
/// 1 x in row: the 3x3 filter (row-major, row = second index) applied to the
/// neighborhood of `center` in an array with the given row stride. `center`
/// is an index expression in the enclosing loop variable `var`.
struct FiltNode {
  std::array<double, 9> taps;
  std::size_t in;
  std::size_t row_stride;
  IndexExpr center;
  std::string var;
};
/// 1 x in: [max_i x_i].
struct MaxReduceNode {
  std::size_t in;
};

struct Node {
  NodeVariant v;
};

inline const NodeVariant& Expr::node() const { return node_->v; }

template <typename T>
const T* Expr::as() const {
  return std::get_if<T>(&node_->v);
}

Expr compose(Expr outer, Expr inner);
Expr direct_sum(Expr first, Expr second);
Expr tensor(Expr row, Expr identity);
Expr vstack(Expr top, Expr bottom);
Expr iter_vstack(Expr body, std::size_t count, std::string var);
Expr identity(std::size_t size);
Expr pointwise(PointwiseFn fn, std::size_t rows, std::size_t cols);
Expr row_vec(std::vector<double> coeffs);
Expr gather(IndexExpr map, std::size_t out, std::size_t in);
Expr scatter(IndexExpr map, std::size_t out, std::size_t in);
Expr filt(const std::array<double, 9>& taps, std::size_t in, std::size_t row_stride, IndexExpr center,
          std::string var);
Expr max_reduce(std::size_t in);

/// Functional evaluation. Throws ShapeError on length mismatch and
/// DomainError on an out-of-range index map.
std::vector<double> eval(const Expr& e, std::span<const double> x);

/// True when no Pointwise or MaxReduce node occurs.
bool is_linear(const Expr& e);

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::vector<double> operator*(std::span<const double> x) const;
  bool operator==(const DenseMatrix&) const = default;
};

/// Matrix of a linear expression, column by column from basis vectors.
/// Throws NonlinearError if the expression is not linear.
DenseMatrix to_dense(const Expr& e);

/// One node per line, two-space indent per level.
std::string pretty(const Expr& e);

// Poisson pipeline builders. `filter` is a flattened 3x3 tap block.

/// Scatter_{n^2} o [Filt(filter)]_{i<n^2} over an m x m ghosted patch.
Expr build_laplace(std::size_t n, std::size_t m, const std::array<double, 9>& filter);
/// Picks the n^2 interior values out of an m x m ghosted patch.
Expr build_interior(std::size_t n, std::size_t m);
/// (1, w, -lambda) (x) I_{n^2}.
Expr build_jacobi(std::size_t n, double w, double lambda);
/// Max o pw_abs o (0, 1/h^2, -1) (x) I_{n^2}.
Expr build_maxnorm(std::size_t n, double h);
/// [Jacobi ; MaxNorm] o ([Interior ; Laplace] (+) I_{n^2}), acting on
/// X = (ghosted phi, m^2 | rho, n^2) and producing (phi', n^2 | residual, 1).
Expr build_poisson(std::size_t n, std::size_t m, double w, double lambda, double h,
                   const std::array<double, 9>& filter);
/// Same with the 5-point Laplacian filter.
Expr build_poisson(std::size_t n, std::size_t m, double w, double lambda, double h);

std::array<double, 9> laplacian_filter();

}  // namespace stenfuse::ol
