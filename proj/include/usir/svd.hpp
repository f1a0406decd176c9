#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "usir/errors.hpp"
#include "usir/operators.hpp"

namespace usir {

/// Spectral-domain coefficients of an image or measurement vector.
/// Components whose singular value vanishes carry no measurement
/// information and are flagged unobserved (coefficient stored as 0).
struct SpectralVector {
  std::vector<double> coefficients;
  std::vector<std::uint8_t> unobserved;
  std::array<int, 2> source_dims{0, 0}; // (rows, cols) of the source operator
};

/// SVD of a degradation operator with transforms usable without
/// materializing U or V at measurement scale. Spectral components are kept
/// in natural order: for the dense kind that is Eigen's decreasing-sigma
/// order; for the separable kind it is the Kronecker order
/// c = a * width + b over (axial a, lateral b) factor components.
class SvdFactorization {
public:
  enum class Kind { Dense, SeparableKronecker };

  /// Components with s < threshold * s_max are treated as unobserved.
  static constexpr double kUnobservedRelThreshold = 1e-10;

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] int num_components() const { return cols_; }

  /// Singular values in natural component order, padded with zeros up to
  /// the image dimension.
  [[nodiscard]] const std::vector<double>& singular_values() const {
    return s_;
  }

  [[nodiscard]] double max_singular_value() const { return s_max_; }

  [[nodiscard]] bool observed(int component) const {
    return s_[static_cast<std::size_t>(component)] >
           kUnobservedRelThreshold * s_max_;
  }

  [[nodiscard]] std::vector<int> components_by_decreasing_sigma() const {
    std::vector<int> order(static_cast<std::size_t>(cols_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return s_[static_cast<std::size_t>(a)] > s_[static_cast<std::size_t>(b)];
    });
    return order;
  }

  /// U^T y, padded with zeros for components beyond the operator rank
  /// support. Input length = rows().
  [[nodiscard]] std::vector<double> apply_ut(const std::vector<double>& y) const {
    if (static_cast<int>(y.size()) != rows_)
      throw DimensionError("SvdFactorization::apply_ut: input length != rows");
    if (kind_ == Kind::Dense) {
      std::vector<double> out(static_cast<std::size_t>(cols_), 0.0);
      Eigen::Map<const RowMat> u(u_.data(), rows_, m_);
      Eigen::Map<const Eigen::VectorXd> yv(y.data(), rows_);
      Eigen::Map<Eigen::VectorXd>(out.data(), m_) = u.transpose() * yv;
      return out;
    }
    return sandwich(u_ax_, u_lat_, y, true);
  }

  /// U w, using the first min(rows, cols) spectral entries. Output length
  /// = rows().
  [[nodiscard]] std::vector<double> apply_u(const std::vector<double>& w) const {
    if (static_cast<int>(w.size()) != cols_)
      throw DimensionError("SvdFactorization::apply_u: input length != cols");
    if (kind_ == Kind::Dense) {
      std::vector<double> out(static_cast<std::size_t>(rows_), 0.0);
      Eigen::Map<const RowMat> u(u_.data(), rows_, m_);
      Eigen::Map<const Eigen::VectorXd> wv(w.data(), m_);
      Eigen::Map<Eigen::VectorXd>(out.data(), rows_) = u * wv;
      return out;
    }
    return sandwich(u_ax_, u_lat_, w, false);
  }

  /// V^T x. Input and output length = cols().
  [[nodiscard]] std::vector<double> apply_vt(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols_)
      throw DimensionError("SvdFactorization::apply_vt: input length != cols");
    if (kind_ == Kind::Dense) {
      std::vector<double> out(static_cast<std::size_t>(cols_));
      Eigen::Map<const RowMat> v(v_.data(), cols_, cols_);
      Eigen::Map<const Eigen::VectorXd> xv(x.data(), cols_);
      Eigen::Map<Eigen::VectorXd>(out.data(), cols_) = v.transpose() * xv;
      return out;
    }
    return sandwich(v_ax_, v_lat_, x, true);
  }

  /// V xbar. Input and output length = cols().
  [[nodiscard]] std::vector<double> apply_v(const std::vector<double>& xb) const {
    if (static_cast<int>(xb.size()) != cols_)
      throw DimensionError("SvdFactorization::apply_v: input length != cols");
    if (kind_ == Kind::Dense) {
      std::vector<double> out(static_cast<std::size_t>(cols_));
      Eigen::Map<const RowMat> v(v_.data(), cols_, cols_);
      Eigen::Map<const Eigen::VectorXd> xv(xb.data(), cols_);
      Eigen::Map<Eigen::VectorXd>(out.data(), cols_) = v * xv;
      return out;
    }
    return sandwich(v_ax_, v_lat_, xb, false);
  }

  /// U S V^T x, for reconstruction checks against the source operator.
  [[nodiscard]] std::vector<double>
  apply_reconstructed(const std::vector<double>& x) const {
    std::vector<double> w = apply_vt(x);
    for (int c = 0; c < cols_; ++c)
      w[static_cast<std::size_t>(c)] *= s_[static_cast<std::size_t>(c)];
    return apply_u(w);
  }

  friend SvdFactorization svd_dense(const DenseOperator& op);
  friend SvdFactorization svd_separable(const SeparableOperator& op);

private:
  using RowMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SvdFactorization() = default;

  /// Kronecker-factor transform: (P (x) Q) x = vec_row(P X Q^T) for the
  /// depth x width row-major reshape X of x; transposed variant applies
  /// P^T, Q^T.
  [[nodiscard]] std::vector<double>
  sandwich(const std::vector<double>& p_ax, const std::vector<double>& q_lat,
           const std::vector<double>& x, bool transposed) const {
    std::vector<double> out(x.size());
    Eigen::Map<const RowMat> p(p_ax.data(), depth_, depth_);
    Eigen::Map<const RowMat> q(q_lat.data(), width_, width_);
    Eigen::Map<const RowMat> xm(x.data(), depth_, width_);
    Eigen::Map<RowMat> om(out.data(), depth_, width_);
    if (transposed)
      om = p.transpose() * xm * q;
    else
      om = p * xm * q.transpose();
    return out;
  }

  /// Flips signs so the first entry of each right singular vector with
  /// magnitude above 1e-12 is nonnegative; the matching U column (when it
  /// exists) is flipped with it.
  static void fix_signs(RowMat& u, RowMat& v) {
    for (int c = 0; c < v.cols(); ++c) {
      double lead = 0.0;
      for (int r = 0; r < v.rows(); ++r)
        if (std::abs(v(r, c)) > 1e-12) {
          lead = v(r, c);
          break;
        }
      if (lead < 0.0) {
        v.col(c) = -v.col(c);
        if (c < u.cols())
          u.col(c) = -u.col(c);
      }
    }
  }

  Kind kind_ = Kind::Dense;
  int rows_ = 0;
  int cols_ = 0;
  int m_ = 0; // min(rows, cols): stored U column count in the dense kind
  double s_max_ = 0.0;
  std::vector<double> s_; // natural order, length cols_

  // dense factors (row-major)
  std::vector<double> u_; // rows x m
  std::vector<double> v_; // cols x cols

  // separable factors (row-major, square)
  int depth_ = 0;
  int width_ = 0;
  std::vector<double> u_ax_, v_ax_, u_lat_, v_lat_;
};

inline SvdFactorization svd_dense(const DenseOperator& op) {
  using RowMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> a(op.entries.data(), op.rows, op.cols);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("svd_dense: decomposition did not converge");

  SvdFactorization f;
  f.kind_ = SvdFactorization::Kind::Dense;
  f.rows_ = op.rows;
  f.cols_ = op.cols;
  f.m_ = std::min(op.rows, op.cols);

  RowMat u = svd.matrixU();
  RowMat v = svd.matrixV();
  SvdFactorization::fix_signs(u, v);

  f.s_.assign(static_cast<std::size_t>(f.cols_), 0.0);
  for (int i = 0; i < f.m_; ++i)
    f.s_[static_cast<std::size_t>(i)] = svd.singularValues()(i);
  f.s_max_ = f.s_.empty() ? 0.0 : *std::max_element(f.s_.begin(), f.s_.end());

  f.u_.assign(u.data(), u.data() + u.size());
  f.v_.assign(v.data(), v.data() + v.size());
  return f;
}

inline SvdFactorization svd_separable(const SeparableOperator& op) {
  using RowMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const DenseOperator ax = conv_matrix_1d(op.axial_kernel, op.grid.depth_px);
  const DenseOperator lat = conv_matrix_1d(op.lateral_kernel, op.grid.width_px);

  const auto factor = [](const DenseOperator& m1d, RowMat& u, RowMat& v,
                         Eigen::VectorXd& s) {
    Eigen::Map<const RowMat> a(m1d.entries.data(), m1d.rows, m1d.cols);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success)
      throw NumericalError("svd_separable: 1-D factor did not converge");
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
    SvdFactorization::fix_signs(u, v);
  };

  RowMat u_ax, v_ax, u_lat, v_lat;
  Eigen::VectorXd s_ax, s_lat;
  factor(ax, u_ax, v_ax, s_ax);
  factor(lat, u_lat, v_lat, s_lat);

  SvdFactorization f;
  f.kind_ = SvdFactorization::Kind::SeparableKronecker;
  f.depth_ = op.grid.depth_px;
  f.width_ = op.grid.width_px;
  f.rows_ = f.depth_ * f.width_;
  f.cols_ = f.rows_;
  f.m_ = f.cols_;

  f.s_.resize(static_cast<std::size_t>(f.cols_));
  for (int a = 0; a < f.depth_; ++a)
    for (int b = 0; b < f.width_; ++b)
      f.s_[static_cast<std::size_t>(a) * f.width_ + b] = s_ax(a) * s_lat(b);
  f.s_max_ = *std::max_element(f.s_.begin(), f.s_.end());

  f.u_ax_.assign(u_ax.data(), u_ax.data() + u_ax.size());
  f.v_ax_.assign(v_ax.data(), v_ax.data() + v_ax.size());
  f.u_lat_.assign(u_lat.data(), u_lat.data() + u_lat.size());
  f.v_lat_.assign(v_lat.data(), v_lat.data() + v_lat.size());
  return f;
}

/// Measurement-side spectral transform ybar = S^+ U^T y; zero-singular
/// components are flagged unobserved with coefficient 0.
inline SpectralVector to_spectral(const SvdFactorization& f,
                                  const std::vector<double>& y) {
  std::vector<double> w = f.apply_ut(y);
  SpectralVector out;
  out.coefficients.resize(w.size());
  out.unobserved.resize(w.size());
  out.source_dims = {f.rows(), f.cols()};
  const std::vector<double>& s = f.singular_values();
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (f.observed(static_cast<int>(c))) {
      out.coefficients[c] = w[c] / s[c];
      out.unobserved[c] = 0;
    } else {
      out.coefficients[c] = 0.0;
      out.unobserved[c] = 1;
    }
  }
  return out;
}

/// Image-side spectral transform xbar = V^T x.
inline SpectralVector to_spectral_image(const SvdFactorization& f,
                                        const std::vector<double>& x) {
  SpectralVector out;
  out.coefficients = f.apply_vt(x);
  out.unobserved.assign(out.coefficients.size(), 0);
  out.source_dims = {f.rows(), f.cols()};
  return out;
}

/// Back-transform x = V xbar.
inline std::vector<double> from_spectral(const SvdFactorization& f,
                                         const SpectralVector& xb) {
  return f.apply_v(xb.coefficients);
}

} // namespace usir
