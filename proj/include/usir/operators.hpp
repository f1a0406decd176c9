#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"

namespace usir {

/// Row-major dense linear operator y = H x.
struct DenseOperator {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries; // entries[r * cols + c]

  DenseOperator() = default;
  DenseOperator(int rows_, int cols_)
      : rows(rows_), cols(cols_),
        entries(static_cast<std::size_t>(rows_) * cols_, 0.0) {
    if (rows_ < 1 || cols_ < 1)
      throw DimensionError("DenseOperator: rows and cols must be >= 1");
  }

  [[nodiscard]] double& at(int r, int c) {
    return entries[static_cast<std::size_t>(r) * cols + c];
  }
  [[nodiscard]] double at(int r, int c) const {
    return entries[static_cast<std::size_t>(r) * cols + c];
  }

  [[nodiscard]] std::vector<double> apply(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols)
      throw DimensionError("DenseOperator::apply: input length != cols");
    std::vector<double> y(static_cast<std::size_t>(rows));
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::RowMajor>;
    Eigen::Map<const Mat> h(entries.data(), rows, cols);
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), cols);
    Eigen::Map<Eigen::VectorXd>(y.data(), rows) = h * xv;
    return y;
  }

  [[nodiscard]] std::vector<double>
  adjoint_apply(const std::vector<double>& y) const {
    if (static_cast<int>(y.size()) != rows)
      throw DimensionError("DenseOperator::adjoint_apply: input length != rows");
    std::vector<double> x(static_cast<std::size_t>(cols));
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::RowMajor>;
    Eigen::Map<const Mat> h(entries.data(), rows, cols);
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), rows);
    Eigen::Map<Eigen::VectorXd>(x.data(), cols) = h.transpose() * yv;
    return x;
  }

  [[nodiscard]] static DenseOperator identity(int n) {
    DenseOperator op(n, n);
    for (int i = 0; i < n; ++i)
      op.at(i, i) = 1.0;
    return op;
  }
};

/// Dense product a * b.
inline DenseOperator matmul(const DenseOperator& a, const DenseOperator& b) {
  if (a.cols != b.rows)
    throw DimensionError("matmul: inner dimensions differ");
  DenseOperator out(a.rows, b.cols);
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>;
  Eigen::Map<const Mat> am(a.entries.data(), a.rows, a.cols);
  Eigen::Map<const Mat> bm(b.entries.data(), b.rows, b.cols);
  Eigen::Map<Mat>(out.entries.data(), out.rows, out.cols) = am * bm;
  return out;
}

/// Zero-padded 1-D convolution as a dense n x n matrix. The kernel must have
/// odd length; its center tap lands on the diagonal.
inline DenseOperator conv_matrix_1d(const std::vector<double>& kernel, int n) {
  if (kernel.empty() || kernel.size() % 2 == 0)
    throw ValidationError("conv_matrix_1d: kernel length must be odd");
  if (n < 1)
    throw DimensionError("conv_matrix_1d: n must be >= 1");
  const int half = static_cast<int>(kernel.size()) / 2;
  DenseOperator op(n, n);
  for (int r = 0; r < n; ++r)
    for (int k = -half; k <= half; ++k) {
      const int c = r + k;
      if (c >= 0 && c < n)
        op.at(r, c) = kernel[static_cast<std::size_t>(k + half)];
    }
  return op;
}

/// Separable image-domain blur: an axial (depth) kernel applied down the
/// columns and a lateral kernel applied across the rows, both zero-padded.
/// Equivalent dense form is kron(A_ax, A_lat) under the row-major
/// depth-major pixel order.
struct SeparableOperator {
  std::vector<double> axial_kernel;   // odd length, acts along z
  std::vector<double> lateral_kernel; // odd length, acts along x
  ImageGrid grid;

  SeparableOperator(std::vector<double> axial, std::vector<double> lateral,
                    const ImageGrid& grid_)
      : axial_kernel(std::move(axial)), lateral_kernel(std::move(lateral)),
        grid(grid_) {
    if (axial_kernel.empty() || axial_kernel.size() % 2 == 0)
      throw ValidationError("SeparableOperator: axial kernel length must be odd");
    if (lateral_kernel.empty() || lateral_kernel.size() % 2 == 0)
      throw ValidationError(
          "SeparableOperator: lateral kernel length must be odd");
  }

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(grid.width_px) * grid.depth_px;
  }

  [[nodiscard]] std::vector<double> apply(const std::vector<double>& x) const {
    return convolve_both(x, false);
  }

  /// Adjoint of zero-padded convolution is correlation, i.e. convolution
  /// with the reversed kernels.
  [[nodiscard]] std::vector<double>
  adjoint_apply(const std::vector<double>& y) const {
    return convolve_both(y, true);
  }

  [[nodiscard]] DenseOperator materialize() const {
    const DenseOperator ax = conv_matrix_1d(axial_kernel, grid.depth_px);
    const DenseOperator lat = conv_matrix_1d(lateral_kernel, grid.width_px);
    const int n = static_cast<int>(size());
    DenseOperator op(n, n);
    for (int ra = 0; ra < ax.rows; ++ra)
      for (int rl = 0; rl < lat.rows; ++rl)
        for (int ca = 0; ca < ax.cols; ++ca)
          for (int cl = 0; cl < lat.cols; ++cl)
            op.at(ra * grid.width_px + rl, ca * grid.width_px + cl) =
                ax.at(ra, ca) * lat.at(rl, cl);
    return op;
  }

private:
  [[nodiscard]] std::vector<double>
  convolve_both(const std::vector<double>& x, bool adjoint) const {
    if (x.size() != size())
      throw DimensionError("SeparableOperator: input length != grid size");
    const int w = grid.width_px;
    const int d = grid.depth_px;
    std::vector<double> tmp(x.size(), 0.0);
    std::vector<double> out(x.size(), 0.0);
    // lateral pass (within each row)
    const int lh = static_cast<int>(lateral_kernel.size()) / 2;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int k = -lh; k <= lh; ++k) {
          const int src = c + k;
          if (src < 0 || src >= w)
            continue;
          const int tap = adjoint ? lh - k : lh + k;
          acc += lateral_kernel[static_cast<std::size_t>(tap)] *
                 x[static_cast<std::size_t>(r) * w + src];
        }
        tmp[static_cast<std::size_t>(r) * w + c] = acc;
      }
    // axial pass (within each column)
    const int ah = static_cast<int>(axial_kernel.size()) / 2;
    for (int c = 0; c < w; ++c)
      for (int r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int k = -ah; k <= ah; ++k) {
          const int src = r + k;
          if (src < 0 || src >= d)
            continue;
          const int tap = adjoint ? ah - k : ah + k;
          acc += axial_kernel[static_cast<std::size_t>(tap)] *
                 tmp[static_cast<std::size_t>(src) * w + c];
        }
        out[static_cast<std::size_t>(r) * w + c] = acc;
      }
    return out;
  }
};

/// Unit-sum Gaussian lateral kernel sampled at the grid's lateral pitch,
/// truncated at 3 sigma, odd length.
inline std::vector<double> gaussian_lateral_kernel(double sigma_mm,
                                                   double pitch_mm) {
  if (!(sigma_mm > 0.0) || !(pitch_mm > 0.0))
    throw ValidationError("gaussian_lateral_kernel: sigma and pitch must be > 0");
  const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_mm / pitch_mm)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double u = i * pitch_mm / sigma_mm;
    kernel[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * u * u);
    sum += kernel[static_cast<std::size_t>(i + half)];
  }
  for (double& v : kernel)
    v /= sum;
  return kernel;
}

/// Unit-L2 modulated axial kernel: cosine at the round-trip spatial
/// frequency 2 f0 / c under a Gaussian envelope, truncated at 3 sigma.
inline std::vector<double> modulated_axial_kernel(double sigma_mm,
                                                  double pitch_mm,
                                                  double carrier_hz,
                                                  double sound_speed_m_per_s) {
  if (!(sigma_mm > 0.0) || !(pitch_mm > 0.0))
    throw ValidationError("modulated_axial_kernel: sigma and pitch must be > 0");
  if (!(carrier_hz > 0.0) || !(sound_speed_m_per_s > 0.0))
    throw ValidationError(
        "modulated_axial_kernel: carrier and sound speed must be > 0");
  // [1/mm] spatial frequency of the received oscillation along depth
  const double freq_per_mm = 2.0 * carrier_hz / (sound_speed_m_per_s * 1e3);
  const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_mm / pitch_mm)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double sq = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double z = i * pitch_mm;
    const double u = z / sigma_mm;
    const double v = std::cos(2.0 * std::numbers::pi * freq_per_mm * z) *
                     std::exp(-0.5 * u * u);
    kernel[static_cast<std::size_t>(i + half)] = v;
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  for (double& v : kernel)
    v /= norm;
  return kernel;
}

} // namespace usir
