#pragma once

#include "cw/form.hpp"

namespace cw {

/// rows x cols matrix of forms of one common degree on one chart.
/// Degree-0 instances double as sampled matrix fields.
class MatrixForm {
public:
    MatrixForm() = default;
    MatrixForm(ChartPtr chart, int rows, int cols, int degree);

    static MatrixForm identity(ChartPtr chart, int rank);

    /// Sample a degree-0 matrix field from a callable (row, col, x).
    static MatrixForm sample(ChartPtr chart, int rows, int cols,
                             const std::function<cplx(int, int, const std::array<double, kMaxDim>&)>& f);

    const ChartPtr& chart() const { return chart_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int degree() const { return degree_; }

    DifferentialForm& at(int r, int c) { return entries_[r * cols_ + c]; }
    const DifferentialForm& at(int r, int c) const { return entries_[r * cols_ + c]; }

    MatrixForm& operator+=(const MatrixForm& o);
    MatrixForm& operator-=(const MatrixForm& o);
    MatrixForm& operator*=(cplx s);
    friend MatrixForm operator+(MatrixForm a, const MatrixForm& b) { return a += b; }
    friend MatrixForm operator-(MatrixForm a, const MatrixForm& b) { return a -= b; }
    friend MatrixForm operator*(cplx s, MatrixForm a) { return a *= s; }

    double max_abs(const std::vector<uint8_t>* keep = nullptr) const;

private:
    ChartPtr chart_;
    int rows_ = 0, cols_ = 0, degree_ = 0;
    std::vector<DifferentialForm> entries_;
};

/// Matrix product with entrywise wedge; degree adds.
MatrixForm matrix_wedge(const MatrixForm& A, const MatrixForm& B);

/// Entrywise exterior derivative.
MatrixForm matrix_d(const MatrixForm& A);

/// Trace (square matrices).
DifferentialForm matrix_trace(const MatrixForm& A);

/// Block-diagonal direct sum.
MatrixForm block_diag(const MatrixForm& A, const MatrixForm& B);

/// Curvature-style combination d(omega) + omega ^ omega for square degree-1 A.
MatrixForm curvature_of(const MatrixForm& omega);

} // namespace cw
