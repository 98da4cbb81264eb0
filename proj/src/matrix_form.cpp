#include "cw/matrix_form.hpp"

namespace cw {

MatrixForm::MatrixForm(ChartPtr chart, int rows, int cols, int degree)
    : chart_(std::move(chart)), rows_(rows), cols_(cols), degree_(degree) {
    if (rows_ < 0 || cols_ < 0) throw std::invalid_argument("matrix form: negative shape");
    entries_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (int i = 0; i < rows_ * cols_; ++i) {
        if (degree_ > chart_->dim())
            entries_.push_back(DifferentialForm::zero_overflow(chart_, degree_));
        else
            entries_.emplace_back(chart_, degree_);
    }
}

MatrixForm MatrixForm::identity(ChartPtr chart, int rank) {
    MatrixForm m(chart, rank, rank, 0);
    for (int i = 0; i < rank; ++i)
        std::fill(m.at(i, i).comp(0).begin(), m.at(i, i).comp(0).end(), cplx(1.0));
    return m;
}

MatrixForm MatrixForm::sample(ChartPtr chart, int rows, int cols,
                              const std::function<cplx(int, int, const std::array<double, kMaxDim>&)>& f) {
    MatrixForm m(chart, rows, cols, 0);
    const Chart& c = *m.chart_;
    for (int r = 0; r < rows; ++r)
        for (int cc = 0; cc < cols; ++cc) {
            auto& field = m.at(r, cc).comp(0);
            for (std::size_t n = 0; n < c.node_count(); ++n) field[n] = f(r, cc, c.coords(n));
        }
    return m;
}

MatrixForm& MatrixForm::operator+=(const MatrixForm& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("matrix form addition: shape mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
    return *this;
}

MatrixForm& MatrixForm::operator-=(const MatrixForm& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("matrix form subtraction: shape mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
    return *this;
}

MatrixForm& MatrixForm::operator*=(cplx s) {
    for (auto& e : entries_) e *= s;
    return *this;
}

double MatrixForm::max_abs(const std::vector<uint8_t>* keep) const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, e.max_abs(keep));
    return m;
}

MatrixForm matrix_wedge(const MatrixForm& A, const MatrixForm& B) {
    if (A.cols() != B.rows()) throw std::invalid_argument("matrix_wedge: rank mismatch");
    if (!A.chart()->same_grid(*B.chart())) throw ChartMismatch("matrix_wedge: chart mismatch");
    MatrixForm out(A.chart(), A.rows(), B.cols(), A.degree() + B.degree());
    const int deg = A.degree() + B.degree();
    if (deg > A.chart()->dim()) return out; // all-overflow entries
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < B.cols(); ++j) {
            DifferentialForm acc(A.chart(), deg);
            for (int k = 0; k < A.cols(); ++k) acc += wedge(A.at(i, k), B.at(k, j));
            out.at(i, j) = std::move(acc);
        }
    return out;
}

MatrixForm matrix_d(const MatrixForm& A) {
    MatrixForm out(A.chart(), A.rows(), A.cols(), A.degree() + 1);
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) out.at(i, j) = exterior_derivative(A.at(i, j));
    return out;
}

DifferentialForm matrix_trace(const MatrixForm& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("trace of non-square matrix form");
    if (A.degree() > A.chart()->dim())
        return DifferentialForm::zero_overflow(A.chart(), A.degree());
    DifferentialForm t(A.chart(), A.degree());
    for (int i = 0; i < A.rows(); ++i) t += A.at(i, i);
    return t;
}

MatrixForm block_diag(const MatrixForm& A, const MatrixForm& B) {
    if (A.degree() != B.degree()) throw std::invalid_argument("block_diag: degree mismatch");
    if (!A.chart()->same_grid(*B.chart())) throw ChartMismatch("block_diag: chart mismatch");
    MatrixForm out(A.chart(), A.rows() + B.rows(), A.cols() + B.cols(), A.degree());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) out.at(i, j) = A.at(i, j);
    for (int i = 0; i < B.rows(); ++i)
        for (int j = 0; j < B.cols(); ++j) out.at(A.rows() + i, A.cols() + j) = B.at(i, j);
    return out;
}

MatrixForm curvature_of(const MatrixForm& omega) {
    if (omega.rows() != omega.cols()) throw std::invalid_argument("curvature of non-square matrix");
    if (omega.degree() != 1) throw std::invalid_argument("curvature expects a degree-1 matrix");
    MatrixForm out = matrix_d(omega);
    if (out.degree() <= omega.chart()->dim()) out += matrix_wedge(omega, omega);
    return out;
}

} // namespace cw
