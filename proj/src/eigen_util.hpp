#pragma once

#include <Eigen/Dense>

#include "cw/matrix_form.hpp"

namespace cw {

inline Eigen::MatrixXcd mat_at(const MatrixForm& m, std::size_t node, int component = 0) {
    Eigen::MatrixXcd out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m.at(i, j).at(component, node);
    return out;
}

inline void set_mat(MatrixForm& m, std::size_t node, const Eigen::MatrixXcd& v, int component = 0) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m.at(i, j).at(component, node) = v(i, j);
}

/// Hermitian square root and inverse square root.
inline void hermitian_sqrt(const Eigen::MatrixXcd& h, Eigen::MatrixXcd& root,
                           Eigen::MatrixXcd& inv_root) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const auto& d = es.eigenvalues();
    Eigen::VectorXd s = d.cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXd si(s.size());
    for (int i = 0; i < s.size(); ++i) si(i) = s(i) > 1e-300 ? 1.0 / s(i) : 0.0;
    root = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
    inv_root = es.eigenvectors() * si.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace cw
