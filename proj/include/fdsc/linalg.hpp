#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fdsc {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Real coordinates of a dim x dim Hermitian matrix.
///
/// Layout: the dim diagonal entries first, then for every strictly upper
/// entry (k, l), k < l, in row-major order, its real part followed by its
/// imaginary part. A dim x dim block therefore has dim * dim coordinates.
inline int hermitian_coordinate_count(int dim) { return dim * dim; }

/// Basis matrix E_c such that X = sum_c x_c E_c.
CMatrix hermitian_basis(int dim, int coord);

CMatrix hermitian_from_coords(int dim, std::span<const double> coords);
std::vector<double> hermitian_to_coords(const CMatrix& m);

/// Coefficients a_c = Re tr(A E_c), so that Re tr(A X) = sum_c a_c x_c.
std::vector<double> trace_functional(const CMatrix& a);

/// Re tr(A B).
double real_trace_product(const CMatrix& a, const CMatrix& b);

/// Smallest eigenvalue of a Hermitian matrix (0 for an empty matrix).
double min_eigenvalue(const CMatrix& m);

/// Symmetrizes (A + A^H) / 2.
CMatrix hermitian_part(const CMatrix& m);

}  // namespace fdsc
