#include "fdsc/linalg.hpp"

#include <stdexcept>

namespace fdsc {

namespace {

// Maps an off-diagonal coordinate to (row, col, is_imag).
void off_diagonal_position(int dim, int coord, int& row, int& col, bool& imag) {
  int rest = coord - dim;
  int pair = rest / 2;
  imag = (rest % 2) == 1;
  for (int k = 0; k < dim; ++k) {
    int in_row = dim - 1 - k;
    if (pair < in_row) {
      row = k;
      col = k + 1 + pair;
      return;
    }
    pair -= in_row;
  }
  throw std::out_of_range("hermitian coordinate out of range");
}

}  // namespace

CMatrix hermitian_basis(int dim, int coord) {
  CMatrix e = CMatrix::Zero(dim, dim);
  if (coord < 0 || coord >= dim * dim) throw std::out_of_range("hermitian coordinate out of range");
  if (coord < dim) {
    e(coord, coord) = 1.0;
    return e;
  }
  int row = 0, col = 0;
  bool imag = false;
  off_diagonal_position(dim, coord, row, col, imag);
  if (imag) {
    e(row, col) = cdouble(0.0, 1.0);
    e(col, row) = cdouble(0.0, -1.0);
  } else {
    e(row, col) = 1.0;
    e(col, row) = 1.0;
  }
  return e;
}

CMatrix hermitian_from_coords(int dim, std::span<const double> coords) {
  if (static_cast<int>(coords.size()) != dim * dim) throw std::invalid_argument("hermitian coordinate count mismatch");
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) m(k, k) = coords[k];
  int c = dim;
  for (int k = 0; k < dim; ++k) {
    for (int l = k + 1; l < dim; ++l) {
      cdouble v(coords[c], coords[c + 1]);
      m(k, l) = v;
      m(l, k) = std::conj(v);
      c += 2;
    }
  }
  return m;
}

std::vector<double> hermitian_to_coords(const CMatrix& m) {
  const int dim = static_cast<int>(m.rows());
  std::vector<double> out(dim * dim);
  for (int k = 0; k < dim; ++k) out[k] = m(k, k).real();
  int c = dim;
  for (int k = 0; k < dim; ++k) {
    for (int l = k + 1; l < dim; ++l) {
      cdouble v = 0.5 * (m(k, l) + std::conj(m(l, k)));
      out[c] = v.real();
      out[c + 1] = v.imag();
      c += 2;
    }
  }
  return out;
}

std::vector<double> trace_functional(const CMatrix& a) {
  const int dim = static_cast<int>(a.rows());
  std::vector<double> out(dim * dim);
  // Re tr(A E) for each basis matrix, written out to avoid forming E.
  for (int k = 0; k < dim; ++k) out[k] = a(k, k).real();
  int c = dim;
  for (int k = 0; k < dim; ++k) {
    for (int l = k + 1; l < dim; ++l) {
      // E_re = e_k e_l^T + e_l e_k^T  ->  tr(A E) = A(l,k) + A(k,l)
      out[c] = (a(l, k) + a(k, l)).real();
      // E_im = i e_k e_l^T - i e_l e_k^T  ->  tr(A E) = i A(l,k) - i A(k,l)
      out[c + 1] = (cdouble(0.0, 1.0) * (a(l, k) - a(k, l))).real();
      c += 2;
    }
  }
  return out;
}

double real_trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

double min_eigenvalue(const CMatrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace fdsc
