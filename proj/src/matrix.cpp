#include "hyperhead/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace hyperhead {

namespace {
std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}
void require(bool ok, const std::string& msg) {
    if (!ok) throw DimensionError(msg);
}
} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_,
            "Matrix init: data length " + std::to_string(data_.size()) +
                " != " + shape_str(rows_, cols_));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::row(std::size_t r) const {
    Matrix out(1, cols_);
    std::copy(row_ptr(r), row_ptr(r) + cols_, out.data());
    return out;
}

void Matrix::set_row(std::size_t r, const Matrix& v) {
    require(v.rows() == 1 && v.cols() == cols_,
            "set_row: " + shape_str(v.rows(), v.cols()) + " into width " + std::to_string(cols_));
    std::copy(v.data(), v.data() + cols_, row_ptr(r));
}

Matrix Matrix::transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {
// C row i += sum_k a[k] * B row k, with k unrolled by 4 so each pass over the
// C row performs four fused updates per load/store.
inline void axpy_rows4(double* ci, const double* ai, const Matrix& b, std::size_t K,
                       std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= K; k += 4) {
        const double a0 = ai[k], a1 = ai[k + 1], a2 = ai[k + 2], a3 = ai[k + 3];
        const double* b0 = b.row_ptr(k);
        const double* b1 = b.row_ptr(k + 1);
        const double* b2 = b.row_ptr(k + 2);
        const double* b3 = b.row_ptr(k + 3);
        for (std::size_t j = 0; j < n; ++j)
            ci[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
    }
    for (; k < K; ++k) {
        const double aik = ai[k];
        const double* bk = b.row_ptr(k);
        for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
}
} // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul: " + shape_str(a.rows(), a.cols()) + " * " +
                                      shape_str(b.rows(), b.cols()));
    Matrix c(a.rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i)
        axpy_rows4(c.row_ptr(i), a.row_ptr(i), b, a.cols(), n);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn: " + shape_str(a.rows(), a.cols()) + "^T * " +
                                      shape_str(b.rows(), b.cols()));
    Matrix c(a.cols(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ak = a.row_ptr(k);
        const double* bk = b.row_ptr(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = ak[i];
            double* ci = c.row_ptr(i);
            for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt: " + shape_str(a.rows(), a.cols()) + " * " +
                                      shape_str(b.rows(), b.cols()) + "^T");
    Matrix c(a.rows(), b.rows());
    const std::size_t K = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        std::size_t j = 0;
        // four dot products per pass so each a[i,:] load feeds four rows of b
        for (; j + 4 <= b.rows(); j += 4) {
            const double* b0 = b.row_ptr(j);
            const double* b1 = b.row_ptr(j + 1);
            const double* b2 = b.row_ptr(j + 2);
            const double* b3 = b.row_ptr(j + 3);
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double av = ai[k];
                s0 += av * b0[k];
                s1 += av * b1[k];
                s2 += av * b2[k];
                s3 += av * b3[k];
            }
            ci[j] = s0;
            ci[j + 1] = s1;
            ci[j + 2] = s2;
            ci[j + 3] = s3;
        }
        for (; j < b.rows(); ++j) {
            const double* bj = b.row_ptr(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < K; ++k) acc += ai[k] * bj[k];
            ci[j] = acc;
        }
    }
    return c;
}

namespace {
template <class F>
Matrix zip(const Matrix& a, const Matrix& b, F f, const char* name) {
    require(a.same_shape(b), std::string(name) + ": " + shape_str(a.rows(), a.cols()) + " vs " +
                                 shape_str(b.rows(), b.cols()));
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = f(a.data()[i], b.data()[i]);
    return c;
}
} // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "add");
}
Matrix sub(const Matrix& a, const Matrix& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "sub");
}
Matrix hadamard(const Matrix& a, const Matrix& b) {
    return zip(a, b, [](double x, double y) { return x * y; }, "hadamard");
}
Matrix scale(const Matrix& a, double s) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * s;
    return c;
}
void add_inplace(Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "add_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double max_rel_diff(const Matrix& a, const Matrix& b, double floor) {
    require(a.same_shape(b), "max_rel_diff: shape mismatch");
    double scale = floor;
    for (std::size_t i = 0; i < a.size(); ++i)
        scale = std::max({scale, std::abs(a.data()[i]), std::abs(b.data()[i])});
    return max_abs_diff(a, b) / scale;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return std::sqrt(s);
}

std::vector<double> symmetric_eigen(const Matrix& m, Matrix& eigvecs) {
    require(m.rows() == m.cols(), "symmetric_eigen: matrix not square");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    std::vector<double> eig(n);
    eigvecs = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = a(order[i], order[i]);
        for (std::size_t k = 0; k < n; ++k) eigvecs(k, i) = v(k, order[i]);
    }
    return eig;
}

std::vector<double> singular_values(const Matrix& a) {
    // Use the smaller Gram matrix side.
    Matrix gram = (a.rows() <= a.cols()) ? matmul_nt(a, a) : matmul_tn(a, a);
    Matrix vecs;
    std::vector<double> eig = symmetric_eigen(gram, vecs);
    for (double& e : eig) e = std::sqrt(std::max(e, 0.0));
    return eig;
}

std::size_t numerical_rank(const Matrix& a, double rel_tol) {
    std::vector<double> sv = singular_values(a);
    if (sv.empty() || sv[0] == 0.0) return 0;
    std::size_t r = 0;
    for (double s : sv)
        if (s > rel_tol * sv[0]) ++r;
    return r;
}

Matrix orthonormal_rowspace(const Matrix& a, double drop_tol) {
    std::vector<Matrix> basis;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Matrix v = a.row(i);
        for (int pass = 0; pass < 2; ++pass) {
            for (const Matrix& b : basis) {
                double dot = 0.0;
                for (std::size_t k = 0; k < v.cols(); ++k) dot += v(0, k) * b(0, k);
                for (std::size_t k = 0; k < v.cols(); ++k) v(0, k) -= dot * b(0, k);
            }
        }
        const double nrm = frobenius_norm(v);
        if (nrm > drop_tol) basis.push_back(scale(v, 1.0 / nrm));
    }
    Matrix out(basis.size(), a.cols());
    for (std::size_t i = 0; i < basis.size(); ++i) out.set_row(i, basis[i]);
    return out;
}

} // namespace hyperhead
