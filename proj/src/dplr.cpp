#include "hyperhead/dplr.hpp"

#include <cmath>

namespace hyperhead {

namespace {
double sigmoid_scalar(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
void check_len(std::size_t t, const DPLRParams& params, const char* who) {
    if (t > params.L_max)
        throw DimensionError(std::string(who) + ": t=" + std::to_string(t) + " exceeds L_max=" +
                             std::to_string(params.L_max));
}
} // namespace

DPLRParams init_dplr(Rng& rng, std::size_t L_max, std::size_t r_s, std::size_t d,
                     double std_dev) {
    DPLRParams p;
    p.L_max = L_max;
    p.r_s = r_s;
    p.p = Matrix(L_max, 1);
    p.A = rng.normal_matrix(L_max, r_s, std_dev);
    p.B = rng.normal_matrix(L_max, r_s, std_dev);
    p.W_S = rng.normal_matrix(d, r_s, std_dev);
    return p;
}

Matrix gate_vector(const Matrix& x, const DPLRParams& params) {
    Matrix z = matmul(x, params.W_S); // 1 x r_s
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = sigmoid_scalar(z.data()[i]);
    return z;
}

Matrix materialize(const DPLRParams& params, const Matrix& s, std::size_t t) {
    check_len(t, params, "materialize");
    Matrix r(t, t);
    for (std::size_t i = 0; i < t; ++i) {
        r(i, i) = 1.0 + params.p(i, 0);
        for (std::size_t j = 0; j < t; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < params.r_s; ++k)
                acc += params.A(i, k) * s(0, k) * params.B(j, k);
            r(i, j) += acc;
        }
    }
    return r;
}

namespace {
// Shared core: y (D + U Diag(s) V^T) with U/V = (A,B) or (B,A).
Matrix mix_core(const Matrix& y, const DPLRParams& params, const Matrix& s, const Matrix& u,
                const Matrix& v, MulCounter* counter) {
    if (y.rows() != 1)
        throw DimensionError("mix_right: expected a row vector, got " +
                             std::to_string(y.rows()) + " rows");
    const std::size_t t = y.cols();
    check_len(t, params, "mix_right");
    if (s.cols() != params.r_s)
        throw DimensionError("mix_right: gate length " + std::to_string(s.cols()) + " vs r_s=" +
                             std::to_string(params.r_s));
    Matrix out(1, t);
    for (std::size_t i = 0; i < t; ++i) out(0, i) = y(0, i) * (1.0 + params.p(i, 0));
    std::vector<double> z(params.r_s, 0.0); // (yU) (.) s
    for (std::size_t i = 0; i < t; ++i) {
        const double yi = y(0, i);
        const double* urow = u.row_ptr(i);
        for (std::size_t k = 0; k < params.r_s; ++k) z[k] += yi * urow[k];
    }
    for (std::size_t k = 0; k < params.r_s; ++k) z[k] *= s(0, k);
    for (std::size_t i = 0; i < t; ++i) {
        const double* vrow = v.row_ptr(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < params.r_s; ++k) acc += z[k] * vrow[k];
        out(0, i) += acc;
    }
    if (counter) counter->mults += 2 * t * params.r_s + t + params.r_s;
    return out;
}
} // namespace

Matrix mix_right(const Matrix& y, const DPLRParams& params, const Matrix& s,
                 MulCounter* counter) {
    return mix_core(y, params, s, params.A, params.B, counter);
}

Matrix mix_right_transpose(const Matrix& y, const DPLRParams& params, const Matrix& s,
                           MulCounter* counter) {
    return mix_core(y, params, s, params.B, params.A, counter);
}

Matrix mix_rows(const Matrix& x_lag, const DPLRParams& params, const Matrix& s, bool transpose) {
    const std::size_t t = x_lag.rows();
    check_len(t, params, "mix_rows");
    // R^T X = D X + B Diag(s) A^T X ; R X = D X + A Diag(s) B^T X.
    const Matrix& contract = transpose ? params.A : params.B; // projected against X
    const Matrix& emit = transpose ? params.B : params.A;
    Matrix z(params.r_s, x_lag.cols());
    for (std::size_t i = 0; i < t; ++i) {
        const double* xrow = x_lag.row_ptr(i);
        const double* crow = contract.row_ptr(i);
        for (std::size_t k = 0; k < params.r_s; ++k) {
            double* zrow = z.row_ptr(k);
            const double cik = crow[k];
            for (std::size_t c = 0; c < x_lag.cols(); ++c) zrow[c] += cik * xrow[c];
        }
    }
    for (std::size_t k = 0; k < params.r_s; ++k) {
        double* zrow = z.row_ptr(k);
        for (std::size_t c = 0; c < x_lag.cols(); ++c) zrow[c] *= s(0, k);
    }
    Matrix out(t, x_lag.cols());
    for (std::size_t i = 0; i < t; ++i) {
        const double di = 1.0 + params.p(i, 0);
        const double* xrow = x_lag.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t c = 0; c < x_lag.cols(); ++c) orow[c] = di * xrow[c];
        const double* erow = emit.row_ptr(i);
        for (std::size_t k = 0; k < params.r_s; ++k) {
            const double eik = erow[k];
            const double* zrow = z.row_ptr(k);
            for (std::size_t c = 0; c < x_lag.cols(); ++c) orow[c] += eik * zrow[c];
        }
    }
    return out;
}

DPLRParams extend(const DPLRParams& params, std::size_t t, std::size_t T) {
    if (t > params.L_max)
        throw DimensionError("extend: t exceeds L_max");
    if (T < t) throw DimensionError("extend: T=" + std::to_string(T) + " < t=" + std::to_string(t));
    DPLRParams out;
    out.L_max = T;
    out.r_s = params.r_s;
    out.p = Matrix(T, 1, -1.0); // zero diagonal beyond t: 1 + (-1) = 0
    out.A = Matrix(T, params.r_s);
    out.B = Matrix(T, params.r_s);
    out.W_S = params.W_S;
    for (std::size_t i = 0; i < t; ++i) {
        out.p(i, 0) = params.p(i, 0);
        for (std::size_t k = 0; k < params.r_s; ++k) {
            out.A(i, k) = params.A(i, k);
            out.B(i, k) = params.B(i, k);
        }
    }
    return out;
}

} // namespace hyperhead
