#include "hyperhead/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hyperhead {

namespace {
double sigmoid_scalar(double x) {
    if (x >= 0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}
double softplus_scalar(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}
} // namespace

VarId Tape::push(Matrix value, std::function<void(Tape&, const Node&)> bwd) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(bwd)});
    return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::constant(Matrix v) { return push(std::move(v), nullptr); }

VarId Tape::param(const std::string& name, Matrix v) {
    if (by_name_.count(name)) throw std::runtime_error("Tape: duplicate param " + name);
    const VarId id = push(std::move(v), nullptr);
    params_.emplace_back(name, id);
    by_name_[name] = id;
    return id;
}

const Matrix& Tape::param_grad(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw std::runtime_error("Tape: unknown param " + name);
    return nodes_[it->second].grad;
}

VarId Tape::matmul(VarId a, VarId b) {
    Matrix out = hyperhead::matmul(value(a), value(b));
    return push(std::move(out), [a, b](Tape& t, const Node& self) {
        add_inplace(t.grad_mut(a), hyperhead::matmul_nt(self.grad, t.value(b)));
        add_inplace(t.grad_mut(b), hyperhead::matmul_tn(t.value(a), self.grad));
    });
}

VarId Tape::matmul_nt(VarId a, VarId b) {
    Matrix out = hyperhead::matmul_nt(value(a), value(b));
    return push(std::move(out), [a, b](Tape& t, const Node& self) {
        add_inplace(t.grad_mut(a), hyperhead::matmul(self.grad, t.value(b)));
        add_inplace(t.grad_mut(b), hyperhead::matmul_tn(self.grad, t.value(a)));
    });
}

VarId Tape::matmul_tn(VarId a, VarId b) {
    Matrix out = hyperhead::matmul_tn(value(a), value(b));
    return push(std::move(out), [a, b](Tape& t, const Node& self) {
        add_inplace(t.grad_mut(a), hyperhead::matmul_nt(t.value(b), self.grad));
        add_inplace(t.grad_mut(b), hyperhead::matmul(t.value(a), self.grad));
    });
}

VarId Tape::add(VarId a, VarId b) {
    return push(hyperhead::add(value(a), value(b)), [a, b](Tape& t, const Node& self) {
        add_inplace(t.grad_mut(a), self.grad);
        add_inplace(t.grad_mut(b), self.grad);
    });
}

VarId Tape::sub(VarId a, VarId b) {
    return push(hyperhead::sub(value(a), value(b)), [a, b](Tape& t, const Node& self) {
        add_inplace(t.grad_mut(a), self.grad);
        Matrix& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb.data()[i] -= self.grad.data()[i];
    });
}

VarId Tape::hadamard(VarId a, VarId b) {
    return push(hyperhead::hadamard(value(a), value(b)), [a, b](Tape& t, const Node& self) {
        add_inplace(t.grad_mut(a), hyperhead::hadamard(self.grad, t.value(b)));
        add_inplace(t.grad_mut(b), hyperhead::hadamard(self.grad, t.value(a)));
    });
}

VarId Tape::scale(VarId a, double s) {
    return push(hyperhead::scale(value(a), s), [a, s](Tape& t, const Node& self) {
        add_inplace(t.grad_mut(a), hyperhead::scale(self.grad, s));
    });
}

VarId Tape::sigmoid(VarId a) {
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = sigmoid_scalar(out.data()[i]);
    return push(std::move(out), [a](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < ga.size(); ++i) {
            const double y = self.value.data()[i];
            ga.data()[i] += self.grad.data()[i] * y * (1.0 - y);
        }
    });
}

VarId Tape::softplus(VarId a) {
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = softplus_scalar(out.data()[i]);
    return push(std::move(out), [a](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        const Matrix& x = t.value(a);
        for (std::size_t i = 0; i < ga.size(); ++i)
            ga.data()[i] += self.grad.data()[i] * sigmoid_scalar(x.data()[i]);
    });
}

VarId Tape::relu(VarId a) {
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(out.data()[i], 0.0);
    return push(std::move(out), [a](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        const Matrix& x = t.value(a);
        for (std::size_t i = 0; i < ga.size(); ++i)
            if (x.data()[i] > 0.0) ga.data()[i] += self.grad.data()[i];
    });
}

VarId Tape::causal_mask(VarId a) {
    const Matrix& x = value(a);
    if (x.rows() != x.cols()) throw DimensionError("causal_mask: plane not square");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c <= r; ++c) out(r, c) = x(r, c);
    return push(std::move(out), [a](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        for (std::size_t r = 0; r < ga.rows(); ++r)
            for (std::size_t c = 0; c <= r; ++c) ga(r, c) += self.grad(r, c);
    });
}

VarId Tape::causal_softmax(VarId a) {
    const Matrix& x = value(a);
    if (x.rows() != x.cols()) throw DimensionError("causal_softmax: plane not square");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double mx = x(r, 0);
        for (std::size_t c = 1; c <= r; ++c) mx = std::max(mx, x(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c <= r; ++c) z += std::exp(x(r, c) - mx);
        for (std::size_t c = 0; c <= r; ++c) out(r, c) = std::exp(x(r, c) - mx) / z;
    }
    return push(std::move(out), [a](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        for (std::size_t r = 0; r < ga.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c <= r; ++c) dot += self.grad(r, c) * self.value(r, c);
            for (std::size_t c = 0; c <= r; ++c)
                ga(r, c) += self.value(r, c) * (self.grad(r, c) - dot);
        }
    });
}

VarId Tape::causal_relu_l2(VarId a, double eps) {
    const Matrix& x = value(a);
    if (x.rows() != x.cols()) throw DimensionError("causal_relu_l2: plane not square");
    const std::size_t T = x.rows();
    std::vector<double> rho(T);
    Matrix out(T, T);
    for (std::size_t r = 0; r < T; ++r) {
        double ss = 0.0;
        for (std::size_t c = 0; c <= r; ++c) ss += x(r, c) * x(r, c);
        rho[r] = std::sqrt(ss + eps);
        for (std::size_t c = 0; c <= r; ++c) out(r, c) = std::max(x(r, c), 0.0) / rho[r];
    }
    return push(std::move(out), [a, rho](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        const Matrix& x = t.value(a);
        for (std::size_t r = 0; r < ga.rows(); ++r) {
            // y_c = relu(x_c)/rho;  dx_j = g_j 1{x_j>0}/rho - (sum g_i relu(x_i)) x_j / rho^3
            double gy = 0.0;
            for (std::size_t c = 0; c <= r; ++c)
                gy += self.grad(r, c) * std::max(x(r, c), 0.0);
            const double inv = 1.0 / rho[r];
            const double inv3 = inv * inv * inv;
            for (std::size_t c = 0; c <= r; ++c) {
                double g = -gy * x(r, c) * inv3;
                if (x(r, c) > 0.0) g += self.grad(r, c) * inv;
                ga(r, c) += g;
            }
        }
    });
}

VarId Tape::rope_rows(VarId a) {
    const Matrix& x = value(a);
    if (x.cols() % 2 != 0) throw DimensionError("rope_rows: odd width");
    const std::size_t T = x.rows(), D = x.cols();
    Matrix out(T, D);
    auto rotate = [D](const Matrix& src, Matrix& dst, std::size_t r, double dir) {
        for (std::size_t i = 0; i * 2 < D; ++i) {
            const double theta = std::pow(10000.0, -2.0 * static_cast<double>(i) /
                                                       static_cast<double>(D));
            const double ang = dir * static_cast<double>(r) * theta;
            const double c = std::cos(ang), s = std::sin(ang);
            const double v0 = src(r, 2 * i), v1 = src(r, 2 * i + 1);
            dst(r, 2 * i) += v0 * c - v1 * s;
            dst(r, 2 * i + 1) += v0 * s + v1 * c;
        }
    };
    for (std::size_t r = 0; r < T; ++r) rotate(x, out, r, 1.0);
    return push(std::move(out), [a, rotate](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        for (std::size_t r = 0; r < ga.rows(); ++r) rotate(self.grad, ga, r, -1.0);
    });
}

VarId Tape::depthwise_conv(VarId xv, VarId kv) {
    const Matrix& x = value(xv);
    const Matrix& k = value(kv);
    if (k.rows() != x.cols())
        throw DimensionError("depthwise_conv: kernel channels " + std::to_string(k.rows()) +
                             " vs width " + std::to_string(x.cols()));
    const std::size_t T = x.rows(), C = x.cols(), K = k.cols();
    Matrix out(T, C);
    for (std::size_t r = 0; r < T; ++r)
        for (std::size_t j = 0; j < K && j <= r; ++j)
            for (std::size_t ch = 0; ch < C; ++ch) out(r, ch) += k(ch, j) * x(r - j, ch);
    return push(std::move(out), [xv, kv](Tape& t, const Node& self) {
        const Matrix& x = t.value(xv);
        const Matrix& k = t.value(kv);
        Matrix& gx = t.grad_mut(xv);
        Matrix& gk = t.grad_mut(kv);
        const std::size_t T = x.rows(), C = x.cols(), K = k.cols();
        for (std::size_t r = 0; r < T; ++r)
            for (std::size_t j = 0; j < K && j <= r; ++j)
                for (std::size_t ch = 0; ch < C; ++ch) {
                    gx(r - j, ch) += k(ch, j) * self.grad(r, ch);
                    gk(ch, j) += x(r - j, ch) * self.grad(r, ch);
                }
    });
}

VarId Tape::causal_dplr_mix(VarId plane, VarId gates, VarId pv, VarId av, VarId bv,
                            bool transpose, bool lag_indexed) {
    const Matrix& S = value(plane);
    const Matrix& g = value(gates);
    const Matrix& p = value(pv);
    const Matrix& A0 = value(av);
    const Matrix& B0 = value(bv);
    if (S.rows() != S.cols()) throw DimensionError("causal_dplr_mix: plane not square");
    const std::size_t T = S.rows(), R = A0.cols();
    if (p.rows() < T || A0.rows() < T || B0.rows() < T || g.rows() != T || g.cols() != R)
        throw DimensionError("causal_dplr_mix: parameter lengths inconsistent with T=" +
                             std::to_string(T));
    // Mixing uses Alr on the contraction side and Blr on the emission side;
    // the transpose flag (y R^T) swaps them.
    const Matrix& Alr = transpose ? B0 : A0;
    const Matrix& Blr = transpose ? A0 : B0;

    auto idx = [lag_indexed](std::size_t r, std::size_t c) { return lag_indexed ? r - c : c; };

    Matrix T1(T, R); // T1[r,k] = sum_{c<=r} S[r,c] * Alr[idx,k]
    Matrix out(T, T);
    for (std::size_t r = 0; r < T; ++r) {
        for (std::size_t c = 0; c <= r; ++c) {
            const double s = S(r, c);
            const double* arow = Alr.row_ptr(idx(r, c));
            double* t1 = T1.row_ptr(r);
            for (std::size_t k = 0; k < R; ++k) t1[k] += s * arow[k];
        }
        for (std::size_t c = 0; c <= r; ++c) {
            const std::size_t i = idx(r, c);
            double acc = S(r, c) * (1.0 + p(i, 0));
            const double* brow = Blr.row_ptr(i);
            const double* t1 = T1.row_ptr(r);
            const double* grow = g.row_ptr(r);
            for (std::size_t k = 0; k < R; ++k) acc += t1[k] * grow[k] * brow[k];
            out(r, c) = acc;
        }
    }
    return push(std::move(out), [plane, gates, pv, av, bv, transpose, lag_indexed,
                                 T1](Tape& t, const Node& self) {
        const Matrix& S = t.value(plane);
        const Matrix& g = t.value(gates);
        const Matrix& p = t.value(pv);
        const Matrix& Alr = transpose ? t.value(bv) : t.value(av);
        const Matrix& Blr = transpose ? t.value(av) : t.value(bv);
        Matrix& gS = t.grad_mut(plane);
        Matrix& gg = t.grad_mut(gates);
        Matrix& gp = t.grad_mut(pv);
        Matrix& gA = transpose ? t.grad_mut(bv) : t.grad_mut(av);
        Matrix& gB = transpose ? t.grad_mut(av) : t.grad_mut(bv);
        const std::size_t T = S.rows(), R = Alr.cols();
        auto idx = [lag_indexed](std::size_t r, std::size_t c) { return lag_indexed ? r - c : c; };
        Matrix G2(T, R); // G2[r,k] = sum_c G[r,c] * Blr[idx,k]
        for (std::size_t r = 0; r < T; ++r) {
            for (std::size_t c = 0; c <= r; ++c) {
                const double gr = self.grad(r, c);
                const double* brow = Blr.row_ptr(idx(r, c));
                double* g2 = G2.row_ptr(r);
                for (std::size_t k = 0; k < R; ++k) g2[k] += gr * brow[k];
            }
            const double* grow = g.row_ptr(r);
            const double* g2 = G2.row_ptr(r);
            const double* t1 = T1.row_ptr(r);
            for (std::size_t k = 0; k < R; ++k) gg(r, k) += t1[k] * g2[k];
            for (std::size_t c = 0; c <= r; ++c) {
                const std::size_t i = idx(r, c);
                const double gr = self.grad(r, c);
                gp(i, 0) += gr * S(r, c);
                double ds = gr * (1.0 + p(i, 0));
                const double* arow = Alr.row_ptr(i);
                const double* brow = Blr.row_ptr(i);
                double* garow = gA.row_ptr(i);
                double* gbrow = gB.row_ptr(i);
                for (std::size_t k = 0; k < R; ++k) {
                    const double sg = grow[k];
                    ds += arow[k] * sg * g2[k];
                    garow[k] += S(r, c) * sg * g2[k];
                    gbrow[k] += gr * sg * t1[k];
                }
                gS(r, c) += ds;
            }
        }
    });
}

VarId Tape::embed_rows(VarId table, std::vector<int> ids) {
    const Matrix& E = value(table);
    Matrix out(ids.size(), E.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= E.rows())
            throw DimensionError("embed_rows: id out of range");
        for (std::size_t c = 0; c < E.cols(); ++c) out(r, c) = E(ids[r], c);
    }
    return push(std::move(out), [table, ids](Tape& t, const Node& self) {
        Matrix& gE = t.grad_mut(table);
        for (std::size_t r = 0; r < ids.size(); ++r)
            for (std::size_t c = 0; c < gE.cols(); ++c) gE(ids[r], c) += self.grad(r, c);
    });
}

VarId Tape::rmsnorm_rows(VarId a, double eps) {
    const Matrix& x = value(a);
    const std::size_t T = x.rows(), D = x.cols();
    std::vector<double> rho(T);
    Matrix out(T, D);
    for (std::size_t r = 0; r < T; ++r) {
        double ss = 0.0;
        for (std::size_t c = 0; c < D; ++c) ss += x(r, c) * x(r, c);
        rho[r] = std::sqrt(ss / static_cast<double>(D) + eps);
        for (std::size_t c = 0; c < D; ++c) out(r, c) = x(r, c) / rho[r];
    }
    return push(std::move(out), [a, rho](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        const Matrix& x = t.value(a);
        const std::size_t D = x.cols();
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < D; ++c) dot += self.grad(r, c) * x(r, c);
            const double inv = 1.0 / rho[r];
            const double k = dot * inv * inv * inv / static_cast<double>(D);
            for (std::size_t c = 0; c < D; ++c)
                ga(r, c) += self.grad(r, c) * inv - k * x(r, c);
        }
    });
}

VarId Tape::cross_entropy_masked(VarId logits, std::vector<int> targets,
                                 std::vector<std::uint8_t> mask) {
    const Matrix& L = value(logits);
    if (targets.size() != L.rows() || mask.size() != L.rows())
        throw DimensionError("cross_entropy_masked: target/mask length vs logit rows");
    std::size_t n = 0;
    double loss = 0.0;
    for (std::size_t r = 0; r < L.rows(); ++r) {
        if (!mask[r]) continue;
        ++n;
        double mx = L(r, 0);
        for (std::size_t c = 1; c < L.cols(); ++c) mx = std::max(mx, L(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < L.cols(); ++c) z += std::exp(L(r, c) - mx);
        loss += std::log(z) - (L(r, targets[r]) - mx);
    }
    if (n == 0) throw DimensionError("cross_entropy_masked: empty mask");
    Matrix out(1, 1);
    out(0, 0) = loss / static_cast<double>(n);
    const double invn = 1.0 / static_cast<double>(n);
    return push(std::move(out), [logits, targets, mask, invn](Tape& t, const Node& self) {
        const Matrix& L = t.value(logits);
        Matrix& gL = t.grad_mut(logits);
        const double g = self.grad(0, 0) * invn;
        for (std::size_t r = 0; r < L.rows(); ++r) {
            if (!mask[r]) continue;
            double mx = L(r, 0);
            for (std::size_t c = 1; c < L.cols(); ++c) mx = std::max(mx, L(r, c));
            double z = 0.0;
            for (std::size_t c = 0; c < L.cols(); ++c) z += std::exp(L(r, c) - mx);
            for (std::size_t c = 0; c < L.cols(); ++c) {
                const double sm = std::exp(L(r, c) - mx) / z;
                gL(r, c) += g * (sm - (static_cast<int>(c) == targets[r] ? 1.0 : 0.0));
            }
        }
    });
}

VarId Tape::sum_squares(VarId a) {
    const Matrix& x = value(a);
    Matrix out(1, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x.data()[i] * x.data()[i];
    out(0, 0) = s;
    return push(std::move(out), [a](Tape& t, const Node& self) {
        Matrix& ga = t.grad_mut(a);
        const Matrix& x = t.value(a);
        const double g = self.grad(0, 0);
        for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += 2.0 * g * x.data()[i];
    });
}

void Tape::backward(VarId out) {
    if (value(out).rows() != 1 || value(out).cols() != 1)
        throw DimensionError("backward: output must be a 1x1 scalar");
    for (Node& n : nodes_) n.grad = Matrix(n.value.rows(), n.value.cols());
    nodes_[out].grad(0, 0) = 1.0;
    for (VarId id = out; id >= 0; --id) {
        const Node& n = nodes_[id];
        if (n.backward) n.backward(*this, n);
    }
}

double grad_check(const std::function<double(const ParamMap&)>& f, const ParamMap& theta,
                  const ParamMap& analytic, double h, std::string* worst_param) {
    double worst = 0.0;
    for (const auto& [name, g] : analytic) {
        ParamMap t = theta;
        Matrix& w = t.at(name);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double orig = w.data()[i];
            w.data()[i] = orig + h;
            const double fp = f(t);
            w.data()[i] = orig - h;
            const double fm = f(t);
            w.data()[i] = orig;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw std::runtime_error("grad_check: non-finite objective at " + name);
            const double fd = (fp - fm) / (2.0 * h);
            // The floor must sit above the fd roundoff noise (~eps*|f|/h),
            // otherwise near-zero gradient entries dominate the ratio.
            const double err = std::abs(g.data()[i] - fd) / (std::abs(fd) + 1e-6);
            if (err > worst) {
                worst = err;
                if (worst_param) *worst_param = name;
            }
        }
    }
    return worst;
}

} // namespace hyperhead
