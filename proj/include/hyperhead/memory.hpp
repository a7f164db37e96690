#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hyperhead/head.hpp"

namespace hyperhead {

// Slot-level view of one head at one step: addresses/content rows (u_i, v_i)
// in model space, address values alpha_i, active gates 1{alpha_i > 0}, and the
// shared normalization scalar rho.
struct MemoryPoolView {
    Matrix u;                  // t x d, row i = address vector of slot i
    Matrix v;                  // t x d, row i = content vector of slot i
    Matrix alpha;              // 1 x t address values
    std::vector<bool> gates;   // gates[i] = (alpha[i] > 0)
    double rho = 0.0;          // sqrt(|alpha|^2 + eps)

    std::size_t size() const { return gates.size(); }
    std::size_t active_count() const;
};

enum class MassKind { Pool, Activated };

// Build the slot pool for one head (ReluL2-style path; rotary positions are
// not representable in model-space slots and are rejected).
MemoryPoolView instantiate_pool(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                                const HeadConfig& config);

// Gated slot-sum readout: (1/rho) sum_i max(alpha_i, 0) * beta(x; v_i).
// Independent oracle for head_forward with the ReluL2 base.
Matrix readout_via_pool(const MemoryPoolView& view, const Matrix& x, const HeadParams& params,
                        const HeadConfig& config);

// Ungated (linear-attention) readout: (1/rho) sum_i alpha_i * beta(x; v_i);
// every slot contributes for every input.
Matrix linear_readout(const MemoryPoolView& view, const Matrix& x, const HeadParams& params,
                      const HeadConfig& config);

std::size_t tv_mass(const MemoryPoolView& view, MassKind which);

// Append k learnable register rows at the old end of the context, leaving the
// existing lag rows (and, under identity mixing, their slots) untouched.
LagContext append_registers(const LagContext& ctx, const Matrix& registers);

// True iff every |h0_i| >= delta and |h1 - h0|_inf < delta; a true result
// guarantees sign(h1_i) = sign(h0_i) for all i.
bool margin_stable(const Matrix& h0, const Matrix& h1, double delta);

// d = t = 2 construction with an input-warped mixer: the slot-2 gate boundary
// is the curve x2 + sigmoid(c*x1)*x1 = 0. `make_static` replaces the warp by a
// constant gate (affine boundary control).
struct WarpedExample {
    HeadConfig config;
    HeadParams params;
    LagContext ctx;
    double c = 0.0;
    bool static_gate = false; // constant mixer gate instead of the input warp

    bool slot2_active(double x1, double x2) const; // gate read off the pool
    bool predicate(double x1, double x2) const;    // x2 + sigmoid(c*x1)*x1 > 0
};
WarpedExample warped_boundary_example(double c);
WarpedExample make_static_control(double c);

// Bisection-localized boundary points of a 2-D gate on [lo,hi]^2.
std::vector<std::array<double, 2>> boundary_points(
    const std::function<bool(double, double)>& gate, double lo, double hi, double step,
    int bisect_iters = 10);
// Max perpendicular distance of the points from their best-fit line.
double collinearity_residual(const std::vector<std::array<double, 2>>& points);

// Residual two-layer block probes: with rank-r W2, f(x)-x stays in Row(W2);
// with rank-r W1, f acts as identity on the orthogonal complement of Col(W1).
struct BudgetAsymmetryResult {
    double subspace_residual = 0.0;
    double quotient_violation = 0.0;
};
BudgetAsymmetryResult budget_asymmetry_check(std::uint64_t seed, std::size_t d, std::size_t h,
                                             std::size_t r);

// Numerical rank of readout deltas under a rank-r additive perturbation of the
// second layer; always <= r.
std::size_t lora_update_span_check(std::uint64_t seed, std::size_t d, std::size_t t,
                                   std::size_t r);

} // namespace hyperhead
