#pragma once

#include <string>
#include <variant>
#include <vector>

namespace congfac {

// Edge cost families. l(x) is the per-unit cost seen by flow on an edge
// carrying x units; x*l(x) is what the edge charges in total.
//
// The first three families are nondecreasing in x (congestion), the last two
// are nonincreasing (cost sharing): l decreases while x*l(x) stays
// nondecreasing and concave.

struct ConstantFn {
    double b = 0.0;  // l(x) = b
};

struct AffineFn {
    double a = 0.0;  // l(x) = a*x + b
    double b = 0.0;
};

struct PolynomialFn {
    std::vector<double> coeffs;  // l(x) = sum_j coeffs[j] * x^j, all >= 0
};

// l(x) = c/x + l for x >= w_min, held flat at c/w_min + l below, so that l
// stays bounded and x*l(x) -> 0 as x -> 0. The flat region is never hit by
// flows that carry at least one whole demand.
struct SharedFixedFn {
    double c = 0.0;
    double l = 0.0;
    double w_min = 1.0;  // > 0
};

// l(x) = c * x^(beta-1) with beta in (0,1], so x*l(x) = c*x^beta. l(0) takes
// the value at w_floor (> 0) to stay bounded.
struct PowerShareFn {
    double c = 0.0;
    double beta = 1.0;
    double w_floor = 1.0;  // > 0
};

using CostFn = std::variant<ConstantFn, AffineFn, PolynomialFn, SharedFixedFn, PowerShareFn>;

enum class FnClassKind {
    NondecreasingLipschitz,  // l nondecreasing, a-Lipschitz on [0, W]
    Good,                    // l nonincreasing, x*l(x) nondecreasing concave
    Neither,
};

struct FnClass {
    FnClassKind kind = FnClassKind::Neither;
    double lipschitz = 0.0;  // meaningful for NondecreasingLipschitz only
};

// Throws std::invalid_argument if parameters violate the family invariants
// (negative parameters, w_min <= 0, beta outside (0,1], ...).
void check_cost_fn(const CostFn& fn);

// l(x). Throws std::domain_error for x < 0. Finite for every x >= 0.
double eval_cost(const CostFn& fn, double x);

// x * l(x); exactly 0 at x = 0 for every family.
double eval_total(const CostFn& fn, double x);

// Structural classification for congestion up to W (= total demand).
// Constant/Affine/Polynomial map to NondecreasingLipschitz with the tightest
// structural constant; SharedFixed/PowerShare map to Good.
FnClass classify(const CostFn& fn, double total_demand);

// Closed-form integral int_0^x l(t) dt (the per-edge Rosenthal potential
// term). Throws std::invalid_argument for the Good families, where the
// potential is not convex.
double cost_integral(const CostFn& fn, double x);

// d/dx [x*l(x)], the marginal edge cost used for socially optimal routing.
// Defined for the nondecreasing families only (x*l(x) convex there).
double marginal_total(const CostFn& fn, double x);

const char* fn_kind_name(const CostFn& fn);
const char* fn_class_name(FnClassKind kind);
bool fn_equal(const CostFn& a, const CostFn& b);

}  // namespace congfac
