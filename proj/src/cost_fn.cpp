#include "congfac/cost_fn.hpp"

#include <cmath>
#include <stdexcept>

namespace congfac {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_domain(double x) {
    if (x < 0.0 || std::isnan(x))
        throw std::domain_error("cost function evaluated at negative flow");
}

}  // namespace

void check_cost_fn(const CostFn& fn) {
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFn>) {
                require(f.b >= 0.0, "constant: b must be nonnegative");
            } else if constexpr (std::is_same_v<T, AffineFn>) {
                require(f.a >= 0.0 && f.b >= 0.0, "affine: a, b must be nonnegative");
            } else if constexpr (std::is_same_v<T, PolynomialFn>) {
                for (double c : f.coeffs)
                    require(c >= 0.0, "polynomial: coefficients must be nonnegative");
            } else if constexpr (std::is_same_v<T, SharedFixedFn>) {
                require(f.c >= 0.0 && f.l >= 0.0, "shared_fixed: c, l must be nonnegative");
                require(f.w_min > 0.0, "shared_fixed: w_min must be positive");
            } else {
                require(f.c >= 0.0, "power_share: c must be nonnegative");
                require(f.beta > 0.0 && f.beta <= 1.0, "power_share: beta must lie in (0,1]");
                require(f.w_floor > 0.0, "power_share: w_floor must be positive");
            }
        },
        fn);
}

double eval_cost(const CostFn& fn, double x) {
    check_domain(x);
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFn>) {
                return f.b;
            } else if constexpr (std::is_same_v<T, AffineFn>) {
                return f.a * x + f.b;
            } else if constexpr (std::is_same_v<T, PolynomialFn>) {
                double v = 0.0;
                for (auto it = f.coeffs.rbegin(); it != f.coeffs.rend(); ++it) v = v * x + *it;
                return v;
            } else if constexpr (std::is_same_v<T, SharedFixedFn>) {
                if (x >= f.w_min) return f.c / x + f.l;
                return f.c / f.w_min + f.l;
            } else {
                double at = x > 0.0 ? x : f.w_floor;
                return f.c * std::pow(at, f.beta - 1.0);
            }
        },
        fn);
}

double eval_total(const CostFn& fn, double x) {
    check_domain(x);
    if (x == 0.0) return 0.0;
    if (const auto* f = std::get_if<SharedFixedFn>(&fn)) {
        if (x >= f->w_min) return f->c + f->l * x;
        return x * (f->c / f->w_min + f->l);
    }
    if (const auto* f = std::get_if<PowerShareFn>(&fn)) return f->c * std::pow(x, f->beta);
    return x * eval_cost(fn, x);
}

FnClass classify(const CostFn& fn, double total_demand) {
    if (!(total_demand > 0.0))
        throw std::invalid_argument("classify: total demand must be positive");
    return std::visit(
        [total_demand](const auto& f) -> FnClass {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFn>) {
                return {FnClassKind::NondecreasingLipschitz, 0.0};
            } else if constexpr (std::is_same_v<T, AffineFn>) {
                return {FnClassKind::NondecreasingLipschitz, f.a};
            } else if constexpr (std::is_same_v<T, PolynomialFn>) {
                // Derivative sum_j j*c_j*x^(j-1) is nondecreasing (c_j >= 0),
                // so its value at W is the tight Lipschitz constant on [0,W].
                double a = 0.0;
                for (std::size_t j = 1; j < f.coeffs.size(); ++j)
                    a += static_cast<double>(j) * f.coeffs[j] *
                         std::pow(total_demand, static_cast<double>(j - 1));
                return {FnClassKind::NondecreasingLipschitz, a};
            } else {
                return {FnClassKind::Good, 0.0};
            }
        },
        fn);
}

double cost_integral(const CostFn& fn, double x) {
    check_domain(x);
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFn>) {
                return f.b * x;
            } else if constexpr (std::is_same_v<T, AffineFn>) {
                return 0.5 * f.a * x * x + f.b * x;
            } else if constexpr (std::is_same_v<T, PolynomialFn>) {
                double v = 0.0;
                for (std::size_t j = f.coeffs.size(); j-- > 0;)
                    v = v * x + f.coeffs[j] / static_cast<double>(j + 1);
                return v * x;
            } else {
                throw std::invalid_argument(
                    "cost_integral: unsupported for nonincreasing families (potential not convex)");
            }
        },
        fn);
}

double marginal_total(const CostFn& fn, double x) {
    check_domain(x);
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFn>) {
                return f.b;
            } else if constexpr (std::is_same_v<T, AffineFn>) {
                return 2.0 * f.a * x + f.b;
            } else if constexpr (std::is_same_v<T, PolynomialFn>) {
                // d/dx sum c_j x^(j+1) = sum (j+1) c_j x^j
                double v = 0.0;
                for (std::size_t j = f.coeffs.size(); j-- > 0;)
                    v = v * x + static_cast<double>(j + 1) * f.coeffs[j];
                return v;
            } else {
                throw std::invalid_argument(
                    "marginal_total: unsupported for nonincreasing families (x*l(x) not convex)");
            }
        },
        fn);
}

const char* fn_kind_name(const CostFn& fn) {
    switch (fn.index()) {
        case 0: return "constant";
        case 1: return "affine";
        case 2: return "polynomial";
        case 3: return "shared_fixed";
        default: return "power_share";
    }
}

const char* fn_class_name(FnClassKind kind) {
    switch (kind) {
        case FnClassKind::NondecreasingLipschitz: return "nondecreasing_lipschitz";
        case FnClassKind::Good: return "good";
        default: return "neither";
    }
}

bool fn_equal(const CostFn& a, const CostFn& b) {
    if (a.index() != b.index()) return false;
    if (const auto* x = std::get_if<ConstantFn>(&a))
        return x->b == std::get<ConstantFn>(b).b;
    if (const auto* x = std::get_if<AffineFn>(&a)) {
        const auto& y = std::get<AffineFn>(b);
        return x->a == y.a && x->b == y.b;
    }
    if (const auto* x = std::get_if<PolynomialFn>(&a))
        return x->coeffs == std::get<PolynomialFn>(b).coeffs;
    if (const auto* x = std::get_if<SharedFixedFn>(&a)) {
        const auto& y = std::get<SharedFixedFn>(b);
        return x->c == y.c && x->l == y.l && x->w_min == y.w_min;
    }
    const auto& x = std::get<PowerShareFn>(a);
    const auto& y = std::get<PowerShareFn>(b);
    return x.c == y.c && x.beta == y.beta && x.w_floor == y.w_floor;
}

}  // namespace congfac
