#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace relaywait::numerics {

struct BisectionResult {
    double root;
    double residual;
    int iterations;
};

/// Bisection for a function with f(lo) and f(hi) of opposite sign (or zero).
/// Stops when |f| <= tol or when the bracket can no longer be split in double
/// precision; returns the endpoint or midpoint with the smallest |f|.
template <class F>
BisectionResult bisect(F&& f, double lo, double hi, double tol, int max_iter = 400)
{
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return {lo, 0.0, 0};
    if (f_hi == 0.0) return {hi, 0.0, 0};
    if ((f_lo < 0.0) == (f_hi < 0.0))
        throw std::domain_error("bisect: no sign change in bracket");

    BisectionResult best = std::abs(f_lo) < std::abs(f_hi) ? BisectionResult{lo, f_lo, 0}
                                                           : BisectionResult{hi, f_hi, 0};
    int it = 0;
    while (it < max_iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        ++it;
        const double f_mid = f(mid);
        if (std::abs(f_mid) < std::abs(best.residual)) best = {mid, f_mid, it};
        if (std::abs(f_mid) <= tol) break;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    best.iterations = it;
    return best;
}

/// Smallest double in [lo, hi] at which a nondecreasing predicate first holds,
/// given pred(hi) is true and pred(lo) is false. Splits until the bracket is
/// two adjacent doubles.
template <class Pred>
double first_true(Pred&& pred, double lo, double hi)
{
    for (int it = 0; it < 2100; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(double achieved, double requested)
        : std::runtime_error("adaptive Simpson did not converge: achieved error " +
                             std::to_string(achieved) + " > requested " +
                             std::to_string(requested)),
          achieved_(achieved)
    {
    }
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double eps, int depth, double& unmet)
{
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    if (depth <= 0) {
        unmet += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1, unmet) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1, unmet);
}

}  // namespace detail

/// Adaptive Simpson quadrature to absolute tolerance abs_tol. Throws
/// QuadratureError when the depth limit leaves more than abs_tol unresolved.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 50)
{
    if (b <= a) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double unmet = 0.0;
    const double value =
        detail::simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth, unmet);
    if (unmet > abs_tol) throw QuadratureError(unmet, abs_tol);
    return value;
}

struct MaximizeResult {
    double arg;
    double value;
    double bracket_width;
    int iterations;
};

/// Golden-section maximization of a unimodal function on [lo, hi].
template <class F>
MaximizeResult golden_section_max(F&& f, double lo, double hi, double tol, int max_iter = 500)
{
    constexpr double inv_phi = 0.6180339887498948482;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    int it = 0;
    while (hi - lo > tol && it < max_iter) {
        ++it;
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    const double arg = f1 < f2 ? x2 : x1;
    return {arg, f(arg), hi - lo, it};
}

}  // namespace relaywait::numerics
