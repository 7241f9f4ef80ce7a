#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with global error control.
// Infinite end points are mapped onto (0,1] with x = a + (1-t)/t.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace effmass::quad {

struct Options {
    double abs_tol = 1e-12;
    double rel_tol = 1e-13;
    std::size_t max_intervals = 2000;
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes 1,3,5 and the centre.
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo, hi, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod15(const F& f, double lo, double hi)
{
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double f_centre = f(centre);

    double gauss = f_centre * gauss_weights[3];
    double kronrod = f_centre * kronrod_weights[7];
    double abs_sum = std::abs(kronrod);
    std::array<double, 7> f_lo{}, f_hi{};

    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        f_lo[j] = f(centre - dx);
        f_hi[j] = f(centre + dx);
        const double pair = f_lo[j] + f_hi[j];
        kronrod += kronrod_weights[j] * pair;
        abs_sum += kronrod_weights[j] * (std::abs(f_lo[j]) + std::abs(f_hi[j]));
        if (j % 2 == 1)
            gauss += gauss_weights[j / 2] * pair;
    }

    const double mean = 0.5 * kronrod;
    double asc = kronrod_weights[7] * std::abs(f_centre - mean);
    for (std::size_t j = 0; j < 7; ++j)
        asc += kronrod_weights[j] * (std::abs(f_lo[j] - mean) + std::abs(f_hi[j] - mean));

    const double value = kronrod * half;
    const double abs_half = std::abs(half);
    abs_sum *= abs_half;
    asc *= abs_half;

    double error = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && error != 0.0)
        error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps))
        error = std::max(50.0 * eps * abs_sum, error);

    return {lo, hi, value, error};
}

template <class F>
Result adaptive(const F& f, double lo, double hi, const Options& opt)
{
    Result res;
    std::vector<Panel> heap{kronrod15(f, lo, hi)};
    res.evaluations = 15;
    double total = heap.front().value;
    double error = heap.front().error;

    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    // Running updates drift; re-sum before trusting a converged estimate.
    auto resum = [&] {
        total = 0.0;
        error = 0.0;
        for (const Panel& p : heap) {
            total += p.value;
            error += p.error;
        }
    };

    for (;;) {
        if (error <= target()) {
            resum();
            if (error <= target())
                break;
        }
        if (heap.size() >= opt.max_intervals)
            break;
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > std::min(worst.lo, worst.hi) && mid < std::max(worst.lo, worst.hi))) {
            std::push_heap(heap.begin(), heap.end());
            break; // interval exhausted at machine resolution
        }
        heap.pop_back();
        const Panel left = kronrod15(f, worst.lo, mid);
        const Panel right = kronrod15(f, mid, worst.hi);
        res.evaluations += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
    }

    resum();
    res.value = total;
    res.abs_error = error;
    res.converged = std::isfinite(total) && error <= target();
    return res;
}

} // namespace detail

/// Integral of f over [lo, hi]; either end may be infinite. hi < lo yields the negated integral.
template <class F>
Result integrate(const F& f, double lo, double hi, const Options& opt = {})
{
    if (lo == hi)
        return {0.0, 0.0, 0, true};
    if (hi < lo) {
        Result r = integrate(f, hi, lo, opt);
        r.value = -r.value;
        return r;
    }

    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);

    if (!lo_inf && !hi_inf)
        return detail::adaptive(f, lo, hi, opt);

    if (lo_inf && hi_inf) {
        Result left = integrate(f, lo, 0.0, opt);
        Result right = integrate(f, 0.0, hi, opt);
        return {left.value + right.value, left.abs_error + right.abs_error,
                left.evaluations + right.evaluations, left.converged && right.converged};
    }

    if (hi_inf) {
        auto g = [&](double t) {
            const double x = lo + (1.0 - t) / t;
            return f(x) / (t * t);
        };
        return detail::adaptive(g, 0.0, 1.0, opt);
    }

    auto g = [&](double t) {
        const double x = hi - (1.0 - t) / t;
        return f(x) / (t * t);
    };
    return detail::adaptive(g, 0.0, 1.0, opt);
}

} // namespace effmass::quad
