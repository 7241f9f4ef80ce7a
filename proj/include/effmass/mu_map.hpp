#pragma once

// The deformation coordinate mu(x) = integral_{x_ref}^{x} dz / U(z).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "effmass/error.hpp"
#include "effmass/mass_profile.hpp"
#include "effmass/quadrature.hpp"

namespace effmass {

struct MuMapOptions {
    /// Anchor with mu(x_ref) = 0. NaN selects the profile default; -inf anchors at the lower limit.
    double x_ref = std::numeric_limits<double>::quiet_NaN();
    double tolerance = 1e-12;
    /// Infinite domain ends are sampled out to |x| = cutoff.
    double cutoff = 50.0;
    std::size_t anchors = 256;
};

class MuMap {
public:
    explicit MuMap(MassProfile profile, MuMapOptions opt = {})
        : profile_(std::move(profile)), opt_(opt)
    {
        const Interval& dom = profile_.domain;
        x_ref_ = std::isnan(opt_.x_ref) ? profile_.default_anchor : opt_.x_ref;
        if (x_ref_ == -inf)
            x_ref_ = dom.lo;
        if (!(dom.contains(x_ref_)))
            throw ConfigError("mu anchor " + std::to_string(x_ref_) + " lies outside the profile domain",
                              {"x_ref:domain"});
        if (opt_.anchors < 2)
            throw ConfigError("mu map needs at least two anchors", {"anchors>=2"});

        quad_.abs_tol = opt_.tolerance;
        window_lo_ = std::isfinite(dom.lo) ? dom.lo : std::min(-opt_.cutoff, std::isfinite(x_ref_) ? x_ref_ : 0.0);
        window_hi_ = std::isfinite(dom.hi) ? dom.hi : std::max(opt_.cutoff, std::isfinite(x_ref_) ? x_ref_ : 0.0);
        build_cache();
        compute_range();
    }

    const MassProfile& profile() const { return profile_; }
    double x_ref() const { return x_ref_; }
    double tolerance() const { return opt_.tolerance; }

    /// (inf mu, sup mu) over the domain; either end may be infinite.
    std::pair<double, double> range() const { return {range_lo_, range_hi_}; }

    double operator()(double x) const { return mu(x); }

    double mu(double x) const
    {
        if (!profile_.domain.contains(x) || std::isnan(x))
            throw ConfigError("x = " + std::to_string(x) + " is outside the profile domain", {"x:domain"});
        if (x == x_ref_)
            return 0.0;
        if (std::isinf(x))
            return x > 0 ? range_hi_ : range_lo_;

        // nearest anchor
        auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
        std::size_t j;
        if (it == xs_.end())
            j = xs_.size() - 1;
        else if (it == xs_.begin())
            j = 0;
        else {
            j = static_cast<std::size_t>(it - xs_.begin());
            if (x - xs_[j - 1] < xs_[j] - x)
                --j;
        }
        if (std::abs(x - x_ref_) < std::abs(x - xs_[j]))
            return integral(x_ref_, x);
        return mus_[j] + integral(xs_[j], x);
    }

    /// mu on an increasing grid, accumulated panel by panel from the first point.
    std::vector<double> mu_on(const std::vector<double>& xs) const
    {
        std::vector<double> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i > 0 && !(xs[i] > xs[i - 1]))
                throw ConfigError("mu_on needs a strictly increasing grid", {"grid:sorted"});
            if (i == 0 || !profile_.domain.contains(xs[i]))
                out[i] = mu(xs[i]);
            else
                out[i] = out[i - 1] + integral(xs[i - 1], xs[i]);
        }
        return out;
    }

    /// x with mu(x) = m: bracket on the anchor table, then Newton with bisection safeguard.
    double inverse(double m) const
    {
        if (std::isnan(m) || !(m >= range_lo_ && m <= range_hi_) ||
            (m == range_lo_ && !std::isfinite(profile_.domain.lo)) ||
            (m == range_hi_ && !std::isfinite(profile_.domain.hi)))
            throw ConfigError("mu = " + std::to_string(m) + " is outside the range of the map",
                              {"mu:range"});
        if (m == 0.0)
            return x_ref_;

        double lo, hi, f_lo, f_hi;
        if (m < mus_.front()) {
            hi = xs_.front();
            f_hi = mus_.front() - m;
            double step = std::max(1.0, window_hi_ - window_lo_);
            for (;;) {
                lo = std::max(hi - step, profile_.domain.lo);
                f_lo = mu(lo) - m;
                if (f_lo <= 0.0)
                    break;
                if (lo == profile_.domain.lo)
                    throw NumericalError("mu inverse: failed to bracket " + std::to_string(m), "bracket");
                hi = lo;
                f_hi = f_lo;
                step *= 2.0;
            }
        } else if (m > mus_.back()) {
            lo = xs_.back();
            f_lo = mus_.back() - m;
            double step = std::max(1.0, window_hi_ - window_lo_);
            for (;;) {
                hi = std::min(lo + step, profile_.domain.hi);
                f_hi = mu(hi) - m;
                if (f_hi >= 0.0)
                    break;
                if (hi == profile_.domain.hi)
                    throw NumericalError("mu inverse: failed to bracket " + std::to_string(m), "bracket");
                lo = hi;
                f_lo = f_hi;
                step *= 2.0;
            }
        } else {
            auto it = std::upper_bound(mus_.begin(), mus_.end(), m);
            std::size_t j = std::min(static_cast<std::size_t>(it - mus_.begin()), mus_.size() - 1);
            j = std::max<std::size_t>(j, 1);
            lo = xs_[j - 1];
            hi = xs_[j];
            f_lo = mus_[j - 1] - m;
            f_hi = mus_[j] - m;
        }
        if (f_lo == 0.0)
            return lo;
        if (f_hi == 0.0)
            return hi;

        double x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        for (int iter = 0; iter < 100; ++iter) {
            const double f = mu(x) - m;
            if (f == 0.0)
                return x;
            if (f < 0.0)
                lo = x;
            else
                hi = x;
            double next = x - f * profile_.u(x);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            const double dx = std::abs(next - x);
            x = next;
            if (dx <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) ||
                hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
                return x;
        }
        throw NumericalError("mu inverse: Newton iteration did not converge for mu = " + std::to_string(m),
                             "newton");
    }

    /// Anchor table as (x, mu) pairs.
    std::vector<std::pair<double, double>> anchors() const
    {
        std::vector<std::pair<double, double>> out;
        out.reserve(xs_.size());
        for (std::size_t i = 0; i < xs_.size(); ++i)
            out.emplace_back(xs_[i], mus_[i]);
        return out;
    }

private:
    double integral(double a, double b) const
    {
        const RealFn& u = profile_.u;
        auto r = quad::integrate([&u](double z) { return 1.0 / u(z); }, a, b, quad_);
        if (!r.converged)
            throw NumericalError("mu quadrature did not converge on [" + std::to_string(a) + ", " +
                                     std::to_string(b) + "]",
                                 "quadrature");
        return r.value;
    }

    void build_cache()
    {
        const std::size_t n = opt_.anchors;
        xs_.resize(n);
        mus_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            xs_[i] = window_lo_ + (window_hi_ - window_lo_) * static_cast<double>(i) / static_cast<double>(n - 1);
        xs_.back() = window_hi_;

        // Seed at the anchor closest to x_ref, then accumulate outward.
        std::size_t seed = 0;
        if (x_ref_ >= window_hi_)
            seed = n - 1;
        else if (x_ref_ > window_lo_) {
            auto it = std::lower_bound(xs_.begin(), xs_.end(), x_ref_);
            seed = static_cast<std::size_t>(it - xs_.begin());
            if (seed > 0 && x_ref_ - xs_[seed - 1] < xs_[seed] - x_ref_)
                --seed;
        }
        mus_[seed] = integral(x_ref_, xs_[seed]);
        for (std::size_t i = seed + 1; i < n; ++i)
            mus_[i] = mus_[i - 1] + integral(xs_[i - 1], xs_[i]);
        for (std::size_t i = seed; i-- > 0;)
            mus_[i] = mus_[i + 1] - integral(xs_[i], xs_[i + 1]);
    }

    /// Integral of 1/U from a finite point out to +-inf, summed over geometric shells;
    /// shells that stop shrinking mean the map is unbounded on that side.
    double tail(double from, double to) const
    {
        const RealFn& u = profile_.u;
        const double dir = to > from ? 1.0 : -1.0;
        const double start = std::max(std::abs(from), 1.0);
        double sum = 0.0, prev = 0.0, edge = from;
        int slow = 0;
        for (int k = 0; k < 60; ++k) {
            const double next = dir * start * std::ldexp(1.0, k + 1);
            auto r = quad::integrate([&u](double z) { return 1.0 / u(z); }, edge, next, quad_);
            if (!r.converged || !std::isfinite(r.value))
                return dir * inf;
            const double shell = std::abs(r.value);
            sum += shell;
            if (shell <= 1e-17 * sum)
                return dir * sum;
            slow = k > 0 && shell > 0.9 * prev ? slow + 1 : 0;
            if (slow >= 3)
                return dir * inf;
            prev = shell;
            edge = next;
        }
        return dir * inf;
    }

    void compute_range()
    {
        const Interval& dom = profile_.domain;
        if (x_ref_ == dom.lo)
            range_lo_ = 0.0;
        else if (std::isfinite(dom.lo))
            range_lo_ = mus_.front();
        else
            range_lo_ = mus_.front() + tail(xs_.front(), -inf);

        if (x_ref_ == dom.hi)
            range_hi_ = 0.0;
        else if (std::isfinite(dom.hi))
            range_hi_ = mus_.back();
        else
            range_hi_ = mus_.back() + tail(xs_.back(), inf);
    }

    MassProfile profile_;
    MuMapOptions opt_;
    quad::Options quad_;
    double x_ref_ = 0.0;
    double window_lo_ = 0.0, window_hi_ = 0.0;
    double range_lo_ = 0.0, range_hi_ = 0.0;
    std::vector<double> xs_, mus_;
};

} // namespace effmass
