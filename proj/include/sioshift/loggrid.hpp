#pragma once
// Uniform grids in the logarithmic variable x = log t and the functions
// sampled on them. A grid may be offset (origin far from 0) so that dilated
// functions are represented by relabelling instead of resampling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace sioshift {

using cplx = std::complex<double>;

struct LogGrid {
    double origin = -12.0;  ///< x of sample 0
    double step = 24.0 / 16384.0;
    std::size_t count = 16384;

    /// 2^log2n samples on [offset - halfWidth, offset + halfWidth).
    static LogGrid symmetric(double halfWidth, int log2n, double offset = 0.0) {
        const std::size_t n = std::size_t{1} << log2n;
        return LogGrid{offset - halfWidth, 2.0 * halfWidth / static_cast<double>(n), n};
    }

    double x(std::size_t j) const { return origin + static_cast<double>(j) * step; }
    double front() const { return origin; }
    double back() const { return x(count - 1); }

    /// Adds `extra` points on both sides.
    LogGrid extended(std::size_t extra) const {
        return LogGrid{origin - static_cast<double>(extra) * step, step, count + 2 * extra};
    }

    LogGrid decimated(std::size_t stride) const {
        return LogGrid{origin, step * static_cast<double>(stride), (count + stride - 1) / stride};
    }

    LogGrid shifted(double dx) const { return LogGrid{origin + dx, step, count}; }

    /// Signed index offset of `other` relative to this grid; throws unless aligned.
    long alignedOffset(const LogGrid& other) const {
        if (std::abs(other.step - step) > 1e-12 * step)
            throw Error("grids have different steps");
        const double k = (other.origin - origin) / step;
        const double r = std::round(k);
        if (std::abs(k - r) > 1e-6) throw Error("grids are not aligned");
        return static_cast<long>(r);
    }
};

enum class OutOfGrid { Throw, Zero };

class LogGridFunction {
public:
    LogGridFunction() = default;
    LogGridFunction(LogGrid g, std::vector<cplx> samples) : grid_(g), samples_(std::move(samples)) {
        if (samples_.size() != grid_.count) throw Error("sample count does not match grid");
    }
    explicit LogGridFunction(LogGrid g) : grid_(g), samples_(g.count, cplx{}) {}

    /// Samples fn(x) at the grid points (x = log t).
    template <class F>
    static LogGridFunction sample(const LogGrid& g, F&& fn) {
        std::vector<cplx> s(g.count);
        for (std::size_t j = 0; j < g.count; ++j) s[j] = fn(g.x(j));
        return LogGridFunction(g, std::move(s));
    }

    const LogGrid& grid() const { return grid_; }
    std::size_t size() const { return samples_.size(); }
    std::span<const cplx> samples() const { return samples_; }
    std::span<cplx> samples() { return samples_; }
    cplx operator[](std::size_t j) const { return samples_[j]; }
    cplx& operator[](std::size_t j) { return samples_[j]; }

    /// Cubic (four-point Lagrange) interpolation in x.
    cplx interpolate(double x, OutOfGrid policy = OutOfGrid::Throw) const {
        const double s = (x - grid_.origin) / grid_.step;
        const double last = static_cast<double>(grid_.count - 1);
        if (s < -1e-9 || s > last + 1e-9) {
            if (policy == OutOfGrid::Zero) return {};
            throw ExtrapolationError("interpolation at x=" + std::to_string(x) + " outside grid [" +
                                     std::to_string(grid_.front()) + ", " + std::to_string(grid_.back()) + "]");
        }
        long j = static_cast<long>(std::floor(s));
        double frac = s - static_cast<double>(j);
        if (frac < 1e-12) return samples_[static_cast<std::size_t>(std::clamp(j, 0L, static_cast<long>(last)))];
        if (frac > 1.0 - 1e-12) return samples_[static_cast<std::size_t>(std::clamp(j + 1, 0L, static_cast<long>(last)))];
        const long n = static_cast<long>(grid_.count);
        // Stencil j-1..j+2; near the edges the missing neighbours count as
        // zero under the Zero policy and shift the stencil otherwise.
        long base = j - 1;
        if (policy == OutOfGrid::Throw) {
            if (base < 0) base = 0;
            if (base + 3 >= n) base = n - 4;
        }
        const double u = s - static_cast<double>(base);
        cplx acc{};
        for (int k = 0; k < 4; ++k) {
            const long idx = base + k;
            if (idx < 0 || idx >= n) continue;
            double w = 1.0;
            for (int m = 0; m < 4; ++m)
                if (m != k) w *= (u - m) / static_cast<double>(k - m);
            acc += w * samples_[static_cast<std::size_t>(idx)];
        }
        return acc;
    }

    /// Re-expresses this function on an aligned grid; points outside the
    /// source range become zero.
    LogGridFunction resampledOn(const LogGrid& target) const {
        const long off = grid_.alignedOffset(target);
        LogGridFunction out(target);
        for (std::size_t j = 0; j < target.count; ++j) {
            const long src = static_cast<long>(j) + off;
            if (src >= 0 && src < static_cast<long>(grid_.count)) out[j] = samples_[static_cast<std::size_t>(src)];
        }
        return out;
    }

    LogGridFunction decimated(std::size_t stride) const {
        LogGridFunction out(grid_.decimated(stride));
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = samples_[j * stride];
        return out;
    }

    /// Same samples attached to a grid moved by dx (exact dilation relabel).
    LogGridFunction relabelled(double dx) const { return LogGridFunction(grid_.shifted(dx), samples_); }

    /// L^p norm of the samples with respect to dx (trapezoid rule, end
    /// corrections dropped). For samples of u = E Phi f this is ||f||_{L^p(R+)}.
    double normP(double p) const {
        double acc = 0.0;
        for (const cplx& v : samples_) acc += std::pow(std::abs(v), p);
        return std::pow(acc * grid_.step, 1.0 / p);
    }

    /// L^p(R+, dt) norm when the samples are f(e^x): weight e^x.
    double normPHalfLine(double p) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < samples_.size(); ++j)
            acc += std::pow(std::abs(samples_[j]), p) * std::exp(grid_.x(j));
        return std::pow(acc * grid_.step, 1.0 / p);
    }

    double maxAbs() const {
        double m = 0.0;
        for (const cplx& v : samples_) m = std::max(m, std::abs(v));
        return m;
    }

    LogGridFunction& operator+=(const LogGridFunction& o) {
        checkSame(o);
        for (std::size_t j = 0; j < samples_.size(); ++j) samples_[j] += o.samples_[j];
        return *this;
    }
    LogGridFunction& operator-=(const LogGridFunction& o) {
        checkSame(o);
        for (std::size_t j = 0; j < samples_.size(); ++j) samples_[j] -= o.samples_[j];
        return *this;
    }
    LogGridFunction& operator*=(cplx s) {
        for (cplx& v : samples_) v *= s;
        return *this;
    }
    friend LogGridFunction operator+(LogGridFunction a, const LogGridFunction& b) { return a += b; }
    friend LogGridFunction operator-(LogGridFunction a, const LogGridFunction& b) { return a -= b; }
    friend LogGridFunction operator*(cplx s, LogGridFunction a) { return a *= s; }

private:
    void checkSame(const LogGridFunction& o) const {
        if (o.grid_.count != grid_.count || grid_.alignedOffset(o.grid_) != 0)
            throw Error("grid functions live on different grids");
    }

    LogGrid grid_;
    std::vector<cplx> samples_;
};

/// Phi f = t^{1/p} f on samples f(e^x).
inline LogGridFunction toPhiPicture(const LogGridFunction& f, double p) {
    LogGridFunction u = f;
    for (std::size_t j = 0; j < u.size(); ++j) u[j] *= std::exp(u.grid().x(j) / p);
    return u;
}

inline LogGridFunction fromPhiPicture(const LogGridFunction& u, double p) {
    LogGridFunction f = u;
    for (std::size_t j = 0; j < f.size(); ++j) f[j] *= std::exp(-f.grid().x(j) / p);
    return f;
}

}  // namespace sioshift
