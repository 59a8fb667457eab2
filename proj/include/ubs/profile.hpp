#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ubs/errors.hpp"

namespace ubs {

// Sampled control function on a uniform grid with natural cubic spline
// interpolation. Evaluation outside [t_start, t_end] clamps to the boundary
// value. Immutable after construction.
class TimeProfile {
  public:
    TimeProfile() = default;

    TimeProfile(double t_start, double t_end, std::vector<double> samples)
        : t0_(t_start), t1_(t_end), y_(std::move(samples)) {
        if (y_.size() < 2) throw BoundaryError("TimeProfile: need at least 2 samples");
        if (!(t1_ > t0_)) throw BoundaryError("TimeProfile: t_end must exceed t_start");
        dt_ = (t1_ - t0_) / static_cast<double>(y_.size() - 1);
        build_spline();
    }

    static TimeProfile sample(const std::function<double(double)>& f, double t_start,
                              double t_end, std::size_t n) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = f(t_start + (t_end - t_start) * static_cast<double>(i) /
                                 static_cast<double>(n - 1));
        return TimeProfile(t_start, t_end, std::move(y));
    }

    static TimeProfile constant(double value, double t_start, double t_end) {
        return TimeProfile(t_start, t_end, std::vector<double>{value, value});
    }

    double t_start() const { return t0_; }
    double t_end() const { return t1_; }
    double duration() const { return t1_ - t0_; }
    double dt() const { return dt_; }
    std::size_t size() const { return y_.size(); }
    const std::vector<double>& samples() const { return y_; }
    double node_time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }

    double operator()(double t) const { return value(t); }

    double value(double t) const {
        if (t <= t0_) return y_.front();
        if (t >= t1_) return y_.back();
        const auto [i, x] = locate(t);
        const double a = y_[i], b = y_[i + 1];
        const double m0 = m_[i], m1 = m_[i + 1];
        // natural cubic spline segment in local coordinate x in [0,1]
        const double h2 = dt_ * dt_;
        return a + x * (b - a - h2 * (2.0 * m0 + m1) / 6.0) +
               x * x * (h2 * m0 / 2.0) + x * x * x * (h2 * (m1 - m0) / 6.0);
    }

    double derivative(double t) const {
        if (t <= t0_) t = t0_;
        if (t >= t1_) t = t1_;
        const auto [i, x] = locate(t);
        const double a = y_[i], b = y_[i + 1];
        const double m0 = m_[i], m1 = m_[i + 1];
        const double h2 = dt_ * dt_;
        const double d = (b - a - h2 * (2.0 * m0 + m1) / 6.0) + x * (h2 * m0) +
                         x * x * (h2 * (m1 - m0) / 2.0);
        return d / dt_;
    }

  private:
    std::pair<std::size_t, double> locate(double t) const {
        double u = (t - t0_) / dt_;
        auto i = static_cast<std::size_t>(u);
        if (i >= y_.size() - 1) i = y_.size() - 2;
        return {i, u - static_cast<double>(i)};
    }

    void build_spline() {
        const std::size_t n = y_.size();
        m_.assign(n, 0.0);
        if (n == 2) return;  // linear
        // Thomas algorithm for natural spline second derivatives.
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i)
            d[i] = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (dt_ * dt_);
        // diagonal 4, off-diagonal 1 (uniform grid, scaled)
        c[1] = 1.0 / 4.0;
        d[1] = d[1] / 4.0;
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = 4.0 - c[i - 1];
            c[i] = 1.0 / w;
            d[i] = (d[i] - d[i - 1]) / w;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
            if (i == 1) break;
        }
    }

    double t0_ = 0.0;
    double t1_ = 1.0;
    double dt_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_;  // spline second derivatives at nodes
};

// Control function given analytically: value plus derivatives where the
// synthesis pipeline needs them. Sampling into a TimeProfile is only for
// export; integration paths use the closure directly.
struct AnalyticProfile {
    std::function<double(double)> f;
    double t_start = 0.0;
    double t_end = 1.0;

    double operator()(double t) const {
        if (t < t_start) t = t_start;
        if (t > t_end) t = t_end;
        return f(t);
    }

    TimeProfile sampled(std::size_t n) const {
        return TimeProfile::sample(f, t_start, t_end, n);
    }
};

// Default grid density: 200 samples per 2*pi period of the reference
// oscillator (dimensionless units).
inline std::size_t default_grid_points(double t_start, double t_end,
                                       double per_period = 200.0) {
    const double periods = (t_end - t_start) / (2.0 * 3.141592653589793);
    auto n = static_cast<std::size_t>(std::ceil(periods * per_period)) + 1;
    return n < 33 ? 33 : n;
}

}  // namespace ubs
