#pragma once
// Analytic steady state of the rescaled process: an inverse-gamma with shape
// zeta = 1 + 2 tau / sigma^2 and scale zeta - 1, which has mean exactly 1.

#include <cmath>
#include <stdexcept>

#include "rgbm/rng.hpp"
#include "rgbm/stats.hpp"

namespace rgbm {

inline double zeta_of(double tau, double sigma_sq) {
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("zeta_of: sigma_sq must be > 0");
    if (!(tau > 0.0))
        throw std::invalid_argument("zeta_of: no stationary distribution for tau <= 0");
    return 1.0 + 2.0 * tau / sigma_sq;
}

struct StationaryDistribution {
    double zeta;

    explicit StationaryDistribution(double zeta_) : zeta(zeta_) {
        if (!(zeta > 1.0)) throw std::invalid_argument("StationaryDistribution: zeta must be > 1");
    }

    double pdf(double y) const {
        if (!(y > 0.0)) throw std::invalid_argument("stationary pdf: y must be > 0");
        double s = zeta - 1.0;
        return std::exp(zeta * std::log(s) - std::lgamma(zeta) - s / y -
                        (1.0 + zeta) * std::log(y));
    }

    double cdf(double y) const {
        if (y <= 0.0) return 0.0;
        return gamma_q(zeta, (zeta - 1.0) / y);
    }

    double mean() const { return 1.0; }

    double variance() const {
        if (!(zeta > 2.0)) throw std::invalid_argument("stationary variance: needs zeta > 2");
        return 1.0 / (zeta - 2.0);
    }
};

// Unit-scale gamma(shape) variate, Marsaglia-Tsang squeeze method (shape >= 1).
inline double gamma_variate(double shape, CounterStream& rng) {
    if (!(shape >= 1.0)) throw std::invalid_argument("gamma_variate: shape must be >= 1");
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z = rng.next_normal();
        double b = 1.0 + c * z;
        if (b <= 0.0) continue;
        double v = b * b * b;
        double u = rng.next_unit();
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
    }
}

// Draw y = (zeta - 1) / gamma(zeta), i.e. an exact sample from the target.
inline std::vector<double> stationary_sample(std::size_t n, const StationaryDistribution& dist,
                                             CounterStream& rng) {
    std::vector<double> y(n);
    for (auto& v : y) v = (dist.zeta - 1.0) / gamma_variate(dist.zeta, rng);
    return y;
}

} // namespace rgbm
