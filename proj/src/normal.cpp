#include "shewhart/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

namespace shewhart {
namespace {

const boost::math::normal_distribution<double>& standard() {
    static const boost::math::normal_distribution<double> dist(0.0, 1.0);
    return dist;
}

}  // namespace

double normal_pdf(double x) {
    if (!std::isfinite(x)) return 0.0;
    return boost::math::pdf(standard(), x);
}

double normal_cdf(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    return boost::math::cdf(standard(), x);
}

double normal_sf(double x) { return normal_cdf(-x); }

double normal_quantile(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(standard(), p);
}

double normal_isf(double p) { return -normal_quantile(p); }

}  // namespace shewhart
