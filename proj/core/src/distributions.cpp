#include "panelmed/distributions.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "panelmed/error.hpp"

namespace panelmed {

double t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw NumericalError("t distribution needs positive degrees of freedom");
    if (std::isnan(t)) throw NumericalError("t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    // cdf(complement) keeps precision in the far tail
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    return p > 1.0 ? 1.0 : p;
}

double t_quantile(double prob, double df) {
    if (!(df > 0.0)) throw NumericalError("t distribution needs positive degrees of freedom");
    if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("quantile probability outside (0, 1)");
    return boost::math::quantile(boost::math::students_t(df), prob);
}

}  // namespace panelmed
