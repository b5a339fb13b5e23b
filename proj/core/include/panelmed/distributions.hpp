#pragma once

namespace panelmed {

/// Two-sided p-value P(|T| >= |t|) for Student's t with `df` degrees of freedom.
/// Infinite |t| gives 0.
double t_two_sided_p(double t, double df);

/// Quantile of Student's t; `prob` in (0, 1).
double t_quantile(double prob, double df);

}  // namespace panelmed
