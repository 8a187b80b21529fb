#pragma once

namespace shewhart {

// Standard normal helpers. The upper-tail variants are computed directly so
// that probabilities far in the tail keep their relative accuracy.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_sf(double x);
double normal_quantile(double p);
double normal_isf(double p);

}  // namespace shewhart
