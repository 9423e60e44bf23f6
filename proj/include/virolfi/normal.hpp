#pragma once

namespace virolfi {

double normal_pdf(double z);
double normal_cdf(double z);

/// log Phi(z), accurate far into the lower tail.
double log_normal_cdf(double z);

/// phi(z) / Phi(z), stable for large negative z.
double normal_pdf_over_cdf(double z);

}  // namespace virolfi
