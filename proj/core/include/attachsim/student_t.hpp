#pragma once

namespace attachsim {

// log I_x(a, b), the regularized incomplete beta, for a, b > 0 and x in [0, 1].
double log_ibeta(double a, double b, double x);

// log P(T > t) for Student's t with `df` degrees of freedom. Above 1e5 df the
// normal tail is used. Stays finite where the probability itself underflows.
double student_t_log_sf(double t, double df);

// Welch–Satterthwaite degrees of freedom.
double welch_df(double var_a, double n_a, double var_b, double n_b);

}  // namespace attachsim
