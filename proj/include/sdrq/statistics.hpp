#pragma once

namespace sdrq {

// I_x(a, b) by the continued fraction (modified Lentz), accurate to ~1e-14.
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace sdrq
