#pragma once

#include <cstddef>
#include <vector>

#include "coagprof/errors.hpp"

namespace coagprof {

// One homogeneous summand  w * (x^alpha y^beta + x^beta y^alpha)  with
// -1 < alpha <= beta < 1 and alpha + beta in (-1, 1). Homogeneity degree is
// alpha + beta.
struct KernelTerm {
    double alpha = 0.0;
    double beta = 0.0;
    double weight = 1.0;
};

// Which rewritten form of the profile equation applies. Decided by the
// smallest alpha across terms: negative exponents force exponential decay of
// the profile at the origin, alpha = 0 leaves a power-law singularity there.
enum class KernelClass { alpha_neg, alpha_zero, alpha_pos };

// Throws ConstraintViolation naming the violated inequality.
void validate_term(const KernelTerm& t);

struct KernelSpec {
    std::vector<KernelTerm> terms;
    double lambda = 0.0;  // shared homogeneity degree alpha + beta
    KernelClass cls = KernelClass::alpha_zero;
};

// Validates every term and that all terms share one homogeneity degree.
KernelSpec make_kernel(std::vector<KernelTerm> terms);
KernelSpec make_kernel(double alpha, double beta, double weight = 1.0);

// a(x, y) = sum_t w_t (x^at y^bt + x^bt y^at), for x, y > 0.
double evaluate(const KernelSpec& k, double x, double y);

}  // namespace coagprof
