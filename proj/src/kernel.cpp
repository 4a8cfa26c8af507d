#include "coagprof/kernel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace coagprof {

void validate_term(const KernelTerm& t) {
    if (!std::isfinite(t.alpha) || !std::isfinite(t.beta) || !std::isfinite(t.weight))
        throw ConstraintViolation("kernel term has a non-finite parameter");
    if (!(t.alpha > -1.0)) throw ConstraintViolation("kernel term violates alpha > -1");
    if (!(t.alpha <= t.beta)) throw ConstraintViolation("kernel term violates alpha <= beta");
    if (!(t.beta < 1.0)) throw ConstraintViolation("kernel term violates beta < 1");
    const double lam = t.alpha + t.beta;
    if (!(lam > -1.0 && lam < 1.0))
        throw ConstraintViolation("kernel term violates -1 < alpha + beta < 1");
    if (!(t.weight > 0.0)) throw ConstraintViolation("kernel term violates weight > 0");
}

KernelSpec make_kernel(std::vector<KernelTerm> terms) {
    if (terms.empty()) throw ConstraintViolation("kernel requires at least one term");
    for (const auto& t : terms) validate_term(t);
    const double lambda = terms.front().alpha + terms.front().beta;
    double min_alpha = terms.front().alpha;
    for (const auto& t : terms) {
        const double lam = t.alpha + t.beta;
        // Mixed homogeneity would break the scaling ansatz; demand exact
        // agreement up to rounding.
        if (std::abs(lam - lambda) > 1e-14 * (1.0 + std::abs(lambda))) {
            std::ostringstream os;
            os << "kernel terms have mixed homogeneity degrees " << lambda << " and " << lam;
            throw ConstraintViolation(os.str());
        }
        min_alpha = std::min(min_alpha, t.alpha);
    }
    KernelSpec k;
    k.terms = std::move(terms);
    k.lambda = lambda;
    k.cls = min_alpha < 0.0   ? KernelClass::alpha_neg
            : min_alpha > 0.0 ? KernelClass::alpha_pos
                              : KernelClass::alpha_zero;
    return k;
}

KernelSpec make_kernel(double alpha, double beta, double weight) {
    return make_kernel(std::vector<KernelTerm>{KernelTerm{alpha, beta, weight}});
}

namespace {

// x^e with the exponent-zero case short-circuited so that a(x, y) stays exact
// for the constant kernel and homogeneity holds to rounding accuracy.
inline double power(double x, double e) {
    if (e == 0.0) return 1.0;
    return std::pow(x, e);
}

}  // namespace

double evaluate(const KernelSpec& k, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw KernelDomainError("kernel arguments must be positive");
    double s = 0.0;
    for (const auto& t : k.terms)
        s += t.weight * (power(x, t.alpha) * power(y, t.beta) +
                         power(x, t.beta) * power(y, t.alpha));
    return s;
}

}  // namespace coagprof
