#include "core/prior.hpp"

#include "core/error.hpp"

#include <cmath>
#include <limits>

namespace shmcpd {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ChangePrior ChangePrior::geometric(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        fail(ErrorCode::InvalidArgument, "geometric prior requires 0 < rho < 1");
    return ChangePrior(rho, 0);
}

ChangePrior ChangePrior::point_mass(long at_step) {
    if (at_step < 1)
        fail(ErrorCode::InvalidArgument, "point-mass prior step must be >= 1");
    return ChangePrior(1.0, at_step);
}

double ChangePrior::mass(long k) const {
    if (k < 1)
        return 0.0;
    if (is_point_mass())
        return k == point_mass_at_ ? 1.0 : 0.0;
    return std::exp(log_mass(k));
}

double ChangePrior::log_mass(long k) const {
    if (k < 1)
        return kNegInf;
    if (is_point_mass())
        return k == point_mass_at_ ? 0.0 : kNegInf;
    return std::log(rho_) + static_cast<double>(k - 1) * std::log1p(-rho_);
}

double ChangePrior::cdf(long n) const {
    if (n < 1)
        return 0.0;
    if (is_point_mass())
        return n >= point_mass_at_ ? 1.0 : 0.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-rho_));
}

double ChangePrior::log_tail(long n) const {
    if (n < 1)
        return 0.0;
    if (is_point_mass())
        return n < point_mass_at_ ? 0.0 : kNegInf;
    return static_cast<double>(n) * std::log1p(-rho_);
}

} // namespace shmcpd
