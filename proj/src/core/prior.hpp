#pragma once

namespace shmcpd {

// Prior on the change step lambda (1-based). Geometric(rho) is the detector's
// model; the point mass is a degenerate limit used by estimation checks.
class ChangePrior {
public:
    static ChangePrior geometric(double rho);
    static ChangePrior point_mass(long at_step);

    bool is_point_mass() const noexcept { return point_mass_at_ > 0; }
    double rho() const noexcept { return rho_; }
    long point_mass_step() const noexcept { return point_mass_at_; }

    double mass(long k) const;     // pi(k)
    double log_mass(long k) const; // ln pi(k)
    double cdf(long n) const;      // P(lambda <= n) = sum_{k<=n} pi(k)
    double log_tail(long n) const; // ln P(lambda > n)

private:
    ChangePrior(double rho, long at) : rho_(rho), point_mass_at_(at) {}

    double rho_ = 0.0;
    long point_mass_at_ = 0;
};

} // namespace shmcpd
