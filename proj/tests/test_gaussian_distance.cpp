#include <catch2/catch_amalgamated.hpp>

#include <tcs/gaussian_profile.hpp>

#include <cmath>
#include <complex>

using namespace tcs;

namespace {

Grid line_grid(double half_width, int n) {
    return Grid(Eigen::VectorXd::Constant(1, -half_width),
                Eigen::VectorXd::Constant(1, half_width),
                std::vector<int>{n});
}

// Overlap of two centered unit-mass 1D profiles sqrt(p)/pi^{1/4} e^{-p^2 x^2/2}:
// <g_p, g_q> = sqrt(2pq / (p^2 + q^2)).
double profile_overlap(double p, double q) {
    return std::sqrt(2.0 * p * q / (p * p + q * q));
}

}  // namespace

TEST_CASE("in-set target is recovered to numerical precision") {
    const Grid g = line_grid(12.0, 512);
    const double b = 1.0;
    const double q_true = 1.05;   // inside [sqrt(b/2), sqrt(3b/2)]
    const double a_true = 0.8;

    ComplexField target(g);
    target.values = sample_profile(g, Eigen::MatrixXd::Constant(1, 1, q_true),
                                   Eigen::VectorXd::Constant(1, a_true))
                        .cast<std::complex<double>>();
    target.values /= l2_norm(target);
    // Arbitrary position-dependent phase; only the modulus should matter.
    for (int i = 0; i < g.total_points(); ++i) {
        const double x = g.point(i)(0);
        target.values(i) *= std::exp(std::complex<double>(0.0, 0.7 + 0.3 * x));
    }

    const ProfileFit fit = gaussian_set_distance(target, b);
    CHECK(fit.delta0 <= 1e-6);
    CHECK(std::abs(fit.q(0, 0) - q_true) <= 1e-3);
    CHECK(std::abs(fit.alpha(0) - a_true) <= 1e-3);
    CHECK(fit.delta0 <= fit.coarse_delta0);
}

TEST_CASE("symmetric double bump sits far from every admissible profile") {
    const Grid g = line_grid(12.0, 512);
    const double b = 1.0;
    const ComplexField target = double_bump_target(g, b);

    const ProfileFit fit = gaussian_set_distance(target, b);

    // Best match latches onto one bump; the other bump contributes the
    // irreducible distance sqrt(2 - 2 sqrt((1 + e^{-16})/2)).
    const double expected = std::sqrt(2.0 - 2.0 * std::sqrt((1.0 + std::exp(-16.0)) / 2.0));
    CHECK(std::abs(expected - 0.7653668127457) <= 1e-10);
    CHECK(std::abs(fit.delta0 - expected) <= 1e-6);
    CHECK(fit.delta0 > 0.3);
    CHECK(std::abs(fit.q(0, 0) - 1.0) <= 1e-3);
    CHECK(std::abs(std::abs(fit.alpha(0)) - 4.0) <= 1e-3);
    CHECK(fit.delta0 <= fit.coarse_delta0);
    CHECK(fit.delta0 <= std::sqrt(2.0) + 1e-12);
}

TEST_CASE("distance is invariant under global phase and translation") {
    const Grid g = line_grid(12.0, 512);
    const double b = 1.0;
    const ComplexField base = double_bump_target(g, b);
    const ProfileFit ref = gaussian_set_distance(base, b);

    SECTION("global phase") {
        ComplexField rotated = base;
        rotated.values *= std::exp(std::complex<double>(0.0, 1.234));
        const ProfileFit fit = gaussian_set_distance(rotated, b);
        CHECK(std::abs(fit.delta0 - ref.delta0) <= 1e-8);
    }

    SECTION("translation by a non-integer number of cells") {
        // Same double bump recentered at +0.5, sampled directly.
        const double c = 4.0;
        const double shift = 0.5;
        ComplexField shifted(g);
        shifted.values.setZero(static_cast<Eigen::Index>(g.total_points()));
        for (int i = 0; i < g.total_points(); ++i) {
            const double x = g.point(i)(0) - shift;
            shifted.values(i) = std::exp(-b * (x - c) * (x - c) / 2.0) +
                                std::exp(-b * (x + c) * (x + c) / 2.0);
        }
        shifted.values /= l2_norm(shifted);
        const ProfileFit fit = gaussian_set_distance(shifted, b);
        CHECK(std::abs(fit.delta0 - ref.delta0) <= 1e-8);
        CHECK(std::abs(std::abs(fit.alpha(0) - shift) - c) <= 1e-3);
    }
}

TEST_CASE("target narrower than the admissible band lands on the band edge") {
    const Grid g = line_grid(12.0, 1024);
    const double b = 1.0;
    const double q_t = std::sqrt(3.0);  // above the upper edge sqrt(3/2)

    ComplexField target(g);
    target.values =
        sample_profile(g, Eigen::MatrixXd::Constant(1, 1, q_t), Eigen::VectorXd::Zero(1))
            .cast<std::complex<double>>();
    target.values /= l2_norm(target);

    const ProfileFit fit = gaussian_set_distance(target, b);

    const double q_edge = std::sqrt(1.5);
    const double expected = std::sqrt(2.0 - 2.0 * profile_overlap(q_t, q_edge));
    CHECK(std::abs(expected - 0.2409002141) <= 1e-9);
    CHECK(std::abs(fit.delta0 - expected) <= 1e-6);
    CHECK(std::abs(fit.q(0, 0) - q_edge) <= 1e-6);
    CHECK(std::abs(fit.alpha(0)) <= 1e-4);
}

TEST_CASE("unnormalized targets are rejected") {
    const Grid g = line_grid(12.0, 256);
    ComplexField target = double_bump_target(g, 1.0);
    target.values *= 1.5;
    CHECK_THROWS_AS(gaussian_set_distance(target, 1.0), NotNormalized);
}

TEST_CASE("planar anisotropic in-set target is recovered") {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -8.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 8.0);
    const Grid g(lo, hi, std::vector<int>{64, 64});
    const double b = 1.0;

    const double theta = 0.4;
    Eigen::Matrix2d rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Eigen::Matrix2d q_true =
        rot * Eigen::Vector2d(0.8, 1.15).asDiagonal() * rot.transpose();
    Eigen::VectorXd a_true(2);
    a_true << 0.5, -0.3;

    ComplexField target(g);
    target.values = sample_profile(g, q_true, a_true).cast<std::complex<double>>();
    target.values /= l2_norm(target);
    target.values *= std::exp(std::complex<double>(0.0, -0.9));

    const ProfileFit fit = gaussian_set_distance(target, b);
    CHECK(fit.delta0 <= 1e-5);
    CHECK((fit.q - q_true).norm() <= 5e-3);
    CHECK((fit.alpha - a_true).norm() <= 5e-3);
    CHECK(fit.delta0 <= fit.coarse_delta0);
}
