#include <doctest.h>

#include <cmath>

#include "fatnode/calibrate.hpp"
#include "fatnode/errors.hpp"
#include "test_helpers.hpp"

using namespace fatnode;
using fatnode::testing::haswell_node;
using fatnode::testing::knl_node;

namespace {

double objective(const NodeSpec& spec, const ApplicationProfile& profile,
                 const std::vector<CalibrationObservation>& obs) {
    double s = 0.0;
    for (const auto& o : obs) {
        const double model =
            configuration_throughput(profile, o.config, spec).total_rate_epm;
        const double rel = (model - o.total_rate_epm) / o.total_rate_epm;
        s += rel * rel;
    }
    return s;
}

}  // namespace

TEST_CASE("haswell fit: rate and mp_overhead with sigma fixed") {
    const NodeSpec spec = haswell_node();
    ApplicationProfile base;
    base.sp_footprint_mib = 900;
    base.shared_fraction = 0.33;
    base.single_thread_rate_epm = 0.2;  // start away from the answer
    base.mp_overhead = 0.0;
    base.ht_scaling = {1.0, 1.25};

    const std::vector<CalibrationObservation> obs = {
        {{32, 1}, 6.0},
        {{8, 4}, 5.8},
    };

    const CalibrationResult fit =
        calibrate(spec, base, {"single_thread_rate_epm", "mp_overhead"}, obs);

    // closed form: mp_overhead = 1 - 5.8/6.0, rate = 6.0 / (16 * 1.25)
    CHECK(fit.profile.mp_overhead == doctest::Approx(1.0 - 5.8 / 6.0).epsilon(1e-6));
    CHECK(fit.profile.single_thread_rate_epm == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(fit.rms_relative_residual < 1e-9);

    // grid-search oracle: no nearby grid point does better
    const double fitted_cost = objective(spec, fit.profile, obs);
    for (double rate = 0.25; rate <= 0.35; rate += 0.005) {
        for (double ov = 0.0; ov <= 0.08; ov += 0.004) {
            ApplicationProfile candidate = fit.profile;
            candidate.single_thread_rate_epm = rate;
            candidate.mp_overhead = ov;
            CHECK(objective(spec, candidate, obs) >= fitted_cost - 1e-15);
        }
    }
}

TEST_CASE("knl fit: rate and sigma(2) with mp_overhead fixed") {
    const NodeSpec spec = knl_node();
    ApplicationProfile base;
    base.sp_footprint_mib = 900;
    base.shared_fraction = 0.33;
    base.single_thread_rate_epm = 0.05;
    base.mp_overhead = 1.0 / 30.0;
    base.ht_scaling = {1.0, 1.2};

    const std::vector<CalibrationObservation> obs = {
        {{85, 1}, 3.2},
        {{8, 17}, 3.6},
    };

    const CalibrationResult fit =
        calibrate(spec, base, {"single_thread_rate_epm", "ht_scaling[2]"}, obs);

    CHECK(fit.rms_relative_residual < 1e-9);
    CHECK(fit.profile.single_thread_rate_epm ==
          doctest::Approx(0.044489519945909405).epsilon(1e-6));
    CHECK(fit.profile.sigma(2) == doctest::Approx(1.2310030395136775).epsilon(1e-6));

    // the fitted profile reproduces both observations
    CHECK(configuration_throughput(fit.profile, {85, 1}, spec).total_rate_epm ==
          doctest::Approx(3.2).epsilon(1e-9));
    CHECK(configuration_throughput(fit.profile, {8, 17}, spec).total_rate_epm ==
          doctest::Approx(3.6).epsilon(1e-9));

    // grid-search oracle around the fit
    const double fitted_cost = objective(spec, fit.profile, obs);
    for (double rate = 0.040; rate <= 0.050; rate += 0.0005) {
        for (double s2 = 1.15; s2 <= 1.30; s2 += 0.005) {
            ApplicationProfile candidate = fit.profile;
            candidate.single_thread_rate_epm = rate;
            candidate.ht_scaling = {1.0, s2};
            CHECK(objective(spec, candidate, obs) >= fitted_cost - 1e-15);
        }
    }
}

TEST_CASE("single observation, single unknown: exact fit") {
    const NodeSpec spec = haswell_node();
    ApplicationProfile base;
    base.sp_footprint_mib = 900;
    base.ht_scaling = {1.0, 1.25};
    base.single_thread_rate_epm = 1.0;

    const std::vector<CalibrationObservation> obs = {{{16, 1}, 4.0}};
    const CalibrationResult fit = calibrate(spec, base, {"single_thread_rate_epm"}, obs);
    CHECK(fit.rms_relative_residual < 1e-12);
    CHECK(fit.profile.single_thread_rate_epm == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("under-determined systems are rejected with the free parameters named") {
    const NodeSpec spec = haswell_node();
    ApplicationProfile base;
    base.sp_footprint_mib = 900;
    base.ht_scaling = {1.0, 1.25};

    const std::vector<CalibrationObservation> one = {{{16, 1}, 4.0}};
    CHECK_THROWS_AS(
        calibrate(spec, base, {"single_thread_rate_epm", "mp_overhead"}, one),
        UnderdeterminedError);
    try {
        calibrate(spec, base, {"single_thread_rate_epm", "mp_overhead"}, one);
    } catch (const UnderdeterminedError& e) {
        const std::string what = e.what();
        CHECK(what.find("single_thread_rate_epm") != std::string::npos);
        CHECK(what.find("mp_overhead") != std::string::npos);
        CHECK(e.free_parameters.size() == 2);
    }

    CHECK_THROWS_AS(calibrate(spec, base, {"single_thread_rate_epm"}, {}),
                    UnderdeterminedError);
}

TEST_CASE("unknown free parameter name") {
    const NodeSpec spec = haswell_node();
    ApplicationProfile base;
    base.sp_footprint_mib = 900;
    const std::vector<CalibrationObservation> obs = {{{16, 1}, 4.0}};
    CHECK_THROWS_AS(calibrate(spec, base, {"bogus"}, obs), ValidationError);
    CHECK_THROWS_AS(calibrate(spec, base, {"ht_scaling[1]"}, obs), ValidationError);
}
