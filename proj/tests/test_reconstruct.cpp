#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gisim/error.hpp"
#include "gisim/metrics.hpp"
#include "gisim/reconstruct.hpp"
#include "gisim/scenes.hpp"
#include "gisim/simulator.hpp"
#include "support.hpp"

using namespace gisim;
using test::as_vector;
using test::max_scaled_error;

namespace {

double only(const ReconImage& img) {
    REQUIRE(img.size() == 1);
    return img.data()[0];
}

Errc error_code(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected gisim::Error");
    return Errc::io;
}

double stddev(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    return std::sqrt(sq / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("hand-check dataset through every estimator") {
    const auto d = test::hand_dataset();
    CHECK(only(recon_g2(d).image()) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(only(recon_delta_gi(d).image()) == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
    CHECK(std::abs(only(recon_dgi(d).image())) <= 1e-12);

    const auto ci = recon_ci(d);
    CHECK(only(ci.positive()) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(only(ci.negative()) == doctest::Approx(0.75).epsilon(1e-12));

    CHECK(only(recon_sgi(d, SgiMode::both).image()) == doctest::Approx(1.25).epsilon(1e-12));
    const auto s2 = recon_sgi(d, SgiMode::bucket);
    CHECK(only(s2.positive()) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(only(s2.negative()) == doctest::Approx(1.25).epsilon(1e-12));
    const auto s3 = recon_sgi(d, SgiMode::reference);
    CHECK(only(s3.positive()) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(only(s3.negative()) == doctest::Approx(1.25).epsilon(1e-12));

    // The test oracles agree with the same hand values.
    CHECK(test::oracle::g2(d)[0] == doctest::Approx(3.5));
    CHECK(test::oracle::delta_gi(d)[0] == doctest::Approx(7.0 / 9.0));
    CHECK(test::oracle::sgi(d, 1, 1, false)[0][0] == doctest::Approx(1.25));
}

TEST_CASE("g2 edge cases") {
    const auto zero = test::make_dataset(2, 1, {{1, 2}, {3, 4}}, {0.0, 0.0});
    for (double v : as_vector(recon_g2(zero).image())) CHECK(v == 0.0);

    const auto single = test::make_dataset(2, 1, {{0.3, 0.7}}, {1.7});
    const auto img = recon_g2(single).image();
    CHECK(img.data()[0] == 1.7 * 0.3);
    CHECK(img.data()[1] == 1.7 * 0.7);
}

TEST_CASE("delta-GI edge cases") {
    const auto flat_bucket = test::make_dataset(2, 1, {{1, 2}, {3, 0.5}, {0.2, 0.1}}, {2.0, 2.0, 2.0});
    for (double v : as_vector(recon_delta_gi(flat_bucket).image())) CHECK(std::abs(v) <= 1e-15);

    const auto flat_frames = test::make_dataset(2, 1, {{1, 2}, {1, 2}, {1, 2}}, {1.0, 5.0, -2.0});
    for (double v : as_vector(recon_delta_gi(flat_frames).image())) CHECK(std::abs(v) <= 1e-15);

    CHECK(error_code([] { recon_delta_gi(test::make_dataset(1, 1, {{1.0}}, {1.0})); }) ==
          Errc::insufficient_data);
}

TEST_CASE("DGI edge cases") {
    const auto dark = test::make_dataset(2, 1, {{0, 0}, {0, 0}}, {1.0, 2.0});
    CHECK(error_code([&] { recon_dgi(dark); }) == Errc::degenerate);

    // T = 1 everywhere, so S_B = S_R.
    const auto scene = ObjectScene(6, 6, std::vector<double>(36, 1.0));
    const auto d = simulate(scene, PatternModel::iid(), DriftProfile::linear(0.3), NoiseModel{}, 200, 4);
    for (double v : as_vector(recon_dgi(d).image())) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("DGI cancels any bucket proportional to the frame total") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        auto d = test::random_dataset(rng, 4, 3, 2 + rng() % 30);
        const double c = 0.1 + static_cast<double>(rng() % 100) / 10.0;
        for (auto& r : d.records) r.bucket = c * frame_sum(r.frame);
        for (double v : as_vector(recon_dgi(d).image())) CHECK(std::abs(v) <= 1e-10);
    }
}

TEST_CASE("CI partitions") {
    const auto flat = test::make_dataset(1, 1, {{1.0}, {2.0}}, {3.0, 3.0});
    CHECK(error_code([&] { recon_ci(flat); }) == Errc::degenerate);

    // Only the last bucket lies above the mean.
    const auto d = test::make_dataset(2, 1, {{0.1, 0.2}, {0.3, 0.4}, {0.9, 0.6}}, {1.0, 1.0, 10.0});
    const auto ci = recon_ci(d);
    CHECK(test::as_vector(ci.positive()) == std::vector<double>{0.9, 0.6});

    // A bucket equal to the mean joins the positive subset.
    const auto tie = test::make_dataset(1, 1, {{1.0}, {2.0}, {4.0}}, {1.0, 2.0, 3.0});
    const auto tci = recon_ci(tie);
    CHECK(only(tci.positive()) == doctest::Approx(3.0));
    CHECK(only(tci.negative()) == doctest::Approx(1.0));
}

TEST_CASE("SGI edge cases") {
    const auto flat = test::make_dataset(2, 2, {{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}}, {5, 5, 5});
    for (auto mode : {SgiMode::both, SgiMode::bucket, SgiMode::reference}) {
        for (const auto& img : recon_sgi(flat, mode).images) {
            for (double v : img.data()) CHECK(v == 0.0);
        }
    }
    CHECK(error_code([&] { recon_sgi(flat, SgiMode::both, 3); }) == Errc::insufficient_data);
    CHECK(error_code([&] { recon_sgi(flat, SgiMode::both, 2, true); }) == Errc::invalid_argument);
    CHECK(error_code([&] { recon_sgi(flat, SgiMode::both, 0); }) == Errc::invalid_argument);

    SgiAccumulator acc(2, 2, SgiMode::both, 2);
    acc.push(flat.records[0]);
    acc.push(flat.records[1]);
    CHECK(acc.pair_count() == 0);
    CHECK(error_code([&] { acc.snapshot(); }) == Errc::insufficient_data);
    acc.push(flat.records[2]);
    CHECK(acc.pair_count() == 1);
}

TEST_CASE("SGI pair count") {
    std::mt19937_64 rng(3);
    const auto d = test::random_dataset(rng, 3, 3, 17);
    for (std::size_t k : {1, 2, 5}) CHECK(recon_sgi(d, SgiMode::both, k).count == 17 - k);
    CHECK(recon_sgi(d, SgiMode::both, 1, true).count == 17);
}

TEST_CASE("batch estimators match the reference oracles") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const auto d = test::random_dataset(rng, 1 + rng() % 5, 1 + rng() % 5, 3 + rng() % 40);
        CHECK(max_scaled_error(as_vector(recon_g2(d).image()), test::oracle::g2(d)) <= 1e-12);
        CHECK(max_scaled_error(as_vector(recon_delta_gi(d).image()), test::oracle::delta_gi(d)) <= 1e-12);
        CHECK(max_scaled_error(as_vector(recon_dgi(d).image()), test::oracle::dgi(d)) <= 1e-12);
        try {
            const auto ci = recon_ci(d);
            const auto want = test::oracle::ci(d);
            CHECK(max_scaled_error(as_vector(ci.positive()), want[0]) <= 1e-12);
            CHECK(max_scaled_error(as_vector(ci.negative()), want[1]) <= 1e-12);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::degenerate);
        }
    }
}

TEST_CASE("mode-1 equals the plus/minus differences of modes 2 and 3") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t k = std::array<std::size_t, 3>{1, 2, 5}[trial % 3];
        const bool loop = k == 1 && trial % 2 == 0;
        const auto d = test::random_dataset(rng, 8, 8, k + 1 + rng() % 40);
        const auto m1 = as_vector(recon_sgi(d, SgiMode::both, k, loop).image());
        const auto m2 = recon_sgi(d, SgiMode::bucket, k, loop);
        const auto m3 = recon_sgi(d, SgiMode::reference, k, loop);
        std::vector<double> b(m1.size()), r(m1.size());
        for (std::size_t i = 0; i < m1.size(); ++i) {
            b[i] = m2.positive().data()[i] - m2.negative().data()[i];
            r[i] = m3.positive().data()[i] - m3.negative().data()[i];
        }
        CHECK(max_scaled_error(b, m1) <= 1e-10);
        CHECK(max_scaled_error(r, m1) <= 1e-10);
    }
}

TEST_CASE("streaming snapshots equal the batch formula on every prefix") {
    std::mt19937_64 rng(99);
    for (int mode = 1; mode <= 3; ++mode) {
        for (std::size_t k : {1, 2, 5}) {
            for (bool loop : {false, true}) {
                if (loop && k != 1) continue;
                const auto d = test::random_dataset(rng, 8, 8, k + 12);
                SgiAccumulator acc(8, 8, static_cast<SgiMode>(mode), k, loop);
                Dataset prefix;
                prefix.header = d.header;
                for (const auto& rec : d.records) {
                    acc.push(rec);
                    prefix.records.push_back(rec);
                    CHECK(acc.pair_count() == (prefix.size() > k ? prefix.size() - k : 0));
                    if (acc.snapshot_pairs() == 0) continue;
                    const auto got = acc.snapshot();
                    const auto want = test::oracle::sgi(prefix, mode, k, loop);
                    REQUIRE(got.size() == want.size());
                    for (std::size_t j = 0; j < got.size(); ++j) {
                        CHECK(max_scaled_error(as_vector(got[j]), want[j]) <= 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("common gain scales images quadratically, CI linearly") {
    std::mt19937_64 rng(41);
    const auto d = test::random_dataset(rng, 5, 5, 60);
    Dataset scaled = d;
    for (auto& r : scaled.records) {
        r.frame = scale_frame(r.frame, 3.0);
        r.bucket *= 3.0;
    }
    auto check_scaled = [](const ReconImage& base, const ReconImage& big, double factor) {
        std::vector<double> expect(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) expect[i] = factor * base.data()[i];
        CHECK(max_scaled_error(as_vector(big), expect) <= 1e-10);
        const auto argmax = [](const ReconImage& img) {
            return std::max_element(img.data().begin(), img.data().end()) - img.data().begin();
        };
        CHECK(argmax(base) == argmax(big));
    };
    check_scaled(recon_g2(d).image(), recon_g2(scaled).image(), 9.0);
    check_scaled(recon_delta_gi(d).image(), recon_delta_gi(scaled).image(), 9.0);
    check_scaled(recon_dgi(d).image(), recon_dgi(scaled).image(), 9.0);
    check_scaled(recon_sgi(d, SgiMode::both).image(), recon_sgi(scaled, SgiMode::both).image(), 9.0);
    const auto ci = recon_ci(d), ci3 = recon_ci(scaled);
    check_scaled(ci.positive(), ci3.positive(), 3.0);
    check_scaled(ci.negative(), ci3.negative(), 3.0);
}

TEST_CASE("positive and negative images on a binary scene") {
    const auto scene = builtin_scene("gi", 24, 24);
    std::vector<double> centered(scene.transmission().begin(), scene.transmission().end());
    const double mean = std::accumulate(centered.begin(), centered.end(), 0.0) / static_cast<double>(centered.size());
    for (double& v : centered) v -= mean;

    const auto d = simulate(scene, PatternModel::iid(), DriftProfile::none(), NoiseModel{}, 3000, 12);
    const auto s2 = recon_sgi(d, SgiMode::bucket);
    const auto s3 = recon_sgi(d, SgiMode::reference);
    const auto ci = recon_ci(d);
    CHECK(pearson(s2.positive(), centered) > 0.0);
    CHECK(pearson(s2.negative(), centered) < 0.0);
    CHECK(pearson(s3.positive(), centered) > 0.0);
    CHECK(pearson(s3.negative(), centered) < 0.0);
    CHECK(pearson(ci.positive(), centered) > 0.0);
    CHECK(pearson(ci.negative(), centered) < 0.0);
}

TEST_CASE("successive deviations suppress linear drift in the frame totals") {
    // Translating speckle keeps the frame total fixed.
    const auto scene = builtin_scene("disk", 32, 32);
    const std::size_t n = 1000, k = 1;
    const auto d = simulate(scene, PatternModel::speckle(2.0, 1, 1.0), DriftProfile::linear(0.3),
                            NoiseModel{}, n, 5);
    const auto diag = sr_diagnostics(d, k);
    std::vector<double> centered = diag.totals;
    const double mean = std::accumulate(centered.begin(), centered.end(), 0.0) / static_cast<double>(n);
    for (double& v : centered) v -= mean;
    CHECK(stddev(diag.deviations) <= (2.0 * k / n) * stddev(centered) * 2.0);
}

TEST_CASE("frame-total diagnostics") {
    const auto diag = sr_diagnostics(test::hand_dataset(), 1);
    CHECK(diag.totals == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(diag.deviations == std::vector<double>{0.5, 1.0});

    const auto flat = test::make_dataset(1, 2, {{1, 1}, {1, 1}, {1, 1}}, {1, 2, 3});
    CHECK(sr_diagnostics(flat, 2).deviations == std::vector<double>{0.0});
    CHECK(error_code([&] { sr_diagnostics(flat, 3); }) == Errc::insufficient_data);

    const auto result = recon_sgi(test::hand_dataset(), SgiMode::both);
    CHECK(result.diagnostics.deviations == std::vector<double>{0.5, 1.0});
}

TEST_CASE("reconstruct over a record stream") {
    std::mt19937_64 rng(6);
    const auto d = test::random_dataset(rng, 4, 4, 30);

    SUBCASE("prefix limit") {
        DatasetSource src(d);
        PrefixSource first10(src, 10);
        Dataset head = d;
        head.records.erase(head.records.begin() + 10, head.records.end());
        head.header.n = 10;
        const auto got = reconstruct(first10, {Method::sgi1});
        CHECK(got.count == 9);
        CHECK(max_scaled_error(as_vector(got.image()), test::oracle::sgi(head, 1, 1, false)[0]) <= 1e-12);
    }
    SUBCASE("progressive snapshots") {
        DatasetSource src(d);
        std::vector<std::size_t> seen;
        Progress progress{7, [&](std::size_t n, const std::vector<ReconImage>& imgs) {
                              seen.push_back(n);
                              CHECK(imgs.size() == 2);
                          }};
        reconstruct(src, {Method::sgi3}, progress);
        CHECK(seen == std::vector<std::size_t>{7, 14, 21, 28});
    }
    SUBCASE("option validation") {
        DatasetSource src(d);
        CHECK(error_code([&] { reconstruct(src, {Method::g2, 2}); }) == Errc::invalid_argument);
        CHECK(error_code([&] { reconstruct(src, {Method::sgi1, 3, true}); }) == Errc::invalid_argument);
        CHECK(error_code([&] { reconstruct(src, {Method::sgi2, 30}); }) == Errc::insufficient_data);
    }
    SUBCASE("method names") {
        for (auto m : {Method::g2, Method::delta_gi, Method::dgi, Method::ci, Method::sgi1, Method::sgi2,
                       Method::sgi3}) {
            CHECK(parse_method(to_string(m)) == m);
        }
        CHECK(parse_method("delta-gi") == Method::delta_gi);
        CHECK_THROWS_AS(parse_method("tvgi"), Error);
    }
}
