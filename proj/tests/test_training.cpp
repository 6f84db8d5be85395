// SPDX-License-Identifier: Apache-2.0
//
// nfmimo: near-field modular-array MIMO energy-efficiency toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include "nfmimo/checkpoint.hpp"
#include "nfmimo/rng.hpp"
#include "nfmimo/training.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstring>

using namespace nfmimo;
using Catch::Approx;

namespace {

const HardwareParams kHw{};
const DistortionParams kDist{-0.05, 3.98e-12};

Sample sample_at(double range_m, double azimuth_rad)
{
    UeGeometry g;
    g.range_m = range_m;
    g.azimuth_rad = azimuth_rad;
    return make_sample(Scenario{}, g, 0.6);
}

HeadOutputs random_heads(std::mt19937_64 &rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    RVector raw(11);
    for (Eigen::Index i = 0; i < 11; ++i)
        raw(i) = n(rng);
    return HeadOutputs::from_raw(raw, 4);
}

RVector one_hot(int i)
{
    RVector v = RVector::Zero(3);
    v(i) = 1.0;
    return v;
}

// EE of config (cx, cy) evaluated on the full K x K covariance with Eq-style P_tot by hand.
double ee_oracle(const Sample &s, int cx, int cy, const RVector &p, const DistortionParams &d)
{
    const ModularConfig cfg = modular_mask(cx, cy);
    const ChannelMatrix sub = subselect(s.full_channel, cfg);
    const SvdResult svd = compact_svd(sub);
    const double se = spectral_efficiency(sub, TransmitCovariance::from_precoder(svd.right, p), d);
    const double p_tot = p.sum() / 0.4 + 0.1 + 0.03 * cfg.active_count() + 1e-3 * se;
    return 1e8 * se / p_tot;
}

struct SmallRun
{
    Dataset data;
    FeatureNormalizer norm;
    TrainConfig cfg;
};

SmallRun small_run(std::size_t n_train, int epochs)
{
    DatasetSpec spec;
    spec.n_train = n_train;
    spec.n_val = 40;
    SmallRun run;
    run.data = generate_dataset(Scenario{}, spec);
    run.norm = FeatureNormalizer::fit(run.data.train);
    run.cfg.epochs = epochs;
    return run;
}

bool bitwise_equal(const NetworkParams &a, const NetworkParams &b)
{
    for (std::size_t i = 0; i < a.num_parameters(); ++i)
    {
        const double x = a.at(i);
        const double y = b.at(i);
        if (std::memcmp(&x, &y, sizeof(double)) != 0)
            return false;
    }
    return a.num_parameters() == b.num_parameters();
}

} // namespace

TEST_CASE("one-hot configuration probabilities select a single EE", "[training][loss]")
{
    const Sample s = sample_at(70.0, 0.5);
    std::mt19937_64 rng(61);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
        {
            HeadOutputs h = random_heads(rng);
            h.cx_probs = one_hot(a);
            h.cy_probs = one_hot(b);
            const SampleLoss sl = sample_loss(h, s, kHw, kDist, 0.25);
            REQUIRE(sl.finite);
            const double ee = ee_oracle(s, a + 1, b + 1, power_from_heads(h, 0.25), kDist);
            CHECK(sl.loss == Approx(-s.weight * ee).epsilon(1e-9));
            CHECK(sl.expected_ee == Approx(ee).epsilon(1e-9));
            CHECK(sl.ee[modular_mask(a + 1, b + 1).index()] == Approx(ee).epsilon(1e-9));
        }
}

TEST_CASE("per-config EE matches the oracle for every config", "[training][loss]")
{
    const Sample s = sample_at(25.0, 1.1);
    RVector p(4);
    p << 0.05, 0.02, 0.01, 0.001;
    for (const auto &cfg : all_modular_configs())
        CHECK(config_energy_efficiency(s, cfg.index(), p, kHw, kDist) ==
              Approx(ee_oracle(s, cfg.c_x, cfg.c_y, p, kDist)).epsilon(1e-9));
}

TEST_CASE("water-filling maximizes EE at fixed total power without distortion", "[training][loss]")
{
    const DistortionParams ideal{0.0, 3.98e-12};
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double range : {15.0, 90.0, 180.0})
    {
        const Sample s = sample_at(range, 0.8);
        for (int c : {0, 4, 8})
        {
            const double total = 0.1;
            const RVector wf = water_filling(s.active_svds[c].singular_values, ideal.noise_power_w, total);
            const double best = config_energy_efficiency(s, c, wf, kHw, ideal);
            for (int trial = 0; trial < 30; ++trial)
            {
                RVector p(4);
                for (int i = 0; i < 4; ++i)
                    p(i) = u(rng);
                p *= total / p.sum();
                CHECK(config_energy_efficiency(s, c, p, kHw, ideal) <= best * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("config-logit gradient is exact", "[training][loss]")
{
    const Sample s = sample_at(45.0, 0.3);
    std::mt19937_64 rng(63);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial)
    {
        RVector raw(11);
        for (int i = 0; i < 11; ++i)
            raw(i) = n(rng);
        const SampleLoss base = sample_loss(HeadOutputs::from_raw(raw, 4), s, kHw, kDist, 0.25);

        // Direct bilinear form: dL/dPx[a] = -w sum_b Py[b] EE(a, b).
        const HeadOutputs h = HeadOutputs::from_raw(raw, 4);
        for (int a = 0; a < 3; ++a)
        {
            double expected = 0.0;
            for (int b = 0; b < 3; ++b)
                expected += -s.weight * h.cy_probs(b) * base.ee[a * 3 + b];
            // Bilinear, so a finite difference in Px is exact up to rounding.
            const double hstep = 1e-3;
            double lp = 0.0, lm = 0.0;
            for (int c = 0; c < 9; ++c)
            {
                const double px = h.cx_probs(c / 3) + (c / 3 == a ? hstep : 0.0);
                const double pm = h.cx_probs(c / 3) - (c / 3 == a ? hstep : 0.0);
                lp += -s.weight * px * h.cy_probs(c % 3) * base.ee[c];
                lm += -s.weight * pm * h.cy_probs(c % 3) * base.ee[c];
            }
            CHECK(test::rel_diff((lp - lm) / (2 * hstep), expected) < 1e-6);
        }

        // Through the softmax: compare the returned logit gradient with central differences.
        for (int j = 5; j < 11; ++j)
        {
            RVector plus = raw, minus = raw;
            const double hstep = 1e-5;
            plus(j) += hstep;
            minus(j) -= hstep;
            const double fd = (sample_loss(HeadOutputs::from_raw(plus, 4), s, kHw, kDist, 0.25).loss -
                               sample_loss(HeadOutputs::from_raw(minus, 4), s, kHw, kDist, 0.25).loss) /
                              (2 * hstep);
            CHECK(test::rel_diff(base.head_grad(j), fd) < 1e-6);
        }
    }
}

TEST_CASE("expected EE lies between the best and worst config", "[training][loss]")
{
    std::mt19937_64 rng(64);
    for (double range : {12.0, 60.0, 199.0})
    {
        const Sample s = sample_at(range, 1.0);
        for (int trial = 0; trial < 10; ++trial)
        {
            const SampleLoss sl = sample_loss(random_heads(rng), s, kHw, kDist, 0.25);
            const auto [lo, hi] = std::minmax_element(sl.ee.begin(), sl.ee.end());
            CHECK(sl.expected_ee >= *lo * (1 - 1e-12));
            CHECK(sl.expected_ee <= *hi * (1 + 1e-12));
            CHECK(*lo >= 0.0);
            CHECK(sl.loss == Approx(-s.weight * sl.expected_ee).epsilon(1e-15));
        }
    }
}

TEST_CASE("cosine schedule", "[training]")
{
    CHECK(std::abs(cosine_lr(0, 790, 1e-3, 1e-5) - 1e-3) <= 1e-12);
    CHECK(std::abs(cosine_lr(790, 790, 1e-3, 1e-5) - 1e-5) <= 1e-12);
    CHECK(cosine_lr(395, 790, 1e-3, 1e-5) == Approx(0.5 * (1e-3 + 1e-5)).epsilon(1e-12));
    double previous = 1.0;
    for (std::size_t t = 0; t <= 100; ++t)
    {
        const double lr = cosine_lr(t, 100, 1e-3, 1e-5);
        CHECK(lr <= previous);
        previous = lr;
    }
}

TEST_CASE("AdamW", "[training][optimizer]")
{
    NetworkShape shape;
    shape.input = 5;
    shape.trunk = {4};
    NetworkParams p = init_network(shape, 65);
    const NetworkParams before = p;
    AdamW opt(p, 0.9, 0.999, 1e-8, 2e-4);
    opt.step(p, p.zeros_like(), 1e-3);
    CHECK(opt.steps_taken() == 1);
    for (std::size_t i = 0; i < p.num_parameters(); ++i)
    {
        const double expected = before.at(i) * (1.0 - 1e-3 * 2e-4);
        CHECK(std::memcmp(&expected, &p.at(i), sizeof(double)) == 0);
    }

    // First step with a gradient moves each weight by about lr against its sign.
    NetworkParams q = before;
    NetworkParams g = q.zeros_like();
    for (std::size_t i = 0; i < g.num_parameters(); ++i)
        g.at(i) = (i % 2 ? 1.0 : -1.0) * (0.5 + static_cast<double>(i));
    AdamW opt2(q, 0.9, 0.999, 1e-8, 0.0);
    opt2.step(q, g, 1e-3);
    for (std::size_t i = 0; i < q.num_parameters(); ++i)
        CHECK(q.at(i) - before.at(i) == Approx(-1e-3 * (g.at(i) > 0 ? 1.0 : -1.0)).epsilon(1e-6));
}

TEST_CASE("train configuration and bins", "[training]")
{
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lr_min = 2e-3;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = TrainConfig{};
    cfg.epochs = -1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);

    const DistanceBins bins;
    CHECK(bins.index_of(10.0) == 0);
    CHECK(bins.index_of(28.9) == 0);
    CHECK(bins.index_of(29.0) == 1);
    CHECK(bins.index_of(200.0) == 9);
    CHECK(bins.index_of(9.99) == -1);
    CHECK(bins.index_of(200.01) == -1);
    CHECK(bins.lower(3) == Approx(67.0));
    CHECK(bins.upper(9) == Approx(200.0));
}

TEST_CASE("zero epochs returns the initial parameters", "[training]")
{
    const SmallRun run = small_run(8, 0);
    const NetworkParams init = init_network(NetworkShape{}, 66);
    const TrainResult r = train(init, run.data.train, run.data.val, run.norm, run.cfg, kHw, kDist);
    CHECK(bitwise_equal(r.params, init));
    CHECK(r.history.epochs.empty());
}

TEST_CASE("training lowers the loss and is reproducible", "[training][slow]")
{
    SmallRun run = small_run(256, 2);
    const NetworkParams init = init_network(NetworkShape{}, derive_seed(run.cfg.seed, {0x1417}));
    const TrainResult a = train(init, run.data.train, run.data.val, run.norm, run.cfg, kHw, kDist);
    REQUIRE(a.history.epochs.size() == 2);
    CHECK(a.history.epochs[0].train_loss < a.history.initial_batch_loss);
    CHECK(a.history.epochs[0].step == 4);
    CHECK(a.history.epochs[1].step == 8);
    CHECK(a.history.epochs[1].lr == Approx(cosine_lr(7, 8, 1e-3, 1e-5)).epsilon(1e-15));
    CHECK(a.history.epochs[1].val_bin_ee.size() == 10);
    CHECK(a.history.epochs[0].skipped == 0);

    const TrainResult b = train(init, run.data.train, run.data.val, run.norm, run.cfg, kHw, kDist);
    CHECK(bitwise_equal(a.params, b.params));
    Checkpoint ca{a.params, run.norm, run.cfg.seed, 0.25};
    Checkpoint cb{b.params, run.norm, run.cfg.seed, 0.25};
    CHECK(checkpoint_to_string(ca) == checkpoint_to_string(cb));

    run.cfg.threads = 3;
    const TrainResult c = train(init, run.data.train, run.data.val, run.norm, run.cfg, kHw, kDist);
    CHECK(bitwise_equal(a.params, c.params));
}

TEST_CASE("non-finite samples are skipped and a fully bad batch aborts", "[training]")
{
    const SmallRun run = small_run(4, 1);
    std::vector<Sample> broken = run.data.train;
    for (auto &s : broken)
        for (auto &svd : s.active_svds)
            svd.singular_values(0) = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg = run.cfg;
    cfg.batch_size = 2;

    const NetworkParams init = init_network(NetworkShape{}, 67);
    CHECK_THROWS_AS(train(init, broken, {}, run.norm, cfg, kHw, kDist), TrainingDiverged);

    std::vector<Sample> mixed = run.data.train;
    mixed[1] = broken[1];
    const TrainResult r = train(init, mixed, {}, run.norm, cfg, kHw, kDist);
    REQUIRE(r.history.epochs.size() == 1);
    CHECK(r.history.epochs[0].skipped == 1);
    CHECK(std::isfinite(r.history.epochs[0].train_loss));
}

TEST_CASE("validation metrics", "[training]")
{
    const SmallRun run = small_run(4, 1);
    const NetworkParams p = init_network(NetworkShape{}, 68);
    DistanceBins narrow{10.0, 200.0, 10};
    const ValidationMetrics vm = validate_policy(p, run.norm, run.data.val, kHw, kDist, 0.25, narrow);
    double weighted = 0.0, mean = 0.0;
    for (const auto &s : run.data.val)
    {
        const PolicyOutcome o = apply_policy(p, run.norm, s, kHw, kDist, 0.25);
        weighted += s.weight * o.record.ee_bits_per_joule / run.data.val.size();
        mean += o.record.ee_bits_per_joule / run.data.val.size();
        CHECK(o.record.k_active == o.config.active_count());
        CHECK(o.power_w.sum() == Approx(0.25 * o.scale).epsilon(1e-14));
    }
    CHECK(vm.weighted_ee == Approx(weighted).epsilon(1e-12));
    CHECK(vm.mean_ee == Approx(mean).epsilon(1e-12));

    // Bins outside the sampled range stay empty.
    DistanceBins wide{10.0, 400.0, 4};
    const ValidationMetrics wv = validate_policy(p, run.norm, run.data.val, kHw, kDist, 0.25, wide);
    CHECK(std::isnan(wv.bin_ee[3]));
    CHECK(std::isfinite(wv.bin_ee[0]));
}

TEST_CASE("gradient checks", "[training][gradient]")
{
    // A trunk-free network is linear, so the surrogate loss is exactly quadratic.
    NetworkShape linear;
    linear.input = 10;
    linear.trunk = {};
    std::mt19937_64 rng(69);
    std::normal_distribution<double> n(0.0, 1.0);
    RVector x(10), target(11);
    for (int i = 0; i < 10; ++i)
        x(i) = n(rng);
    for (int i = 0; i < 11; ++i)
        target(i) = n(rng);
    const GradientCheckReport lin = mlp_gradient_check(init_network(linear, 70), x, target, 200, 1);
    // Four heads on 10 inputs: 11 x 10 weights plus 11 biases.
    CHECK(lin.n_checked == 121);
    CHECK(lin.max_rel_error < 1e-8);

    NetworkShape reduced;
    reduced.trunk = {16, 16};
    const Sample s = sample_at(40.0, 0.6);
    const SmallRun run = small_run(16, 1);
    const GradientCheckReport full = gradient_check(init_network(reduced, 71), run.norm.apply(s.features), s, kHw,
                                                    {-0.1, 3.98e-12}, 0.25, 120, 2);
    CHECK(full.n_checked == 120);
    CHECK(full.max_rel_error < 1e-3);
    REQUIRE(full.per_layer_max.size() == 6);
    for (double e : full.per_layer_max)
        CHECK(e < 1e-3);
}
