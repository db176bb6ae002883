#include "cptrank/error.hpp"
#include "cptrank/network.hpp"
#include "cptrank/rank_analysis.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace cptrank {
namespace {

const std::filesystem::path kData = CPTRANK_TEST_DATA;

/// Binary-child noisy-or with no leak, states ordered (on, off).
Tensor noisy_or_cpt(const std::vector<double>& inhibitors) {
    Dims dims(inhibitors.size(), 2);
    dims.push_back(2);
    std::vector<double> data;
    const std::size_t configs = std::size_t{1} << inhibitors.size();
    for (std::size_t c = 0; c < configs; ++c) {
        double all_inhibited = 1.0;
        for (std::size_t i = 0; i < inhibitors.size(); ++i) {
            const bool on = ((c >> (inhibitors.size() - 1 - i)) & 1U) == 0;  // first parent slowest
            if (on) all_inhibited *= inhibitors[i];
        }
        data.push_back(1.0 - all_inhibited);
        data.push_back(all_inhibited);
    }
    return Tensor::from_flat(dims, data);
}

/// 1⊗...⊗1⊗e_on + (a_1⊗...⊗a_m)⊗(e_off − e_on) with a_i = (q_i, 1).
Tensor noisy_or_two_terms(const std::vector<double>& inhibitors) {
    std::vector<std::vector<double>> ones(inhibitors.size(), {1.0, 1.0});
    ones.push_back({1.0, 0.0});
    std::vector<std::vector<double>> inhibit;
    for (double q : inhibitors) inhibit.push_back({q, 1.0});
    inhibit.push_back({-1.0, 1.0});
    const Tensor a = rank_one(ones);
    const Tensor b = rank_one(inhibit);
    std::vector<double> sum(a.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a.data()[i] + b.data()[i];
    return Tensor::from_flat(a.dims(), sum);
}

Tensor independent_cpt() {
    // P(X | parents) = P(X) for every parent configuration.
    const std::vector<std::vector<double>> v = {{1, 1}, {1, 1, 1}, {1, 1}, {0.1, 0.6, 0.3}};
    return rank_one(v);
}

AnalysisConfig quick_config(std::size_t r_max, double epsilon = 1e-3) {
    AnalysisConfig c;
    c.r_max = r_max;
    c.epsilon = epsilon;
    return c;
}

// ===========================================================================
// Noisy-or oracle
// ===========================================================================

TEST(NoisyOrTest, ExplicitTwoTermFormReproducesTable) {
    const std::vector<double> q = {0.1, 0.2, 0.3};
    EXPECT_LT(max_abs_diff(noisy_or_cpt(q), noisy_or_two_terms(q)), 1e-12);

    const Network net = load_network(kData / "noisy_or.net");
    EXPECT_LT(max_abs_diff(cpt_to_tensor(net.node("Y"), net), noisy_or_two_terms(q)), 1e-12);
}

TEST(NoisyOrTest, ProfileReachesZeroAtRankTwo) {
    const Tensor t = noisy_or_cpt({0.1, 0.2, 0.3});
    const RankProfile p = rank_profile(t, quick_config(3));
    ASSERT_EQ(p.entries.size(), 3u);
    EXPECT_GT(p.entries[0].max_error, 1e-3);
    EXPECT_LT(p.entries[1].max_error, 1e-6);
}

TEST(NoisyOrTest, MinimalRankIsTwo) {
    const Tensor t = noisy_or_cpt({0.1, 0.2, 0.3});
    EXPECT_EQ(minimal_rank(t, quick_config(5)), 2u);
    EXPECT_EQ(minimal_rank(t, quick_config(5, 1e-6)), 2u);
}

// ===========================================================================
// Profiles
// ===========================================================================

TEST(RankProfileTest, IndependentChildIsRankOne) {
    const RankProfile p = rank_profile(independent_cpt(), quick_config(2));
    EXPECT_LT(p.entries[0].max_error, 1e-8);
    EXPECT_EQ(minimal_rank(independent_cpt(), quick_config(4)), 1u);
}

TEST(RankProfileTest, EntriesCoverConsecutiveRanks) {
    const Tensor t = random_cpt_like({2, 3, 2}, 4);
    const RankProfile p = rank_profile(t, quick_config(4), {SourceKind::random_control, "", "", 4});
    ASSERT_EQ(p.entries.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(p.entries[i].rank, i + 1);
        EXPECT_GE(p.entries[i].max_error, 0.0);
    }
    EXPECT_EQ(p.dims, t.dims());
    EXPECT_EQ(p.source.kind, SourceKind::random_control);
}

TEST(RankProfileTest, EarlyExitStopsAtFirstQualifyingRank) {
    const RankProfile p = rank_profile(noisy_or_cpt({0.1, 0.2, 0.3}), quick_config(10), {}, true);
    EXPECT_EQ(p.entries.size(), 2u);
}

TEST(RankProfileTest, DeterministicUnderFixedConfig) {
    const Tensor t = random_cpt_like({3, 2, 3}, 8);
    EXPECT_EQ(rank_profile(t, quick_config(4)), rank_profile(t, quick_config(4)));
}

TEST(RankProfileTest, RejectsOrderOne) {
    EXPECT_THROW((void)rank_profile(Tensor::from_flat({2}, {0.5, 0.5}), quick_config(2)), StructuralError);
}

TEST(RankProfileTest, WarmStartedSweepIsNonIncreasing) {
    AnalysisConfig c = quick_config(8);
    c.warm_start = true;
    c.solver.n_random_starts = 3;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const RankProfile p = rank_profile(random_cpt_like({3, 3, 4, 3}, seed), c);
        for (std::size_t i = 1; i < p.entries.size(); ++i) {
            EXPECT_LE(p.entries[i].max_error, p.entries[i - 1].max_error + 1e-9);
        }
    }
}

TEST(RankProfileTest, TrivialUnfoldingBoundIsExact) {
    // One rank-one term per column of the widest unfolding reproduces any table.
    for (const Dims& dims : {Dims{2, 2}, Dims{2, 3, 2}, Dims{2, 2, 3, 2}}) {
        const Tensor t = random_cpt_like(dims, 77);
        const std::size_t bound = element_count(dims) / *std::max_element(dims.begin(), dims.end());
        const RankProfile p = rank_profile(t, quick_config(bound));
        EXPECT_LT(p.entries.back().max_error, 1e-8) << format_dims(dims);
    }
}

TEST(RankProfileTest, HailfinderBoundariesDropsBelowEpsilonByRankTen) {
    const Network net = load_network(kData / "hailfinder.net");
    const Tensor t = cpt_to_tensor(net.node("Boundaries"), net);
    const RankProfile p = rank_profile(t, quick_config(10), {SourceKind::network_cpt, "hailfinder", "Boundaries"}, true);
    const auto r = minimal_rank(p, 1e-3);
    ASSERT_TRUE(r.has_value());
    EXPECT_LE(*r, 10u);
    EXPECT_LT(p.entries.back().max_error * 10.0, p.entries.front().max_error);
}

// ===========================================================================
// Minimal rank ordering
// ===========================================================================

TEST(MinimalRankTest, MonotoneInEpsilonOverSharedProfile) {
    const RankProfile p = rank_profile(random_cpt_like({2, 3, 3}, 5), quick_config(6));
    const std::vector<double> eps = {1e-12, 1e-8, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3, 1.0};
    for (std::size_t i = 0; i < eps.size(); ++i) {
        for (std::size_t j = i; j < eps.size(); ++j) {
            EXPECT_FALSE(rank_less(minimal_rank(p, eps[i]), minimal_rank(p, eps[j])));
        }
    }
}

TEST(MinimalRankTest, SentinelOrdersAboveIntegers) {
    EXPECT_TRUE(rank_less(3u, std::nullopt));
    EXPECT_FALSE(rank_less(std::nullopt, 3u));
    EXPECT_FALSE(rank_less(std::nullopt, std::nullopt));
    EXPECT_TRUE(rank_less(1u, 2u));
}

TEST(MinimalRankTest, ExceedsRMaxGivesSentinel) {
    EXPECT_EQ(minimal_rank(random_cpt_like({3, 3, 4, 3}, 1), quick_config(2)), std::nullopt);
}

// ===========================================================================
// Parameter counts
// ===========================================================================

TEST(ParamCountTest, GeneralCounts) {
    EXPECT_EQ(general_param_count(Dims(10, 2)), 512u);
    EXPECT_EQ(general_param_count({3}), 2u);
    EXPECT_EQ(general_param_count({3, 3, 4, 3}), 72u);
    EXPECT_THROW((void)general_param_count({}), StructuralError);
}

TEST(ParamCountTest, BinaryCpCounts) {
    EXPECT_EQ(cp_param_count(10, 2), 12u);
    for (std::size_t k = 1; k < 12; ++k) EXPECT_EQ(cp_param_count(k, 1), 1u);
    EXPECT_LT(cp_param_count(10, 2), general_param_count(Dims(10, 2)));
    EXPECT_THROW((void)cp_param_count(0, 1), StructuralError);
}

TEST(ParamCountTest, GeneralizedCpCounts) {
    for (std::size_t k = 1; k <= 10; ++k) {
        for (std::size_t r = 1; r <= 5; ++r) EXPECT_EQ(cp_param_count_general(Dims(k, 2), r), cp_param_count(k, r));
    }
    EXPECT_EQ(cp_param_count_general({3, 3, 4, 3}, 2), 11u);
    EXPECT_EQ(cp_param_count_general({3, 5, 7}, 1), 1u);
    EXPECT_THROW((void)cp_param_count_general({1, 2}, 2), StructuralError);
}

// ===========================================================================
// Random controls and squeezing
// ===========================================================================

TEST(RandomControlTest, DeterministicAndNormalised) {
    const Tensor a = random_cpt_like({3, 3, 4, 3}, 42);
    EXPECT_EQ(a, random_cpt_like({3, 3, 4, 3}, 42));
    EXPECT_NE(a, random_cpt_like({3, 3, 4, 3}, 43));
    for (std::size_t c = 0; c < a.size(); c += 3) {
        EXPECT_NEAR(a.data()[c] + a.data()[c + 1] + a.data()[c + 2], 1.0, 1e-12);
    }
}

TEST(RandomControlTest, RawModeKeepsUniformEntries) {
    const Tensor raw = random_cpt_like({2, 5}, 9, ControlMode::raw);
    for (double x : raw.data()) {
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
    EXPECT_EQ(control_mode_from_string("raw"), ControlMode::raw);
    EXPECT_THROW((void)control_mode_from_string("uniform"), StructuralError);
}

TEST(SqueezeTest, DropsSingletonParentsOnly) {
    const Tensor t = random_cpt_like({1, 3, 1, 2}, 1);
    const SqueezedTensor s = squeeze_singleton_parents(t);
    EXPECT_EQ(s.tensor.dims(), (Dims{3, 2}));
    EXPECT_EQ(s.dropped_modes, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(std::vector<double>(s.tensor.data().begin(), s.tensor.data().end()),
              std::vector<double>(t.data().begin(), t.data().end()));

    const SqueezedTensor keep = squeeze_singleton_parents(random_cpt_like({1, 1, 4}, 1));
    EXPECT_EQ(keep.tensor.dims(), (Dims{1, 4}));
    EXPECT_EQ(keep.dropped_modes, (std::vector<std::size_t>{1}));
}

}  // namespace
}  // namespace cptrank
