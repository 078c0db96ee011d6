#include "test_support.hpp"

#include <gsrcv/sampling.hpp>

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace gsrcv;
using namespace gsrcv::testing;

namespace {

// Checks every invariant a fold plan promises.
void expect_valid_plan(const FoldPlan& plan, std::size_t k, std::size_t repeats) {
    ASSERT_EQ(plan.folds().size(), k * repeats);
    EXPECT_TRUE(plan.balanced());
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        std::vector<std::size_t> all;
        for (std::size_t f = 0; f < k; ++f) {
            const Fold& fold = plan.folds()[rep * k + f];
            EXPECT_EQ(fold.repeat, rep);
            EXPECT_EQ(fold.index, f);
            EXPECT_FALSE(fold.train.empty());
            EXPECT_FALSE(fold.holdout.empty());
            EXPECT_EQ(fold.train.size() + fold.holdout.size(), plan.known().size());
            for (const auto v : fold.holdout) {
                EXPECT_FALSE(fold.train.contains(v));
            }
            all.insert(all.end(), fold.holdout.begin(), fold.holdout.end());
        }
        std::sort(all.begin(), all.end());
        EXPECT_EQ(all, plan.known().ids());
    }
}

} // namespace

TEST(SelectKnownSet, AllVertices) {
    const auto basis = spectral_decompose(random_connected_graph(30, 0.1, 1));
    for (const auto strategy : {SamplingStrategy::random, SamplingStrategy::greedy_dopt}) {
        SamplingOptions opts;
        opts.strategy = strategy;
        EXPECT_EQ(select_known_set(basis, 30, opts).vertices, VertexSet::all(30));
    }
    EXPECT_THROW(select_known_set(basis, 31), Error);
}

TEST(SelectKnownSet, RandomIsSeeded) {
    const auto basis = spectral_decompose(random_connected_graph(60, 0.1, 2));
    SamplingOptions opts;
    opts.seed = 5;
    const auto a = select_known_set(basis, 20, opts).vertices;
    EXPECT_EQ(a.size(), 20u);
    EXPECT_EQ(a, select_known_set(basis, 20, opts).vertices);
    opts.seed = 6;
    EXPECT_FALSE(a == select_known_set(basis, 20, opts).vertices);
}

TEST(SelectKnownSet, GreedyDoptIsDeterministicAndWarns) {
    const auto basis = spectral_decompose(random_connected_graph(40, 0.1, 3));
    SamplingOptions opts;
    opts.strategy = SamplingStrategy::greedy_dopt;
    opts.reference_bandwidth = 6;
    const auto a = select_known_set(basis, 12, opts);
    EXPECT_EQ(a.vertices, select_known_set(basis, 12, opts).vertices);
    EXPECT_TRUE(a.warnings.empty());
    EXPECT_EQ(a.reference_bandwidth, 6u);
    EXPECT_GT(dopt_log_det(basis, a.vertices, 6, 1e-8), -5.0);

    opts.reference_bandwidth = 12;
    EXPECT_EQ(select_known_set(basis, 12, opts).warnings.size(), 1u);
}

TEST(SelectKnownSet, GreedyAgainstExhaustiveSearch) {
    // 8-node path, r = 2, m = 4: greedy should be close to the best 4-subset
    const auto basis = spectral_decompose(path_graph(8));
    SamplingOptions opts;
    opts.strategy = SamplingStrategy::greedy_dopt;
    opts.reference_bandwidth = 2;
    const VertexSet greedy = select_known_set(basis, 4, opts).vertices;
    const double greedy_val = dopt_log_det(basis, greedy, 2, 1e-8);

    double best = -1e300;
    for (unsigned mask = 0; mask < 256; ++mask) {
        if (__builtin_popcount(mask) != 4) {
            continue;
        }
        std::vector<std::size_t> ids;
        for (std::size_t v = 0; v < 8; ++v) {
            if (mask & (1u << v)) {
                ids.push_back(v);
            }
        }
        best = std::max(best, dopt_log_det(basis, VertexSet(ids), 2, 1e-8));
    }
    EXPECT_LE(greedy_val, best + 1e-12);
    EXPECT_GE(greedy_val, best - 1e-9);
}

TEST(MakeFolds, TenVerticesTenFolds) {
    const FoldPlan plan = make_folds(VertexSet::all(10), 10, 1, 3);
    expect_valid_plan(plan, 10, 1);
    for (const auto& f : plan.folds()) {
        EXPECT_EQ(f.holdout.size(), 1u);
        EXPECT_EQ(f.train.size(), 9u);
    }
}

TEST(MakeFolds, DefaultScale) {
    Rng rng(1);
    const VertexSet s = random_subset(1000, 200, rng);
    const FoldPlan plan = make_folds(s, 10, 50, 42);
    expect_valid_plan(plan, 10, 50);
    for (const auto& f : plan.folds()) {
        EXPECT_EQ(f.holdout.size(), 20u);
    }
    EXPECT_EQ(plan.min_train_size(), 180u);
    EXPECT_DOUBLE_EQ(plan.mean_holdout_size(), 20.0);
}

TEST(MakeFolds, UnevenSizes) {
    const FoldPlan plan = make_folds(VertexSet::all(11), 10, 1, 1);
    expect_valid_plan(plan, 10, 1);
    std::multiset<std::size_t> sizes;
    for (const auto& f : plan.folds()) {
        sizes.insert(f.holdout.size());
    }
    EXPECT_EQ(sizes.count(1), 9u);
    EXPECT_EQ(sizes.count(2), 1u);
}

TEST(MakeFolds, RandomizedInvariants) {
    Rng rng(8);
    for (int t = 0; t < 30; ++t) {
        const auto n = static_cast<std::size_t>(20 + rng.below(80));
        const auto m = static_cast<std::size_t>(5 + rng.below(n - 5));
        const auto k = static_cast<std::size_t>(2 + rng.below(std::min<std::size_t>(m, 12) - 1));
        const auto repeats = static_cast<std::size_t>(1 + rng.below(5));
        expect_valid_plan(make_folds(random_subset(n, m, rng), k, repeats, rng.next()), k, repeats);
    }
}

TEST(MakeFolds, RepeatsUseDifferentPermutations) {
    const FoldPlan plan = make_folds(VertexSet::all(50), 5, 3, 7);
    EXPECT_FALSE(plan.folds()[0].holdout == plan.folds()[5].holdout);
    EXPECT_FALSE(plan.folds()[5].holdout == plan.folds()[10].holdout);
    const FoldPlan again = make_folds(VertexSet::all(50), 5, 3, 7);
    for (std::size_t i = 0; i < plan.folds().size(); ++i) {
        EXPECT_EQ(plan.folds()[i].holdout, again.folds()[i].holdout);
    }
}

TEST(MakeFolds, Errors) {
    EXPECT_THROW(make_folds(VertexSet::all(5), 6, 1, 0), Error);
    EXPECT_THROW(make_folds(VertexSet::all(5), 1, 1, 0), Error);
    EXPECT_THROW(make_folds(VertexSet::all(5), 2, 0, 0), Error);
}

TEST(FoldPlan, FromHoldoutsValidates) {
    const VertexSet s({1, 3, 5, 7});
    EXPECT_NO_THROW(FoldPlan::from_holdouts(s, {{VertexSet({1, 3}), VertexSet({5, 7})}}));
    // overlap
    EXPECT_THROW(FoldPlan::from_holdouts(s, {{VertexSet({1, 3}), VertexSet({3, 5, 7})}}), Error);
    // not covering
    EXPECT_THROW(FoldPlan::from_holdouts(s, {{VertexSet({1}), VertexSet({5, 7})}}), Error);
    // outside S
    EXPECT_THROW(FoldPlan::from_holdouts(s, {{VertexSet({1, 2}), VertexSet({3, 5, 7})}}), Error);
    // empty training set
    EXPECT_THROW(FoldPlan::from_holdouts(s, {{VertexSet({1, 3, 5, 7})}}), Error);
}

TEST(FoldPlan, CsvListsEveryRole) {
    const FoldPlan plan = make_folds(VertexSet({2, 4, 6}), 3, 2, 1);
    std::ostringstream out;
    write_fold_plan_csv(out, plan);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "repeat,fold,vertex,role");
    std::size_t rows = 0;
    std::size_t holdouts = 0;
    while (std::getline(in, line)) {
        ++rows;
        holdouts += line.ends_with(",holdout") ? 1 : 0;
    }
    EXPECT_EQ(rows, 2u * 3u * 3u);
    EXPECT_EQ(holdouts, 6u);
}
