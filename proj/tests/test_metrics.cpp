#include <doctest.h>

#include <cmath>
#include <random>

#include "prefeval/corpus.hpp"
#include "prefeval/errors.hpp"
#include "prefeval/judge.hpp"
#include "prefeval/metrics.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

using namespace prefeval;
using testsupport::make_verdict;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, bool with_ties) {
    std::vector<double> v(n);
    if (with_ties) {
        std::uniform_int_distribution<int> dist(1, 8);
        for (double& x : v) x = dist(rng);
    } else {
        std::uniform_real_distribution<double> dist(-10.0, 10.0);
        for (double& x : v) x = dist(rng);
    }
    return v;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("pearson identity and antisymmetry") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> neg{-1, -2, -3, -4};
    CHECK(metrics::pearson(x, x).r == doctest::Approx(1.0));
    CHECK(metrics::pearson(x, neg).r == doctest::Approx(-1.0));
}

TEST_CASE("pearson rejects degenerate input") {
    std::vector<double> x{1, 2, 3};
    std::vector<double> flat{5, 5, 5};
    std::vector<double> tiny{1};
    CHECK_THROWS_AS((void)metrics::pearson(x, flat), DataError);
    CHECK_THROWS_AS((void)metrics::pearson(tiny, tiny), DataError);
}

TEST_CASE("pearson matches two-pass covariance oracle") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 100; ++round) {
        auto x = random_vector(rng, 40, false);
        auto y = random_vector(rng, 40, false);
        CHECK(metrics::pearson(x, y).r == doctest::Approx(oracles::naive_pearson(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("spearman is 1 for strictly monotone transforms") {
    std::vector<double> x{0.5, 1.5, 2.0, 7.0, 11.0};
    std::vector<double> y;
    for (double v : x) y.push_back(std::exp(v) + v * v * v);
    CHECK(metrics::spearman(x, y).r == doctest::Approx(1.0));
}

TEST_CASE("spearman averages tied ranks") {
    std::vector<double> x{1, 2, 2, 3};
    std::vector<double> y{10, 20, 20, 30};
    CHECK(metrics::spearman(x, y).r == doctest::Approx(1.0));
}

TEST_CASE("spearman equals pearson on counting ranks") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 50; ++round) {
        auto x = random_vector(rng, 30, true);
        auto y = random_vector(rng, 30, true);
        CHECK(metrics::spearman(x, y).r ==
              doctest::Approx(oracles::naive_spearman(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("kendall endpoints") {
    std::vector<double> asc{1, 2, 3};
    std::vector<double> desc{3, 2, 1};
    CHECK(metrics::kendall(asc, asc).r == doctest::Approx(1.0));
    CHECK(metrics::kendall(asc, desc).r == doctest::Approx(-1.0));
}

TEST_CASE("kendall rejects all-tied input") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> flat{2, 2, 2, 2};
    CHECK_THROWS_AS((void)metrics::kendall(x, flat), DataError);
}

TEST_CASE("kendall matches brute-force pair enumeration with ties") {
    std::mt19937_64 rng(13);
    for (int round = 0; round < 200; ++round) {
        auto x = random_vector(rng, 8, true);
        auto y = random_vector(rng, 8, true);
        double expected = oracles::naive_kendall_tau_b(x, y);
        if (!std::isfinite(expected)) continue;  // all-tied draw
        CHECK(metrics::kendall(x, y).r == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("correlations are invariant under monotone transforms") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 30; ++round) {
        auto x = random_vector(rng, 25, true);
        auto y = random_vector(rng, 25, true);
        std::uniform_real_distribution<double> scale(0.5, 3.0);
        std::uniform_real_distribution<double> shift(-4.0, 4.0);
        double a = scale(rng), b = shift(rng);

        std::vector<double> affine, cubic;
        for (double v : x) {
            affine.push_back(a * v + b);
            cubic.push_back(v * v * v + 2.0 * v);  // strictly increasing
        }
        CHECK(metrics::pearson(affine, y).r ==
              doctest::Approx(metrics::pearson(x, y).r).epsilon(1e-9));
        CHECK(metrics::spearman(cubic, y).r ==
              doctest::Approx(metrics::spearman(x, y).r).epsilon(1e-12));
        CHECK(metrics::kendall(cubic, y).r ==
              doctest::Approx(metrics::kendall(x, y).r).epsilon(1e-12));
    }
}

TEST_CASE("correlations are symmetric in their arguments") {
    std::mt19937_64 rng(19);
    for (int round = 0; round < 20; ++round) {
        auto x = random_vector(rng, 20, true);
        auto y = random_vector(rng, 20, true);
        CHECK(metrics::pearson(x, y).r == doctest::Approx(metrics::pearson(y, x).r).epsilon(1e-12));
        CHECK(metrics::kendall(x, y).r == doctest::Approx(metrics::kendall(y, x).r).epsilon(1e-12));
    }
}

TEST_CASE("aspect accuracy counts matches per aspect") {
    std::vector<std::map<Aspect, PlotSide>> golds = {
        {{Aspect::Ending, PlotSide::A}},
        {{Aspect::Ending, PlotSide::A}},
        {{Aspect::Ending, PlotSide::B}},
        {{Aspect::Ending, PlotSide::B}},
    };
    std::vector<judge::PairwiseVerdict> verdicts = {
        make_verdict({{Aspect::Ending, PlotSide::A}}),
        make_verdict({{Aspect::Ending, PlotSide::B}}),
        make_verdict({{Aspect::Ending, PlotSide::B}}),
        make_verdict({{Aspect::Ending, PlotSide::B}}),
    };
    auto report = metrics::aspect_accuracy(verdicts, golds);
    CHECK(report.per_aspect.at(Aspect::Ending) == doctest::Approx(0.75));
    CHECK(report.counts.at(Aspect::Ending) == 4);
    CHECK(report.counts.at(Aspect::Surprise) == 0);
    CHECK(report.per_aspect.count(Aspect::Surprise) == 0);
}

TEST_CASE("strict mode penalizes missing aspects, lenient excludes them") {
    std::vector<std::map<Aspect, PlotSide>> golds = {
        {{Aspect::Surprise, PlotSide::A}},
        {{Aspect::Surprise, PlotSide::A}},
    };
    std::vector<judge::PairwiseVerdict> verdicts = {
        make_verdict({{Aspect::Surprise, PlotSide::A}}),
        make_verdict({}),  // judge refused to answer
    };
    auto strict = metrics::aspect_accuracy(verdicts, golds, metrics::AccuracyMode::strict);
    CHECK(strict.per_aspect.at(Aspect::Surprise) == doctest::Approx(0.5));
    auto lenient = metrics::aspect_accuracy(verdicts, golds, metrics::AccuracyMode::lenient);
    CHECK(lenient.per_aspect.at(Aspect::Surprise) == doctest::Approx(1.0));
    CHECK(lenient.counts.at(Aspect::Surprise) == 1);
}

TEST_CASE("random verdicts sit at chance accuracy") {
    std::mt19937_64 rng(23);
    std::vector<std::map<Aspect, PlotSide>> golds;
    std::vector<judge::PairwiseVerdict> verdicts;
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 1000; ++i) {
        std::map<Aspect, PlotSide> gold;
        judge::PairwiseVerdict verdict;
        verdict.parse_ok = true;
        for (Aspect a : kAllAspects) {
            gold[a] = coin(rng) ? PlotSide::A : PlotSide::B;
            verdict.winners[a] = coin(rng) ? PlotSide::A : PlotSide::B;
        }
        golds.push_back(std::move(gold));
        verdicts.push_back(std::move(verdict));
    }
    auto report = metrics::aspect_accuracy(verdicts, golds);
    for (Aspect a : kAllAspects) {
        CHECK(report.per_aspect.at(a) == doctest::Approx(0.5).epsilon(0.1));
        CHECK(std::abs(report.per_aspect.at(a) - 0.5) < 0.05);
    }
}

TEST_CASE("aspect accuracy is invariant under global relabeling") {
    std::mt19937_64 rng(29);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::map<Aspect, PlotSide>> golds, golds_flipped;
    std::vector<judge::PairwiseVerdict> verdicts, verdicts_flipped;
    for (int i = 0; i < 50; ++i) {
        std::map<Aspect, PlotSide> gold, gold_f;
        judge::PairwiseVerdict v, v_f;
        v.parse_ok = v_f.parse_ok = true;
        for (Aspect a : kAllAspects) {
            if (coin(rng)) continue;  // aspect missing from gold sometimes
            PlotSide gs = coin(rng) ? PlotSide::A : PlotSide::B;
            gold[a] = gs;
            gold_f[a] = opposite(gs);
            if (coin(rng)) {
                PlotSide vs = coin(rng) ? PlotSide::A : PlotSide::B;
                v.winners[a] = vs;
                v_f.winners[a] = opposite(vs);
            }
        }
        golds.push_back(gold);
        golds_flipped.push_back(gold_f);
        verdicts.push_back(v);
        verdicts_flipped.push_back(v_f);
    }
    auto a = metrics::aspect_accuracy(verdicts, golds);
    auto b = metrics::aspect_accuracy(verdicts_flipped, golds_flipped);
    CHECK(a.average == doctest::Approx(b.average).epsilon(1e-12));
}

TEST_CASE("win rate over judged aspects") {
    auto v = make_verdict({{Aspect::Interestingness, PlotSide::A},
                           {Aspect::Adaptability, PlotSide::A},
                           {Aspect::Surprise, PlotSide::A},
                           {Aspect::CharacterDevelopment, PlotSide::A},
                           {Aspect::Ending, PlotSide::B}});
    CHECK(metrics::win_rate(v) == doctest::Approx(0.8));

    auto all_b = make_verdict({{Aspect::Interestingness, PlotSide::B},
                               {Aspect::Ending, PlotSide::B}});
    CHECK(metrics::win_rate(all_b) == doctest::Approx(0.0));

    auto three = make_verdict({{Aspect::Interestingness, PlotSide::A},
                               {Aspect::Surprise, PlotSide::A},
                               {Aspect::Ending, PlotSide::B}});
    CHECK(metrics::win_rate(three) == doctest::Approx(2.0 / 3.0));

    judge::PairwiseVerdict empty;
    CHECK_THROWS_AS((void)metrics::win_rate(empty), DataError);
}

TEST_CASE("explanation similarity endpoints") {
    auto same = metrics::explanation_similarity("A gripping and heartfelt story overall",
                                                "A gripping and heartfelt story overall");
    CHECK(same.bleu == doctest::Approx(100.0));
    CHECK(same.rouge1_f == doctest::Approx(1.0));

    auto disjoint = metrics::explanation_similarity("alpha beta gamma", "delta epsilon zeta");
    CHECK(disjoint.bleu == doctest::Approx(0.0));
    CHECK(disjoint.rouge1_f == doctest::Approx(0.0));
}

TEST_CASE("rouge-1 F matches the hand count") {
    // pred "the cat sat" vs gold "the cat sat down": P=1, R=3/4, F=6/7.
    auto s = metrics::explanation_similarity("the cat sat", "the cat sat down");
    CHECK(s.rouge1_f == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)metrics::explanation_similarity("", "gold"), DataError);
}

TEST_CASE("score calibration endpoints and midpoint") {
    CHECK(metrics::calibrate_score(1) == 1);
    CHECK(metrics::calibrate_score(10) == 5);
    CHECK(metrics::calibrate_score(6) == 3);  // round(1 + 20/9)
    CHECK_THROWS_AS((void)metrics::calibrate_score(11), DataError);
}

TEST_CASE("score calibration is monotone and surjective onto the target") {
    std::set<int> seen;
    int prev = 0;
    for (int s = 1; s <= 10; ++s) {
        int mapped = metrics::calibrate_score(s);
        CHECK(mapped >= prev);
        CHECK(mapped >= 1);
        CHECK(mapped <= 5);
        seen.insert(mapped);
        prev = mapped;
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("consistency under swapped replays") {
    auto all_a = make_verdict({{Aspect::Interestingness, PlotSide::A},
                               {Aspect::Surprise, PlotSide::A},
                               {Aspect::Ending, PlotSide::A}});
    auto all_b = make_verdict({{Aspect::Interestingness, PlotSide::B},
                               {Aspect::Surprise, PlotSide::B},
                               {Aspect::Ending, PlotSide::B}});
    CHECK(metrics::consistency(all_a, all_b) == doctest::Approx(1.0));
    // Position-locked judge: picks A both times, never the same plot.
    CHECK(metrics::consistency(all_a, all_a) == doctest::Approx(0.0));

    auto orig = make_verdict({{Aspect::Interestingness, PlotSide::A},
                              {Aspect::Adaptability, PlotSide::A},
                              {Aspect::Surprise, PlotSide::B},
                              {Aspect::CharacterDevelopment, PlotSide::A},
                              {Aspect::Ending, PlotSide::B}});
    auto swap = make_verdict({{Aspect::Interestingness, PlotSide::B},
                              {Aspect::Adaptability, PlotSide::B},
                              {Aspect::Surprise, PlotSide::B},
                              {Aspect::CharacterDevelopment, PlotSide::B},
                              {Aspect::Ending, PlotSide::B}});
    // Agreements: I, A, C consistent; S and E locked on B.
    CHECK(metrics::consistency(orig, swap) == doctest::Approx(0.6));
}

TEST_CASE("always-A adversary has zero consistency") {
    std::vector<judge::PairwiseVerdict> originals, swapped;
    for (int i = 0; i < 10; ++i) {
        originals.push_back(make_verdict({{Aspect::Interestingness, PlotSide::A},
                                          {Aspect::Ending, PlotSide::A}}));
        swapped.push_back(make_verdict({{Aspect::Interestingness, PlotSide::A},
                                        {Aspect::Ending, PlotSide::A}}));
    }
    CHECK(metrics::consistency_rate(originals, swapped) == doctest::Approx(0.0));
}

TEST_CASE("position bias of a gold replay is exactly zero") {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution coin(0.3);
    std::vector<std::map<Aspect, PlotSide>> golds;
    std::vector<judge::PairwiseVerdict> verdicts;
    for (int i = 0; i < 40; ++i) {
        std::map<Aspect, PlotSide> gold;
        for (Aspect a : kAllAspects) gold[a] = coin(rng) ? PlotSide::A : PlotSide::B;
        judge::PairwiseVerdict v;
        v.winners = gold;
        v.parse_ok = true;
        golds.push_back(std::move(gold));
        verdicts.push_back(std::move(v));
    }
    CHECK(metrics::position_bias(verdicts, golds) == 0.0);
}

TEST_CASE("position bias of a second-plot judge against balanced gold") {
    std::vector<std::map<Aspect, PlotSide>> golds;
    std::vector<judge::PairwiseVerdict> verdicts;
    for (int i = 0; i < 10; ++i) {
        golds.push_back({{Aspect::Ending, i < 5 ? PlotSide::A : PlotSide::B}});
        verdicts.push_back(make_verdict({{Aspect::Ending, PlotSide::B}}));
    }
    CHECK(metrics::position_bias(verdicts, golds) == doctest::Approx(-0.5));
}

TEST_CASE("memorization bias") {
    std::vector<std::map<Aspect, PlotSide>> golds;
    std::vector<judge::PairwiseVerdict> verdicts;
    std::vector<PlotSide> memorized;
    // Gold favors the memorized side 40% of the time; judge always picks it.
    for (int i = 0; i < 10; ++i) {
        PlotSide mem = i % 2 == 0 ? PlotSide::A : PlotSide::B;
        memorized.push_back(mem);
        golds.push_back({{Aspect::Ending, i < 4 ? mem : opposite(mem)}});
        verdicts.push_back(make_verdict({{Aspect::Ending, mem}}));
    }
    CHECK(metrics::memorization_bias(verdicts, golds, memorized) == doctest::Approx(0.6));

    // A judge replaying gold shows no memorization bias.
    std::vector<judge::PairwiseVerdict> replay;
    for (const auto& gold : golds) {
        judge::PairwiseVerdict v;
        v.winners = gold;
        v.parse_ok = true;
        replay.push_back(std::move(v));
    }
    CHECK(metrics::memorization_bias(replay, golds, memorized) == doctest::Approx(0.0));
}

TEST_CASE("score variance over hand-computed queries") {
    Corpus corpus;
    corpus.schema.scale = {1, 10};
    auto add = [&](const char* reviewer, const char* item, int score) {
        corpus.reviews.push_back({reviewer, item, "text", score});
    };
    add("r1", "q1", 4);
    add("r2", "q1", 6);
    add("r1", "q2", 7);
    add("r1", "q3", 2);
    add("r2", "q3", 4);
    add("r3", "q3", 6);

    auto report = metrics::score_variance(corpus);
    CHECK(report.n_queries == 3);
    CHECK(report.review_count_mean == doctest::Approx(2.0));
    CHECK(report.score_mean == doctest::Approx((5.0 + 7.0 + 4.0) / 3.0).epsilon(1e-12));
    double expected_std = (1.0 + 0.0 + std::sqrt(8.0 / 3.0)) / 3.0;
    CHECK(report.score_std == doctest::Approx(expected_std).epsilon(1e-12));
}

TEST_CASE("score variance of unanimous reviewers is zero") {
    Corpus corpus;
    for (int r = 0; r < 4; ++r) {
        for (int q = 0; q < 3; ++q) {
            corpus.reviews.push_back(
                {"r" + std::to_string(r), "q" + std::to_string(q), "text", 7});
        }
    }
    CHECK(metrics::score_variance(corpus).score_std == doctest::Approx(0.0));

    Corpus empty;
    CHECK_THROWS_AS((void)metrics::score_variance(empty), DataError);
}

} // TEST_SUITE
