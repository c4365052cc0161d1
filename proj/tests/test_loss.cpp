#include <cmath>
#include <random>

#include "doctest.h"
#include "salco/error.hpp"
#include "salco/loss.hpp"

using namespace salco;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

std::vector<float> unit_f(std::initializer_list<float> v) { return v; }

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("pair loss endpoints") {
    CHECK(pair_loss(vec({1, 2, 3}), vec({1, 2, 3})) == doctest::Approx(-1.0));
    CHECK(pair_loss(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
    CHECK(pair_loss(vec({1, 2}), vec({2, 1})) == doctest::Approx(-0.8));
    CHECK(pair_loss(vec({0, 0}), vec({1, 1})) == 0.0);
}

TEST_CASE("pair loss is scale invariant") {
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> p(6), z(6), ps(6), zs(6);
        const double a = std::abs(dist(gen)) + 0.1, b = std::abs(dist(gen)) + 0.1;
        for (size_t i = 0; i < 6; ++i) {
            p[i] = dist(gen);
            z[i] = dist(gen);
            ps[i] = a * p[i];
            zs[i] = b * z[i];
        }
        CHECK(pair_loss(ps, zs) == doctest::Approx(pair_loss(p, z)).epsilon(1e-9));
    }
}

TEST_CASE("intra loss weighting") {
    const std::vector<PairTerm> unit{{vec({1, 0}), vec({1, 0}), 1.0},
                                     {vec({0, 1}), vec({0, 1}), 1.0}};
    CHECK(intra_loss(unit, 0.5) == doctest::Approx(-2.0));

    const std::vector<PairTerm> quarter{{vec({1, 0}), vec({1, 0}), 0.25}};
    CHECK(intra_loss(quarter, 0.5) == doctest::Approx(-0.5));  // 0.25^0.5 * (-1)

    const std::vector<PairTerm> zero_w{{vec({1, 0}), vec({1, 0}), 0.0}};
    CHECK(intra_loss(zero_w, 0.5) == doctest::Approx(0.0));
    CHECK(intra_loss(zero_w, 0.0) == doctest::Approx(-1.0));  // 0^0 == 1
}

TEST_CASE("negative score is rejected") {
    const std::vector<PairTerm> bad{{vec({1, 0}), vec({1, 0}), -0.1}};
    CHECK_THROWS_AS(intra_loss(bad, 0.5), ArgumentError);
}

TEST_CASE("gamma zero reduces to the unweighted sum") {
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<PairTerm> terms;
    double plain = 0.0;
    for (int k = 0; k < 4; ++k) {
        PairTerm t{{dist(gen), dist(gen), dist(gen)}, {dist(gen), dist(gen), dist(gen)},
                   std::abs(dist(gen))};
        plain += pair_loss(t.p, t.z);
        terms.push_back(std::move(t));
    }
    CHECK(intra_loss(terms, 0.0) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("weights with more saliency pull an aligning objective lower") {
    const std::vector<double> p{1, 0}, z{1, 0};  // pair loss -1
    for (double lo : {0.1, 0.4, 0.8}) {
        const double l_lo = intra_loss({{p, z, lo}}, 0.5);
        const double l_hi = intra_loss({{p, z, lo + 0.1}}, 0.5);
        CHECK(l_hi <= l_lo);
    }
}

TEST_CASE("nn search returns the queue itself for a single entry") {
    MemoryQueue q(4, 2);
    q.push(unit_f({1.0f, 0.0f}));
    const auto nbs = nn_search(q, vec({1, 0}), 1);
    REQUIRE(nbs.size() == 1);
    CHECK(nbs[0][0] == doctest::Approx(1.0));
}

TEST_CASE("nn search ranks by similarity") {
    MemoryQueue q(8, 2);
    q.push(unit_f({0.9f, std::sqrt(1.0f - 0.81f)}));   // cos 0.9 to (1,0)
    q.push(unit_f({0.5f, std::sqrt(1.0f - 0.25f)}));   // cos 0.5
    q.push(unit_f({-0.2f, std::sqrt(1.0f - 0.04f)}));  // cos -0.2
    const auto nbs = nn_search(q, vec({1, 0}), 2);
    REQUIRE(nbs.size() == 2);
    CHECK(nbs[0][0] == doctest::Approx(0.9));
    CHECK(nbs[1][0] == doctest::Approx(0.5));
}

TEST_CASE("nn search exhausts a short queue, sorted") {
    MemoryQueue q(8, 2);
    q.push(unit_f({0.0f, 1.0f}));
    q.push(unit_f({1.0f, 0.0f}));
    const auto nbs = nn_search(q, vec({1, 0}), 10);
    REQUIRE(nbs.size() == 2);
    CHECK(nbs[0][0] == doctest::Approx(1.0));
    CHECK(nbs[1][0] == doctest::Approx(0.0));
}

TEST_CASE("nn ties go to the older entry") {
    MemoryQueue q(8, 2);
    q.push(unit_f({1.0f, 0.0f}));
    q.push(unit_f({2.0f, 0.0f}));  // same direction, inserted later
    const auto nbs = nn_search(q, vec({1, 0}), 1);
    REQUIRE(nbs.size() == 1);
    CHECK(nbs[0][0] == doctest::Approx(1.0f));  // the older one
}

TEST_CASE("excluded entries are never more similar than returned ones") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    MemoryQueue q(32, 4);
    for (int i = 0; i < 32; ++i) q.push(unit_f({dist(gen), dist(gen), dist(gen), dist(gen)}));
    const std::vector<double> probe{0.3, -0.7, 0.1, 0.5};
    const auto top = nn_search(q, probe, 5);
    REQUIRE(top.size() == 5);

    const auto cos_to_probe = [&](std::span<const float> e) {
        double dot = 0, ne = 0, np = 0;
        for (size_t i = 0; i < 4; ++i) {
            dot += e[i] * probe[i];
            ne += e[i] * e[i];
            np += probe[i] * probe[i];
        }
        return dot / std::sqrt(ne * np);
    };
    double min_ret = 2.0;
    for (const auto& nb : top) {
        std::vector<float> f(nb.begin(), nb.end());
        min_ret = std::min(min_ret, cos_to_probe(f));
    }
    const auto all = nn_search(q, probe, 32);
    for (size_t k = 5; k < all.size(); ++k) {
        std::vector<float> f(all[k].begin(), all[k].end());
        CHECK(cos_to_probe(f) <= min_ret + 1e-12);
    }
}

TEST_CASE("inter loss edge cases and hand trace") {
    MemoryQueue empty(4, 2);
    CHECK(inter_loss({{vec({1, 0}), 1.0}}, empty, 5, 0.5) == 0.0);

    MemoryQueue self(4, 2);
    self.push(unit_f({1.0f, 0.0f}));
    CHECK(inter_loss({{vec({1, 0}), 1.0}}, self, 1, 0.5) == doctest::Approx(-1.0));

    // t = 1, l = 2, score 0.25, gamma 0.5, neighbor cosines (1, 0):
    // (1/1)(1/2) * 0.5 * (-1 + 0) = -0.25.
    MemoryQueue q(4, 2);
    q.push(unit_f({1.0f, 0.0f}));
    q.push(unit_f({0.0f, 1.0f}));
    CHECK(inter_loss({{vec({1, 0}), 0.25}}, q, 2, 0.5) == doctest::Approx(-0.25));
}

TEST_CASE("total loss is the plain sum") {
    CHECK(total_loss(0.0, 0.0) == 0.0);
    CHECK(total_loss(-1.5, -0.25) == -1.75);
    std::mt19937 gen(4);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int it = 0; it < 20; ++it) {
        const double a = dist(gen), b = dist(gen);
        CHECK(total_loss(a, b) == a + b);
        CHECK(total_loss(a, b) == total_loss(b, a));
    }
}

TEST_CASE("gradient vanishes at perfect alignment") {
    const auto g = loss_grad(vec({1, 2, 3}), vec({1, 2, 3}));
    for (double v : g) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gradient of zero-norm input is zero") {
    const auto g = loss_grad(vec({0, 0}), vec({1, 1}));
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("cosine gradient matches finite differences and is tangent") {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double h = 1e-5;
    for (int it = 0; it < 50; ++it) {
        std::vector<double> p(8), z(8);
        for (auto& v : p) v = dist(gen);
        for (auto& v : z) v = dist(gen);

        const auto g = loss_grad(p, z);
        double tangency = 0.0;
        for (size_t i = 0; i < 8; ++i) tangency += g[i] * p[i];
        CHECK(std::abs(tangency) <= 1e-9);

        for (size_t i = 0; i < 8; ++i) {
            std::vector<double> up = p, down = p;
            up[i] += h;
            down[i] -= h;
            const double fd = (pair_loss(up, z) - pair_loss(down, z)) / (2.0 * h);
            CHECK(std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8}) <= 1e-5);
        }
    }
}

TEST_CASE("queue evicts strictly FIFO") {
    MemoryQueue q(2, 1);
    queue_push(q, {{1.0f}, {2.0f}, {3.0f}});
    REQUIRE(q.size() == 2);
    CHECK(q.entry(0)[0] == 2.0f);
    CHECK(q.entry(1)[0] == 3.0f);
}

TEST_CASE("empty batch leaves the queue unchanged") {
    MemoryQueue q(2, 1);
    q.push(unit_f({5.0f}));
    queue_push(q, {});
    REQUIRE(q.size() == 1);
    CHECK(q.entry(0)[0] == 5.0f);
}

TEST_CASE("filling to capacity preserves insertion order") {
    MemoryQueue q(4, 1);
    queue_push(q, {{0.0f}, {1.0f}, {2.0f}, {3.0f}});
    REQUIRE(q.size() == 4);
    for (size_t i = 0; i < 4; ++i) CHECK(q.entry(i)[0] == static_cast<float>(i));
}

TEST_CASE("queue rejects mismatched dimensions") {
    MemoryQueue q(2, 3);
    CHECK_THROWS_AS(q.push(unit_f({1.0f})), ArgumentError);
}

TEST_CASE("loss line format") {
    CHECK(format_loss_line({7, -1.5, -0.25, -1.75}) == "7 -1.5 -0.25 -1.75");
}

}  // TEST_SUITE
