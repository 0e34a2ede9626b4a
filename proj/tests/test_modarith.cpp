#include "grokinfo/modarith.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace grokinfo;

TEST_CASE("table for p = 5 has 25 rows in lexicographic order") {
    const auto d = generate_dataset({5, 0.4, 0});
    REQUIRE(d.size() == 25);
    // row index = 5a + b
    CHECK(d.lhs[4 * 5 + 3] == 4);
    CHECK(d.rhs[4 * 5 + 3] == 3);
    CHECK(d.labels[4 * 5 + 3] == 2);
    CHECK(d.train_idx.size() == 10);
    CHECK(d.test_idx.size() == 15);
}

TEST_CASE("p = 97 split sizes and a known label") {
    const auto d = generate_dataset({97, 0.4, 3});
    CHECK(d.size() == 9409);
    CHECK(d.train_idx.size() == 3763);
    CHECK(d.test_idx.size() == 5646);
    CHECK(d.labels[95 * 97 + 5] == 3);
    for (std::size_t r = 0; r < d.size(); ++r) REQUIRE(d.labels[r] == (d.lhs[r] + d.rhs[r]) % 97);
}

TEST_CASE("split is a partition, sorted, and deterministic in the seed") {
    const auto a = generate_dataset({23, 0.3, 11});
    const auto b = generate_dataset({23, 0.3, 11});
    const auto c = generate_dataset({23, 0.3, 12});
    CHECK(a.train_idx == b.train_idx);
    CHECK(a.train_idx != c.train_idx);
    CHECK(std::is_sorted(a.train_idx.begin(), a.train_idx.end()));
    std::vector<int> all(a.train_idx);
    all.insert(all.end(), a.test_idx.begin(), a.test_idx.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expect(a.size());
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
}

TEST_CASE("every residue appears p times in the full table") {
    const auto d = generate_dataset({13, 0.5, 0});
    std::vector<int> counts(13, 0);
    for (int y : d.labels) ++counts[y];
    for (int c : counts) CHECK(c == 13);
}

TEST_CASE("one-hot encoding") {
    const auto v = encode_onehot(2, 4, 5);
    REQUIRE(v.size() == 10);
    CHECK(v.sum() == 2.0);
    CHECK(v[2] == 1.0);
    CHECK(v[5 + 4] == 1.0);
    CHECK_THROWS_AS(encode_onehot(5, 0, 5), std::out_of_range);
    CHECK_THROWS_AS(encode_onehot(0, -1, 5), std::out_of_range);

    const auto d = generate_dataset({7, 0.4, 0});
    const Eigen::MatrixXd dense(d.inputs);
    for (std::size_t r = 0; r < d.size(); ++r)
        REQUIRE((dense.row(static_cast<Eigen::Index>(r)).transpose() - encode_onehot(d.lhs[r], d.rhs[r], 7)).norm() ==
                0.0);
}

TEST_CASE("split rows and labels line up") {
    const auto d = generate_dataset({11, 0.4, 5});
    const Eigen::MatrixXd x(d.rows(Split::Train));
    const auto y = d.labels_of(Split::Train);
    REQUIRE(x.rows() == static_cast<Eigen::Index>(d.train_idx.size()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        int a = -1, b = -1;
        for (int c = 0; c < 11; ++c) {
            if (x(r, c) == 1.0) a = c;
            if (x(r, 11 + c) == 1.0) b = c;
        }
        CHECK(y[r] == (a + b) % 11);
    }
}

TEST_CASE("invalid task specs are rejected") {
    CHECK_THROWS(generate_dataset({1, 0.4, 0}));
    CHECK_THROWS(generate_dataset({7, 0.0, 0}));
    CHECK_THROWS(generate_dataset({7, 1.0, 0}));
}
