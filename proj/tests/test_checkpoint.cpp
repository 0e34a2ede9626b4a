#include "grokinfo/checkpoint.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>

using namespace grokinfo;

TEST_CASE("checkpoints round-trip bit for bit") {
    Rng rng(20);
    Checkpoint ck;
    ck.meta = {1234, 7, 8, "0123456789abcdef"};
    ck.params = testutil::random_params(5, 7, rng);
    AdamWState st = AdamWState::zeros_like(ck.params);
    st.m = testutil::random_params(5, 7, rng);
    st.v = testutil::random_params(5, 7, rng);
    st.t = 99;
    ck.optimizer = st;

    const auto dir = std::filesystem::temp_directory_path() / "grokinfo_ckpt_test";
    std::filesystem::create_directories(dir);
    save_checkpoint(dir / "c", ck);
    const auto back = load_checkpoint(dir / "c");
    CHECK(back.meta.epoch == 1234);
    CHECK(back.meta.split_seed == 7);
    CHECK(back.meta.init_seed == 8);
    CHECK(back.meta.config_hash == "0123456789abcdef");
    CHECK(back.params.w1 == ck.params.w1);
    CHECK(back.params.b1 == ck.params.b1);
    CHECK(back.params.w2 == ck.params.w2);
    REQUIRE(back.optimizer);
    CHECK(back.optimizer->m.w1 == st.m.w1);
    CHECK(back.optimizer->v.w2 == st.v.w2);
    CHECK(back.optimizer->t == 99);
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing checkpoint files are reported") {
    CHECK_THROWS(load_checkpoint("/nonexistent/grokinfo/ckpt"));
}
