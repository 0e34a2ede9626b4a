#include "grokinfo/config.hpp"
#include "grokinfo/rng.hpp"

#include <doctest.h>

#include <sstream>

using namespace grokinfo;

TEST_CASE("parse key = value lines with comments") {
    std::istringstream in(
        "# a comment\n"
        "run.seed = 3\n"
        "optim.weight_decay = 2.5   # trailing\n"
        "model.n_hidden=64\n"
        "\n"
        "analysis.activation_split = all\n");
    const auto c = parse_config(in);
    CHECK(c.seed == 3);
    CHECK(c.optim.weight_decay == 2.5);
    CHECK(c.n_hidden == 64);
    CHECK(c.analysis.activation_split == Split::All);
    CHECK(c.task.split_seed == derive_seed(3, "split"));
    CHECK(c.init.init_seed == derive_seed(3, "init"));
}

TEST_CASE("unknown keys and malformed values are rejected") {
    RunConfig c;
    CHECK_THROWS(set_config_value(c, "optim.wieght_decay", "1"));
    CHECK_THROWS(set_config_value(c, "optim.weight_decay", "abc"));
    CHECK_THROWS(set_config_value(c, "model.n_hidden", "1.5"));
    std::istringstream bad("run.seed 3\n");
    CHECK_THROWS(parse_config(bad));
}

TEST_CASE("explicit seeds override derived ones") {
    std::istringstream in("run.seed = 3\ntask.split_seed = 99\n");
    const auto c = parse_config(in);
    CHECK(c.task.split_seed == 99);
    CHECK(c.init.init_seed == derive_seed(3, "init"));
}

TEST_CASE("default epoch budget depends on weight decay") {
    RunConfig c;
    c.optim.weight_decay = 0.1;
    CHECK(c.effective_max_epochs() == 30000);
    c.optim.weight_decay = 2.0;
    CHECK(c.effective_max_epochs() == 10000);
    c.schedule.max_epochs = 5;
    CHECK(c.effective_max_epochs() == 5);
}

TEST_CASE("serialisation round-trips and the hash ignores location") {
    RunConfig c;
    c.seed = 4;
    c.optim.weight_decay = 0.3;
    c.init.alpha = 5.0;
    c.mask = HiddenGate(c.n_hidden, 1);
    c.mask[3] = 0;
    c.resolve_seeds();
    std::istringstream in(serialize_config(c));
    const auto back = parse_config(in);
    CHECK(serialize_config(back) == serialize_config(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    RunConfig moved = c;
    moved.output_dir = "/elsewhere";
    moved.analysis.threads = 8;
    CHECK(config_hash(moved) == config_hash(c));
    RunConfig changed = c;
    changed.optim.weight_decay = 0.31;
    CHECK(config_hash(changed) != config_hash(c));
}

TEST_CASE("validation") {
    RunConfig c;
    c.optim.lr = -1.0;
    CHECK_THROWS(c.validate());
    c = RunConfig{};
    c.mask = HiddenGate(3, 1);
    CHECK_THROWS(c.validate());
    c = RunConfig{};
    c.analysis.k_bins = 21;
    CHECK_THROWS(c.validate());
}
