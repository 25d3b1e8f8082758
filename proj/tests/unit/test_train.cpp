#include <doctest.h>

#include "../support/toy.hpp"
#include "elastipinn/optim/train.hpp"

using namespace elastipinn;
using namespace elastipinn::optim;
using elastipinn::testing::ToyOptions;
using elastipinn::testing::toy_objective;

namespace {

Schedule small_schedule() {
    Schedule s;
    s.pre_adam = 6;
    s.pre_bfgs_max = 4;
    s.pre_tol = 1e-300;
    s.adam = 5;
    s.bfgs = 7;
    return s;
}

loss::Objective global_toy() {
    ToyOptions o;
    o.mode = loss::StiffnessMode::Global;
    o.scalars = {{"mu", 15.0}};
    o.n_pde = 30;
    o.n_obs = 20;
    return toy_objective(o);
}

}  // namespace

TEST_CASE("empty schedule returns the initial state") {
    const loss::Objective obj = global_toy();
    Schedule s;
    s.pre_adam = s.pre_bfgs_max = s.adam = s.bfgs = 0;
    const Eigen::VectorXd th = obj.initial(1);
    const TrainingRecord r = train(obj, th, s);
    CHECK(r.theta == th);
    CHECK(r.phases.empty());
    CHECK(r.log.empty());
    CHECK(r.epochs == 0);
}

TEST_CASE("two-phase schedule") {
    const loss::Objective obj = global_toy();
    const loss::Objective test = toy_objective(ToyOptions{.mode = loss::StiffnessMode::Global,
                                                          .scalars = {{"mu", 15.0}},
                                                          .n_obs = 20,
                                                          .n_pde = 30,
                                                          .seed = 99});
    const Eigen::VectorXd th = obj.initial(2);
    const TrainingRecord r = train(obj, th, small_schedule(), {}, &test);
    REQUIRE(r.phases.size() == 4);
    CHECK_FALSE(r.aborted);
    CHECK(r.phases[0].name == "pretrain-adam");
    CHECK(r.phases[1].start_epoch == 6);
    CHECK(r.phases[2].start_epoch == 6 + 4);
    CHECK(r.phases[3].start_epoch == 6 + 4 + 5);
    CHECK(r.epochs == r.phases[3].end_epoch);

    SUBCASE("every state is logged for both splits") {
        std::vector<long> train_epochs, test_epochs;
        for (const auto& [phase, b] : r.log) {
            (b.split == "train" ? train_epochs : test_epochs).push_back(b.epoch);
            for (loss::Term t : loss::kAllTerms) CHECK(b.has(t) == obj.applicable(t));
        }
        CHECK(train_epochs == test_epochs);
        for (long e = 0; e <= r.epochs; ++e)
            CHECK(std::count(train_epochs.begin(), train_epochs.end(), e) >= 1);
    }
    SUBCASE("pre-training leaves the physical unknowns alone") {
        Schedule s = small_schedule();
        s.adam = s.bfgs = 0;
        const TrainingRecord p = train(obj, th, s);
        CHECK(p.theta[obj.scalar_offset()] == 1.0);
        CHECK(p.theta.head(obj.u_size()) != th.head(obj.u_size()));
    }
    SUBCASE("bfgs never increases the objective") {
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& [phase, b] : r.log) {
            if (phase != "bfgs" || b.split != "train") continue;
            CHECK(b.total <= prev);
            prev = b.total;
        }
    }
    SUBCASE("identical runs give identical trajectories") {
        const TrainingRecord again = train(obj, th, small_schedule(), {}, &test);
        REQUIRE(again.log.size() == r.log.size());
        for (std::size_t i = 0; i < r.log.size(); ++i) {
            CHECK(again.log[i].second.total == r.log[i].second.total);
            CHECK(again.log[i].second.raw == r.log[i].second.raw);
        }
        CHECK(again.theta == r.theta);
    }
}

TEST_CASE("adam-only mode runs exactly one phase") {
    const loss::Objective obj = global_toy();
    Schedule s;
    s.adam_only = true;
    s.adam_only_epochs = 9;
    const TrainingRecord r = train(obj, obj.initial(3), s);
    REQUIRE(r.phases.size() == 1);
    CHECK(r.phases[0].name == "adam-only");
    CHECK(r.epochs == 9);
    CHECK(r.theta[obj.scalar_offset()] != 1.0);
}

TEST_CASE("checkpoints") {
    const loss::Objective obj = global_toy();
    std::vector<Checkpoint> cps;
    TrainOptions opt;
    opt.checkpoint_every = 3;
    opt.keep_log = false;
    opt.on_checkpoint = [&](const Checkpoint& c) { cps.push_back(c); };
    const TrainingRecord r = train(obj, obj.initial(4), small_schedule(), opt);
    CHECK(r.log.empty());
    REQUIRE(cps.size() >= 3);
    CHECK(cps[0].kind == "periodic");
    CHECK(cps[0].epoch == 3);
    CHECK(cps[0].adam.has_value());
    CHECK(cps.back().kind == "best");
    CHECK(cps[cps.size() - 2].kind == "final");
    CHECK(cps[cps.size() - 2].theta == r.theta);
}

TEST_CASE("a poisoned loss aborts with diagnostics") {
    const loss::Objective obj = global_toy();
    Schedule s;
    s.adam_only = true;
    s.adam_only_epochs = 200;
    s.adam_cfg.lr = 5.0;
    std::optional<Checkpoint> last;
    TrainOptions opt;
    opt.on_checkpoint = [&](const Checkpoint& c) {
        if (c.kind == "last-finite") last = c;
    };
    const TrainingRecord r = train(obj, obj.initial(5), s, opt);
    REQUIRE(r.aborted);
    CHECK(r.abort_epoch > 0);
    CHECK(r.abort_term.size() > 0);
    CHECK(r.abort_message.find("epoch") != std::string::npos);
    REQUIRE(last.has_value());
    CHECK(obj.evaluate(last->theta).value < std::numeric_limits<double>::infinity());
}
