#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "linksched/error.hpp"
#include "linksched/hash.hpp"
#include "linksched/trainer.hpp"

using namespace linksched;

namespace {

Dataset labeled(std::size_t n, int links, std::uint64_t seed, const OracleKind& oracle = OracleKind::brute_force()) {
  LayoutConfig c;
  c.num_pairs = links;
  auto d = generate_dataset(c, n, seed);
  label_records(d, ChannelConfig{}, oracle);
  return d;
}

TrainConfig quick_config(int epochs = 5) {
  TrainConfig c;
  c.epochs_max = epochs;
  c.arch.embed_dim = 8;
  c.arch.hidden = 8;
  c.batch_size = 8;
  return c;
}

}  // namespace

TEST(Train, SameSeedGivesIdenticalRun) {
  const auto data = labeled(40, 8, 1);
  const auto cfg = quick_config(4);
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].val_ratio, b.history[i].val_ratio);
  }
  const auto pa = a.model.parameters();
  const auto pb = b.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]);
  EXPECT_EQ(a.model.clf.running_mean, b.model.clf.running_mean);
  EXPECT_EQ(a.model.config_hash, cfg.hash());
}

TEST(Train, InputErrors) {
  EXPECT_THROW(train(Dataset{}, quick_config()), InputError);
  LayoutConfig c;
  c.num_pairs = 5;
  const auto unlabeled = generate_dataset(c, 4, 2);
  EXPECT_THROW(train(unlabeled, quick_config()), InputError);
  auto cfg = quick_config();
  cfg.mode = TrainMode::kUnsupervised;
  EXPECT_NO_THROW(train(unlabeled, cfg));
}

TEST(Train, ConfigErrors) {
  const auto data = labeled(4, 5, 3);
  auto cfg = quick_config();
  cfg.val_fraction = 1.0;
  EXPECT_THROW(train(data, cfg), ConfigError);
  cfg = quick_config();
  cfg.epochs_max = 0;
  EXPECT_THROW(train(data, cfg), ConfigError);
  cfg = quick_config();
  cfg.batch_size = 0;
  EXPECT_THROW(train(data, cfg), ConfigError);
}

TEST(Train, OverfitsSingleLayout) {
  const auto data = labeled(1, 8, 4);
  auto cfg = quick_config(400);
  cfg.patience = 400;
  cfg.adam.lr = 1e-2;
  cfg.arch.embed_dim = 16;
  cfg.arch.hidden = 16;
  const auto r = train(data, cfg);
  EXPECT_LT(r.history.back().train_loss, 0.05 * 8 * std::log(2.0));
  EXPECT_EQ(r.history.back().train_accuracy, 1.0);
}

TEST(Train, ReturnsBestEpochParameters) {
  const auto data = labeled(30, 8, 5);
  auto cfg = quick_config(12);
  cfg.patience = 12;
  cfg.adam.lr = 5e-3;
  const auto r = train(data, cfg);
  ASSERT_GE(r.best_epoch, 1);
  double best = -1.0;
  for (const auto& h : r.history) {
    if (h.improved) {
      EXPECT_GT(h.val_ratio, best);
      best = h.val_ratio;
    } else {
      EXPECT_LE(h.val_ratio, best);
    }
  }
  EXPECT_EQ(best, r.best_val_ratio);
  EXPECT_EQ(r.history[static_cast<std::size_t>(r.best_epoch - 1)].val_ratio, r.best_val_ratio);

  // The returned parameters reproduce the best validation ratio on the same split.
  Dataset val;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 split(mix_seed(cfg.seed, 2));
  std::shuffle(order.begin(), order.end(), split);
  for (std::size_t i = 0; i < 3; ++i) val.push_back(data[order[i]]);
  EXPECT_NEAR(evaluate(r.model, val, cfg.channel, OracleKind::brute_force()).avg_sum_rate_ratio, r.best_val_ratio,
              1e-12);
}

TEST(Train, StopsAfterPatience) {
  const auto data = labeled(20, 6, 6);
  auto cfg = quick_config(200);
  cfg.patience = 3;
  const auto r = train(data, cfg);
  EXPECT_LT(r.history.size(), 200u);
  EXPECT_EQ(static_cast<int>(r.history.size()), r.best_epoch + 3);
}

TEST(Train, NonFiniteLossAborts) {
  LayoutConfig c;
  c.num_pairs = 6;
  auto data = generate_dataset(c, 10, 7);
  for (auto& r : data) r.layout.rx[2].x = std::nan("");
  auto cfg = quick_config(3);
  cfg.mode = TrainMode::kUnsupervised;
  cfg.val_fraction = 0.1;
  try {
    train(data, cfg);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST(Train, SmallLayoutsAreLearnable) {
  const auto data = labeled(300, 10, 8);
  TrainConfig cfg;
  cfg.epochs_max = 100;
  const auto r = train(data, cfg);
  double best_acc = 0.0;
  for (const auto& h : r.history) best_acc = std::max(best_acc, h.val_accuracy);
  EXPECT_GT(best_acc, 0.75);
}

TEST(Evaluate, IsSideEffectFreeAndRepeatable) {
  const auto data = labeled(20, 8, 9);
  const auto r = train(data, quick_config(2));
  const auto before = r.model.clf.running_mean;
  const auto a = evaluate(r.model, data, ChannelConfig{}, OracleKind::brute_force());
  const auto b = evaluate(r.model, data, ChannelConfig{}, OracleKind::brute_force());
  EXPECT_EQ(a.avg_sum_rate_ratio, b.avg_sum_rate_ratio);
  EXPECT_EQ(a.classifier_accuracy, b.classifier_accuracy);
  EXPECT_EQ(r.model.clf.running_mean, before);
  EXPECT_GE(a.classifier_accuracy, 0.0);
  EXPECT_LE(a.classifier_accuracy, 1.0);
}

TEST(Evaluate, OracleAgainstItselfIsPerfect) {
  const auto data = labeled(15, 8, 10);
  const auto rep = evaluate_scheduler(baseline_scheduler(OracleKind::brute_force(), 0), "brute", data, ChannelConfig{},
                                      OracleKind::brute_force());
  EXPECT_EQ(rep.avg_sum_rate_ratio, 1.0);
  EXPECT_EQ(rep.classifier_accuracy, 1.0);
  ASSERT_EQ(rep.per_layout.size(), 15u);
}

TEST(Evaluate, StoredLabelsAreReusedOnlyForMatchingOracle) {
  auto data = labeled(5, 8, 11);
  for (auto& r : data) r.label = Schedule(8, 1);  // pretend labels
  const auto ch = record_channel(data[0], ChannelConfig{});
  EXPECT_EQ(oracle_schedule(data[0], ch, OracleKind::brute_force()).rho, Schedule(8, 1));
  EXPECT_EQ(oracle_schedule(data[0], ch, OracleKind::greedy()).rho, greedy_schedule(ch).rho);
}

TEST(Evaluate, CsvHeaders) {
  const auto data = labeled(3, 5, 12);
  const auto r = train(data, quick_config(2));
  std::ostringstream h, rep;
  write_history_csv(h, r.history);
  write_report_csv(rep, evaluate(r.model, data, ChannelConfig{}, OracleKind::brute_force()));
  EXPECT_EQ(h.str().substr(0, h.str().find('\n')),
            "epoch,train_loss,train_accuracy,val_ratio,val_accuracy,val_active_fraction,improved");
  const std::string rows = rep.str();
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 4);
}

TEST(Unsupervised, TunedTrainingReturnsAModel) {
  LayoutConfig c;
  c.num_pairs = 8;
  const auto data = generate_dataset(c, 20, 13);
  auto cfg = quick_config(3);
  cfg.mode = TrainMode::kUnsupervised;
  const auto r = train_unsupervised_tuned(data, cfg);
  EXPECT_GE(r.best_epoch, 1);
  const auto sweep = train_omega_sweep(data, cfg, {0.0, 0.01});
  EXPECT_TRUE(sweep.omega_loss == 0.0 || sweep.omega_loss == 0.01);
  EXPECT_THROW(train_omega_sweep(data, cfg, {}), ConfigError);
}
