#include <gtest/gtest.h>

#include <set>

#include "recourse/errors.hpp"
#include "recourse/eval.hpp"
#include "recourse/search.hpp"
#include "test_util.hpp"

namespace recourse {
namespace {

LinearModel axis_model(double w1, double w2, double b = 0.0) {
  Eigen::MatrixXd W(1, 2);
  W << w1, w2;
  return LinearModel(W, Eigen::VectorXd::Constant(1, b), Likelihood::Binary);
}

// Two-feature data set whose only role is to carry mutability, MAD and class centroids.
Dataset toy_data(std::vector<Mutability> tags = {}) {
  Eigen::MatrixXd X(4, 2);
  X << -1, 0, -2, 1, 1, 0, 2, -1;
  Dataset d(X, {1, 1, 2, 2});
  if (!tags.empty()) d = set_mutability(d, std::move(tags));
  return d;
}

ExplanationState state_of(const Eigen::VectorXd& x, int target, const Eigen::MatrixXd& states) {
  ExplanationState es;
  es.factual = x;
  es.target = target;
  es.states = states;
  return es;
}

TEST(Compose, ListingGenerator) {
  const auto o = compose_objective(LossId::LogitCrossentropy, {{"ddp_diversity", 0.2}}, SearchSpace::Latent, 5);
  EXPECT_EQ(o.loss, LossId::LogitCrossentropy);
  ASSERT_EQ(o.penalties.size(), 1u);
  EXPECT_EQ(o.penalties[0], (PenaltyTerm{PenaltyId::DdpDiversity, 0.2}));
  EXPECT_EQ(o.space, SearchSpace::Latent);
  EXPECT_EQ(o.num_counterfactuals, 5);
}

TEST(Compose, OrderPreservedAndErrors) {
  const auto o = compose_objective(std::nullopt, {{"gravitational", 0.5}, {"distance_l1", 0.1}}, SearchSpace::Feature, 1);
  EXPECT_EQ(o.penalties[0].id, PenaltyId::Gravitational);
  EXPECT_EQ(o.penalties[1].id, PenaltyId::DistanceL1);
  EXPECT_THROW(compose_objective(std::nullopt, {{"entropy", 1.0}}, SearchSpace::Feature, 1), ConfigError);
  EXPECT_THROW(compose_objective(std::nullopt, {{"distance_l1", -1.0}}, SearchSpace::Feature, 1), ConfigError);
  EXPECT_THROW(compose_objective(std::nullopt, {}, SearchSpace::Feature, 0), ConfigError);
}

TEST(Compose, DiversityWithOneCounterfactualWarns) {
  const auto o = compose_objective(std::nullopt, {{"ddp_diversity", 0.2}}, SearchSpace::Feature, 1);
  EXPECT_FALSE(objective_warnings(o).empty());
  EXPECT_TRUE(objective_warnings(compose_objective(std::nullopt, {{"ddp_diversity", 0.2}}, SearchSpace::Feature, 2)).empty());
}

TEST(TotalObjective, EmptyPenaltiesIsPureLoss) {
  const auto m = axis_model(1.0, -0.5, 0.2);
  const auto d = toy_data();
  const Eigen::Vector2d x(0.3, 0.7);
  const auto obj = compose_objective(std::nullopt, {}, SearchSpace::Feature, 1);
  const auto es = state_of(x, 2, x.transpose());
  EXPECT_DOUBLE_EQ(total_objective(obj, es, m, d), m.loss(x, 2, LossId::LogitBinaryCrossentropy));
}

TEST(TotalObjective, ConfidentTargetIsSmall) {
  const auto m = axis_model(0.0, 0.0, std::log(99.0));
  const auto d = toy_data();
  const auto obj = compose_objective(std::nullopt, {}, SearchSpace::Feature, 1);
  const Eigen::Vector2d x(1, 1);
  EXPECT_LE(total_objective(obj, state_of(x, 2, x.transpose()), m, d), 0.02);
}

TEST(TotalObjective, DoublingWeightDoublesPenalty) {
  const auto m = axis_model(1.0, 1.0);
  const auto d = toy_data();
  const Eigen::Vector2d x(-1, -1);
  Eigen::MatrixXd s(1, 2);
  s << 0.5, -0.2;
  const auto es = state_of(x, 2, s);
  const auto base = compose_objective(std::nullopt, {}, SearchSpace::Feature, 1);
  const auto one = compose_objective(std::nullopt, {{"distance_l2", 0.3}}, SearchSpace::Feature, 1);
  const auto two = compose_objective(std::nullopt, {{"distance_l2", 0.6}}, SearchSpace::Feature, 1);
  const double l = total_objective(base, es, m, d);
  EXPECT_NEAR(total_objective(two, es, m, d) - l, 2.0 * (total_objective(one, es, m, d) - l), 1e-15);
  ObjectiveEvaluator ev(one, m, d, x, 2);
  EXPECT_DOUBLE_EQ(ev.loss_term(s), l);
}

TEST(TotalObjective, SingleCounterfactualDiversityIsNegligible) {
  const auto m = axis_model(1.0, 1.0);
  const auto d = toy_data();
  const Eigen::Vector2d x(-1, -1);
  const auto es = state_of(x, 2, x.transpose());
  const auto base = compose_objective(std::nullopt, {}, SearchSpace::Feature, 1);
  const auto div = compose_objective(std::nullopt, {{"ddp_diversity", 1.0}}, SearchSpace::Feature, 1);
  EXPECT_NEAR(total_objective(div, es, m, d), total_objective(base, es, m, d), 1e-7);
}

TEST(ObjectiveGradient, PureLossEqualsModelGradient) {
  const auto m = axis_model(1.5, -0.5, 0.1);
  const auto d = toy_data();
  const Eigen::Vector2d x(0.2, -0.4);
  const auto obj = compose_objective(std::nullopt, {}, SearchSpace::Feature, 1);
  const Eigen::MatrixXd g = objective_gradient(obj, state_of(x, 2, x.transpose()), m, d);
  EXPECT_LE(testing::relative_error(g.transpose(), m.input_gradient(x, 2, LossId::LogitBinaryCrossentropy)), 1e-14);
}

TEST(ObjectiveGradient, MatchesFiniteDifferencesInFeatureSpace) {
  const auto d = standardize(load_synthetic(SyntheticKind::MultiClass, 200, 3));
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto m = train_mlp(d, {16}, 0.0, cfg);
  const auto obj = compose_objective(std::nullopt,
                                     {{"distance_l2", 0.1}, {"ddp_diversity", 0.2}, {"gravitational", 0.5},
                                      {"claproar", 0.3}, {"distance_mad", 0.05}},
                                     SearchSpace::Feature, 3);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = testing::random_point(2, rng);
    Eigen::MatrixXd s(3, 2);
    for (int l = 0; l < 3; ++l) s.row(l) = testing::random_point(2, rng).transpose();
    ObjectiveEvaluator ev(obj, m, d, x, 3);
    auto f = [&](const Eigen::MatrixXd& v) { return ev.value(v); };
    EXPECT_LE(testing::relative_error(ev.gradient(s), testing::numeric_gradient(f, s)), 1e-4);
  }
}

TEST(ObjectiveGradient, LatentChainRuleMatchesFiniteDifferences) {
  const auto d = testing::blobs(300, 2);
  AutoencoderConfig acfg;
  acfg.train.epochs = 20;
  const auto ae = train_autoencoder(d, 1, acfg);
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto m = train_mlp(d, {8}, 0.0, cfg);
  const auto obj = compose_objective(std::nullopt, {{"distance_l2", 0.1}, {"ddp_diversity", 0.2}}, SearchSpace::Latent, 2);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = testing::random_point(2, rng);
    Eigen::MatrixXd z(2, 1);
    z << testing::random_point(1, rng)(0), testing::random_point(1, rng)(0);
    ObjectiveEvaluator ev(obj, m, d, x, 2, &ae);
    EXPECT_EQ(ev.decode(z).cols(), 2);
    auto f = [&](const Eigen::MatrixXd& v) { return ev.value(v); };
    EXPECT_LE(testing::relative_error(ev.gradient(z), testing::numeric_gradient(f, z)), 1e-4);
  }
}

TEST(ObjectiveGradient, SymmetricPairIsPushedApart) {
  const LinearModel m(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1), Likelihood::Binary);
  const auto d = toy_data();
  const auto obj = compose_objective(std::nullopt, {{"ddp_diversity", 1.0}}, SearchSpace::Feature, 2);
  Eigen::MatrixXd s(2, 2);
  s << -0.5, 0.2, 0.5, -0.2;
  ObjectiveEvaluator ev(obj, m, d, Eigen::Vector2d(0, 0), 2);
  const Eigen::MatrixXd g = ev.gradient(s);
  EXPECT_LE((g.row(0) + g.row(1)).norm(), 1e-12);
  // descending moves the pair apart
  EXPECT_GT((s.row(0) - s.row(1)).dot(-(g.row(0) - g.row(1))), 0.0);
  auto f = [&](const Eigen::MatrixXd& v) { return ev.value(v); };
  EXPECT_LE(testing::relative_error(g, testing::numeric_gradient(f, s)), 1e-4);
}

TEST(ObjectiveGradient, TreesHaveNoGradient) {
  const auto d = load_synthetic(SyntheticKind::LinearlySeparable, 100, 1);
  const auto t = train_tree(d, 2);
  const auto obj = compose_objective(std::nullopt, {}, SearchSpace::Feature, 1);
  const Eigen::Vector2d x(0, 0);
  EXPECT_THROW(objective_gradient(obj, state_of(x, 2, x.transpose()), t, d), CapabilityError);
}

TEST(Optimizer, DescentStep) {
  Optimizer opt(OptimizerConfig{OptimizerKind::Descent, 0.1});
  Eigen::MatrixXd g(1, 2);
  g << 1, -2;
  const Eigen::MatrixXd d = opt.step(g);
  EXPECT_NEAR(d(0, 0), -0.1, 1e-15);
  EXPECT_NEAR(d(0, 1), 0.2, 1e-15);
  EXPECT_TRUE(opt.step(Eigen::MatrixXd::Zero(1, 2)).isZero());
}

TEST(Optimizer, FirstAdamStepHasLearningRateMagnitude) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::Adam;
  cfg.learning_rate = 0.005;
  Optimizer opt(cfg);
  Eigen::MatrixXd g(2, 3);
  g << 3, -0.01, 200, -7, 1e-3, 0.5;
  const Eigen::MatrixXd d = opt.step(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(std::abs(d(i)), 0.005, 1e-5);
    EXPECT_EQ(d(i) > 0, g(i) < 0);
  }
}

TEST(Optimizer, RejectsNonPositiveRate) { EXPECT_THROW(Optimizer(OptimizerConfig{OptimizerKind::Descent, 0.0}), ConfigError); }

TEST(Mutability, ImmutableCoordinateIsZeroed) {
  const std::vector<Mutability> tags{Mutability::None, Mutability::Both};
  Eigen::MatrixXd delta(1, 2), cur(1, 2);
  delta << 0.3, -0.2;
  cur << 0, 0;
  const auto out = apply_mutability(delta, tags, Eigen::Vector2d(0, 0), cur);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), -0.2);
}

TEST(Mutability, IncreaseFloorsAtFactual) {
  const std::vector<Mutability> tags{Mutability::Increase};
  Eigen::MatrixXd delta(1, 1), cur(1, 1);
  delta << -0.1;
  cur << 1.05;
  const auto out = apply_mutability(delta, tags, Eigen::VectorXd::Constant(1, 1.0), cur);
  EXPECT_NEAR(out(0, 0), -0.05, 1e-12);
}

TEST(Mutability, DecreaseCapsAtFactual) {
  const std::vector<Mutability> tags{Mutability::Decrease};
  Eigen::MatrixXd delta(1, 1), cur(1, 1);
  delta << 0.4;
  cur << 0.9;
  EXPECT_NEAR(apply_mutability(delta, tags, Eigen::VectorXd::Constant(1, 1.0), cur)(0, 0), 0.1, 1e-12);
}

TEST(Mutability, AllBothIsUnchanged) {
  const std::vector<Mutability> tags(3, Mutability::Both);
  std::mt19937_64 rng(1);
  Eigen::MatrixXd delta(2, 3);
  delta.row(0) = testing::random_point(3, rng).transpose();
  delta.row(1) = testing::random_point(3, rng).transpose();
  EXPECT_EQ(apply_mutability(delta, tags, Eigen::Vector3d(1, 2, 3), Eigen::MatrixXd::Zero(2, 3)), delta);
}

TEST(Greedy, PicksLargestGradient) {
  const std::vector<Mutability> both(2, Mutability::Both);
  Eigen::MatrixXd g(1, 2);
  g << 0.9, -0.1;
  Eigen::MatrixXi hits;
  const auto s = greedy_perturbation(g, both, GreedyOptions{0.1, 10}, hits);
  EXPECT_FALSE(s.exhausted);
  EXPECT_DOUBLE_EQ(s.delta(0, 0), -0.1);
  EXPECT_DOUBLE_EQ(s.delta(0, 1), 0.0);
  EXPECT_EQ(hits(0, 0), 1);
}

TEST(Greedy, SkipsImmutable) {
  const std::vector<Mutability> tags{Mutability::None, Mutability::Both};
  Eigen::MatrixXd g(1, 2);
  g << 0.9, -0.1;
  Eigen::MatrixXi hits;
  const auto s = greedy_perturbation(g, tags, GreedyOptions{0.1, 10}, hits);
  EXPECT_DOUBLE_EQ(s.delta(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.delta(0, 1), 0.1);
}

TEST(Greedy, CapExhaustsFeatures) {
  const std::vector<Mutability> both(2, Mutability::Both);
  Eigen::MatrixXd g(1, 2);
  g << 0.9, -0.1;
  Eigen::MatrixXi hits;
  const GreedyOptions opts{0.1, 2};
  for (int i = 0; i < 4; ++i) {
    const auto s = greedy_perturbation(g, both, opts, hits);
    EXPECT_FALSE(s.exhausted);
    EXPECT_EQ((s.delta.array() != 0.0).count(), 1);
  }
  EXPECT_TRUE(greedy_perturbation(g, both, opts, hits).exhausted);
}

TEST(Greedy, SearchIsSparse) {
  const auto d = testing::blobs(500, 3);
  const auto m = train_linear(d, TrainConfig{});
  const auto idx = draw_factuals(d, m, 2, 5, 1);
  for (auto i : idx) {
    const auto es = generate_counterfactual(select_factual(d, i + 1), 2, d, m, preset("greedy"));
    EXPECT_NE(es.reason, StopReason::MaxIter);
    for (std::size_t k = 1; k < es.path.size(); ++k) {
      EXPECT_LE(((es.path[k] - es.path[k - 1]).array() != 0.0).count(), 1);
    }
    EXPECT_LE(distance(es.counterfactual(), es.factual, Norm::L0), es.iterations);
  }
}

TEST(Dropout, HalfOfTwoZeroesExactlyOne) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    Eigen::MatrixXd delta = Eigen::MatrixXd::Constant(3, 2, 0.7);
    apply_dropout(delta, 0.5, rng);
    for (Eigen::Index r = 0; r < 3; ++r) EXPECT_EQ((delta.row(r).array() == 0.0).count(), 1);
  }
}

TEST(Dropout, ZeroIsNoOpAndSeeded) {
  std::mt19937_64 a(5), b(5);
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Constant(2, 6, 1.0), d2 = d1;
  apply_dropout(d1, 0.0, a);
  EXPECT_TRUE((d1.array() == 1.0).all());
  apply_dropout(d1, 0.4, a);
  apply_dropout(d2, 0.4, b);
  EXPECT_EQ(d1, d2);
}

TEST(Dropout, ZeroProbabilityMatchesInnerGenerator) {
  const auto d = testing::blobs(300, 4);
  const auto m = train_linear(d, TrainConfig{});
  const Eigen::VectorXd x = select_factual(d, draw_factuals(d, m, 2, 1, 3).front() + 1);
  SearchOptions o;
  o.seed = 9;
  const auto a = generate_counterfactual(x, 2, d, m, preset("generic"), o);
  const auto b = generate_counterfactual(x, 2, d, m, with_dropout(preset("generic"), 0.0), o);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

class SearchOnBlobs : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(testing::blobs());
    TrainConfig cfg;
    cfg.seed = 1;
    model_ = new LinearModel(train_linear(*data_, cfg));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete model_;
  }
  static inline Dataset* data_ = nullptr;
  static inline LinearModel* model_ = nullptr;
};

TEST_F(SearchOnBlobs, GenericFindsValidCounterfactual) {
  for (auto i : draw_factuals(*data_, *model_, 2, 10, 1)) {
    const auto es = generate_counterfactual(select_factual(*data_, i + 1), 2, *data_, *model_, preset("generic"));
    EXPECT_TRUE(validity(es, *model_).valid);
    EXPECT_EQ(es.reason, StopReason::ThresholdReached);
    EXPECT_LE(es.iterations, 1000);
    EXPECT_EQ(es.path.size(), static_cast<std::size_t>(es.iterations) + 1);
    EXPECT_EQ(es.path.front(), es.factual.transpose());
    EXPECT_EQ(es.path.back(), es.counterfactuals);
  }
}

TEST_F(SearchOnBlobs, AlreadyTargetReturnsImmediately) {
  const auto rows = data_->rows_with_label(2);
  for (auto r : rows) {
    const Eigen::VectorXd x = select_factual(*data_, r + 1);
    if (model_->probs(x)(1) < 0.5) continue;
    const auto es = generate_counterfactual(x, 2, *data_, *model_, preset("generic"));
    EXPECT_EQ(es.path.size(), 1u);
    EXPECT_EQ(es.iterations, 0);
    EXPECT_EQ(es.counterfactual(), x);
    EXPECT_FALSE(es.warnings.empty());
    return;
  }
  FAIL() << "no confidently classified target row";
}

TEST_F(SearchOnBlobs, FixedSeedIsBitExact) {
  const Eigen::VectorXd x = select_factual(*data_, draw_factuals(*data_, *model_, 2, 1, 7).front() + 1);
  SearchOptions o;
  o.seed = 42;
  const auto g = with_dropout(preset("dice"), 0.5);
  EXPECT_EQ(to_json(generate_counterfactual(x, 2, *data_, *model_, g, o)).dump(),
            to_json(generate_counterfactual(x, 2, *data_, *model_, g, o)).dump());
}

TEST_F(SearchOnBlobs, MutabilityEnvelopeHoldsOnEveryPathPoint) {
  const auto none = set_mutability(*data_, {Mutability::None, Mutability::Both});
  const auto inc = set_mutability(*data_, {Mutability::Increase, Mutability::Decrease});
  for (auto i : draw_factuals(*data_, *model_, 2, 10, 2)) {
    const Eigen::VectorXd x = select_factual(*data_, i + 1);
    SearchOptions o;
    o.convergence.max_iter = 200;
    o.seed = static_cast<std::uint64_t>(i);
    for (const auto& name : {"generic", "dice", "greedy"}) {
      const auto a = generate_counterfactual(x, 2, none, *model_, preset(name), o);
      for (const auto& p : a.path) EXPECT_TRUE((p.col(0).array() == x(0)).all());
      const auto b = generate_counterfactual(x, 2, inc, *model_, preset(name), o);
      for (const auto& p : b.path) {
        EXPECT_TRUE((p.col(0).array() >= x(0)).all());
        EXPECT_TRUE((p.col(1).array() <= x(1)).all());
      }
    }
  }
}

TEST(Search, UnreachableBoundaryEndsAtMaxIter) {
  const auto m = axis_model(2.0, 0.0);
  const auto d = toy_data({Mutability::None, Mutability::Both});
  SearchOptions o;
  o.convergence.max_iter = 300;
  const auto es = generate_counterfactual(Eigen::Vector2d(-1, 0), 2, d, m, preset("generic"), o);
  EXPECT_EQ(es.reason, StopReason::MaxIter);
  EXPECT_EQ(es.iterations, 300);
  EXPECT_FALSE(validity(es, m).valid);
}

TEST(Search, StepBelowTauStops) {
  const auto m = axis_model(2.0, 0.0);
  const auto d = toy_data({Mutability::None, Mutability::Both});
  SearchOptions o;
  o.convergence.check = ConvergenceCheck::StepBelowTau;
  const auto es = generate_counterfactual(Eigen::Vector2d(-1, 0), 2, d, m, preset("generic"), o);
  EXPECT_EQ(es.reason, StopReason::StepBelowTau);
  EXPECT_EQ(es.iterations, 1);
}

TEST(Search, MaxIterCheckRunsFullBudget) {
  const auto m = axis_model(2.0, 0.0);
  const auto d = toy_data();
  SearchOptions o;
  o.convergence.check = ConvergenceCheck::MaxIter;
  o.convergence.max_iter = 25;
  const auto es = generate_counterfactual(Eigen::Vector2d(-1, 0), 2, d, m, preset("generic"), o);
  EXPECT_EQ(es.iterations, 25);
  EXPECT_EQ(es.reason, StopReason::MaxIter);
}

TEST(Search, CapabilityAndConfigErrors) {
  const auto d = load_synthetic(SyntheticKind::LinearlySeparable, 100, 1);
  const auto tree = train_tree(d, 2);
  const auto lin = axis_model(1, 1);
  const Eigen::Vector2d x(0, 0);
  EXPECT_THROW(generate_counterfactual(x, 2, d, tree, preset("generic")), CapabilityError);
  EXPECT_THROW(generate_counterfactual(x, 2, d, lin, preset("feature_tweak")), CapabilityError);
  EXPECT_THROW(generate_counterfactual(x, 3, d, lin, preset("generic")), ConfigError);
  SearchOptions bad;
  bad.convergence.max_iter = 0;
  EXPECT_THROW(generate_counterfactual(x, 2, d, lin, preset("generic"), bad), ConfigError);
  bad = {};
  bad.convergence.decision_threshold = 0.0;
  EXPECT_THROW(generate_counterfactual(x, 2, d, lin, preset("generic"), bad), ConfigError);
  EXPECT_THROW(generate_counterfactual(Eigen::Vector3d(0, 0, 0), 2, d, lin, preset("generic")), DimensionError);
}

TEST(Search, LatentSearchRejectsMutability) {
  const auto d = testing::blobs(200, 1);
  AutoencoderConfig acfg;
  acfg.train.epochs = 5;
  const auto ae = std::make_shared<const Autoencoder>(train_autoencoder(d, 1, acfg));
  PresetOptions po;
  po.autoencoder = ae;
  const auto lin = axis_model(1, 1);
  const auto tagged = set_mutability(d, {Mutability::Increase, Mutability::Both});
  EXPECT_THROW(generate_counterfactual(Eigen::Vector2d(-1, -1), 2, tagged, lin, preset("revise", po)), ConfigError);
  const auto es = generate_counterfactual(Eigen::Vector2d(-1, -1), 2, d, lin, preset("revise", po));
  EXPECT_EQ(es.space, SearchSpace::Latent);
  EXPECT_EQ(es.states.cols(), 1);
  EXPECT_EQ(es.counterfactuals.cols(), 2);
  EXPECT_LE((es.counterfactuals - ae->decode_rows(es.states)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Search, NonFiniteStateIsReported) {
  const auto m = axis_model(10.0, 10.0);
  const auto d = toy_data();
  const auto g = with_optimizer(preset("generic"), OptimizerConfig{OptimizerKind::Descent, 1e308});
  try {
    generate_counterfactual(Eigen::Vector2d(-1, -1), 2, d, m, g);
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
  }
}

TEST(Search, DescentLossIsNonIncreasingOnLinearModel) {
  const auto d = testing::blobs(500, 6);
  const auto m = train_linear(d, TrainConfig{});
  const double lipschitz = 0.25 * m.weights().squaredNorm();
  Generator g = preset("generic", PresetOptions{.num_counterfactuals = 0, .autoencoder = nullptr,
                                                 .distance_weight = 0.0, .second_weight = std::nullopt});
  g = with_optimizer(g, OptimizerConfig{OptimizerKind::Descent, 1.0 / lipschitz});
  SearchOptions o;
  o.convergence.check = ConvergenceCheck::MaxIter;
  o.convergence.max_iter = 100;
  for (auto i : draw_factuals(d, m, 2, 5, 4)) {
    const Eigen::VectorXd x = select_factual(d, i + 1);
    const auto es = generate_counterfactual(x, 2, d, m, g, o);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& p : es.path) {
      const double l = m.loss(p.row(0).transpose(), 2, LossId::LogitBinaryCrossentropy);
      EXPECT_LE(l, prev + 1e-15);
      prev = l;
    }
  }
}

TEST(Search, JsonRoundTrip) {
  const auto d = testing::blobs(300, 2);
  const auto m = train_linear(d, TrainConfig{});
  const Eigen::VectorXd x = select_factual(d, draw_factuals(d, m, 2, 1, 1).front() + 1);
  const auto es = generate_counterfactual(x, 2, d, m, preset("dice"));
  const auto j = to_json(es);
  for (const auto* key : {"factual", "target", "counterfactuals", "path", "converged_reason", "iterations"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const auto back = explanation_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(back.counterfactuals, es.counterfactuals);
  EXPECT_EQ(back.reason, es.reason);
}

TEST(Search, StopReasonStrings) {
  for (auto r : {StopReason::ThresholdReached, StopReason::MaxIter, StopReason::StepBelowTau,
                 StopReason::FeaturesExhausted, StopReason::SearchComplete, StopReason::NoCandidate,
                 StopReason::MaxRounds}) {
    EXPECT_EQ(parse_stop_reason(to_string(r)), r);
  }
  EXPECT_EQ(to_string(StopReason::MaxIter), "max_iter");
}

}  // namespace
}  // namespace recourse
