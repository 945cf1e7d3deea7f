#include <cmath>

#include <doctest.h>

#include "autowarp/core.hpp"
#include "autowarp/rng.hpp"
#include "support.hpp"

using namespace autowarp;
using testing::traj;

TEST_SUITE("core") {
  TEST_CASE("normalize: hand-computed two-trajectory example") {
    const TrajectoryDataset ds({traj("a", {{0}, {2}}), traj("b", {{2}, {4}})});
    const auto n = normalize_dataset(ds);
    const double r2 = std::sqrt(2.0);
    CHECK(n.normalization().mean(0) == doctest::Approx(2.0));
    CHECK(n.normalization().stddev(0) == doctest::Approx(r2));
    CHECK(n[0].states(0, 0) == doctest::Approx(-r2));
    CHECK(n[0].states(1, 0) == doctest::Approx(0.0));
    CHECK(n[1].states(0, 0) == doctest::Approx(0.0));
    CHECK(n[1].states(1, 0) == doctest::Approx(r2));
  }

  TEST_CASE("normalize: constant dimension is centred and flagged") {
    const TrajectoryDataset ds({traj("a", {{5, 1}, {5, 2}}), traj("b", {{5, 3}})});
    const auto n = normalize_dataset(ds);
    CHECK(n.normalization().constant[0]);
    CHECK_FALSE(n.normalization().constant[1]);
    for (const auto& t : n.trajectories())
      for (Eigen::Index i = 0; i < t.length(); ++i) CHECK(t.states(i, 0) == 0.0);
  }

  TEST_CASE("normalize: idempotent and invertible") {
    Rng rng(7);
    const auto ds = testing::random_dataset(rng, 6, 3, 9, 3);
    Eigen::MatrixXd shift(1, 3);
    std::vector<Trajectory> scaled;
    for (const auto& t : ds.trajectories()) {
      Eigen::MatrixXd s = t.states * 4.0;
      s.col(1).array() += 10.0;
      scaled.push_back({t.id, s});
    }
    const TrajectoryDataset raw(scaled);
    const auto once = normalize_dataset(raw);
    const auto twice = normalize_dataset(once);
    const auto back = denormalize_dataset(once);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      CHECK((twice[i].states - once[i].states).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((back[i].states - raw[i].states).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(once[i].id == raw[i].id);
    }
    // fully inverting a twice-normalized set also recovers the raw data
    const auto back2 = denormalize_dataset(twice);
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK((back2[i].states - raw[i].states).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("normalize: zero mean, unit population std per dimension") {
    Rng rng(3);
    const auto n = normalize_dataset(testing::random_dataset(rng, 5, 4, 8, 2));
    Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
    double count = 0;
    for (const auto& t : n.trajectories()) {
      sum += t.states.colwise().sum().transpose();
      sq += t.states.cwiseAbs2().colwise().sum().transpose();
      count += static_cast<double>(t.length());
    }
    CHECK((sum / count).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(sq(0) / count - 1.0) < 1e-12);
    CHECK(std::abs(sq(1) / count - 1.0) < 1e-12);
  }

  TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(TrajectoryDataset({traj("a", {{1}}), traj("a", {{2}})}), DataError);
    CHECK_THROWS_AS(TrajectoryDataset({traj("a", {{1}}), traj("b", {{2, 3}})}), DataError);
    CHECK_THROWS_AS(TrajectoryDataset({traj("a", {{NAN}})}), DataError);
    CHECK_THROWS_AS(TrajectoryDataset({traj("a", {{1}})}, std::vector<int>{1, 2}), DataError);
    const TrajectoryDataset ok({traj("a", {{1}, {2}}), traj("b", {{2}})});
    CHECK_FALSE(ok.has_labels());
    CHECK_THROWS_AS(ok.labels(), ContractError);
    CHECK(ok.mean_length() == 1.5);
    CHECK_FALSE(ok.equal_lengths());
  }

  TEST_CASE("warp params: derived coefficients and validation") {
    CHECK(WarpParams{1.0, 0.0, 1.0}.gap_coefficient() == kInf);
    CHECK(WarpParams{0.5, 0.0, 1.0}.gap_coefficient() == 1.0);
    CHECK(WarpParams{0.5, 0.0, 1.0}.threshold() == kInf);
    CHECK(WarpParams{0.5, 0.0, 0.5}.threshold() == 1.0);
    CHECK_THROWS_AS((WarpParams{1.1, 0, 1}).validate(), ContractError);
    CHECK_THROWS_AS((WarpParams{0.5, -1, 1}).validate(), ContractError);
    CHECK_THROWS_AS((WarpParams{0.5, 0, 0}).validate(), ContractError);
    CHECK_NOTHROW((WarpParams{1, 0, 1}).validate());
  }

  TEST_CASE("rng: determinism and substreams") {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      if (i < 10 && x != c.next_u64()) differs = true;
    }
    CHECK(differs);
    Rng o = Rng(42).substream("optimizer"), s = Rng(42).substream("sampler");
    int same = 0;
    for (int i = 0; i < 10; ++i) same += o.next_u64() == s.next_u64();
    CHECK(same == 0);
    Rng o2 = Rng(42).substream("optimizer");
    CHECK(Rng(42).substream("optimizer").next_u64() == o2.next_u64());
  }

  TEST_CASE("rng: distribution sanity") {
    Rng r(1);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      const double z = r.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) ++counts[r.index(7)];
    for (int c : counts) CHECK(std::abs(c - 1000) < 150);
  }

  TEST_CASE("latent distances") {
    LatentMatrix lm{{"a", "b"}, Eigen::MatrixXd(2, 2)};
    lm.vectors << 0, 0, 3, 4;
    const auto d = latent_distances(lm);
    CHECK(d(0, 1) == 5.0);
    CHECK(d(1, 0) == 5.0);
    CHECK(d(0, 0) == 0.0);
  }
}
