#include <doctest.h>

#include "autowarp/synth.hpp"
#include "support.hpp"

using namespace autowarp;

TEST_SUITE("synth") {
  TEST_CASE("labels partition into seeds classes of copies members") {
    SynthSpec spec;
    spec.seeds = 4;
    spec.copies = 6;
    const auto ds = generate(spec);
    CHECK(ds.size() == 24);
    std::vector<int> counts(4, 0);
    for (int l : ds.labels()) ++counts[static_cast<std::size_t>(l)];
    for (int c : counts) CHECK(c == 6);
    CHECK(ds[0].id == "t000");
    CHECK(ds[23].id == "t023");
  }

  TEST_CASE("deterministic under a fixed seed") {
    for (auto kind : {NoiseKind::gaussian, NoiseKind::outliers, NoiseKind::hybrid_gaussian_resample}) {
      SynthSpec spec;
      spec.noise = kind;
      spec.seed = 99;
      const auto a = generate(spec), b = generate(spec);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].states == b[i].states);
      spec.seed = 100;
      CHECK(generate(spec)[0].states != a[0].states);
    }
  }

  TEST_CASE("zero outlier rate equals noiseless copies") {
    SynthSpec spec;
    spec.noise = NoiseKind::outliers;
    spec.outlier_rate = 0.0;
    const auto a = generate(spec);
    spec.noise = NoiseKind::none;
    const auto b = generate(spec);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].states == b[i].states);
  }

  TEST_CASE("keep = 1 preserves lengths; resampling yields subsequences of the seed") {
    SynthSpec spec;
    spec.noise = NoiseKind::resample;
    spec.keep_fraction = 1.0;
    for (const auto& t : generate(spec).trajectories()) CHECK(t.length() == 30);

    spec.keep_fraction = 0.5;
    const auto ds = generate(spec);
    spec.noise = NoiseKind::none;
    const auto clean = generate(spec);
    bool unequal = false;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto& sub = ds[i].states;
      const auto& src = clean[i].states;
      CHECK(sub.rows() >= 2);
      unequal = unequal || sub.rows() != src.rows();
      Eigen::Index r = 0;
      for (Eigen::Index k = 0; k < src.rows() && r < sub.rows(); ++k)
        if (src.row(k) == sub.row(r)) ++r;
      CHECK(r == sub.rows());
    }
    CHECK(unequal);
  }

  TEST_CASE("seed walks are z-scored and outliers have the configured magnitude") {
    Rng rng(3);
    const auto w = random_walk(40, 3, 1.0, rng);
    CHECK(w.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 0; k < 3; ++k) CHECK(w.col(k).squaredNorm() / 40.0 == doctest::Approx(1.0));
    const auto o = add_outliers(w, 1.0, 5.0, rng);
    for (Eigen::Index i = 0; i < 40; ++i) CHECK((o.row(i) - w.row(i)).norm() == doctest::Approx(5.0));
  }

  TEST_CASE("spec validation and noise names") {
    SynthSpec spec;
    spec.outlier_rate = 1.5;
    CHECK_THROWS_AS(generate(spec), ContractError);
    spec = SynthSpec{};
    spec.keep_fraction = 0.0;
    CHECK_THROWS_AS(generate(spec), ContractError);
    CHECK(parse_noise_kind("hybrid_gaussian_outliers") == NoiseKind::hybrid_gaussian_outliers);
    CHECK(to_string(NoiseKind::resample) == "resample");
    CHECK_THROWS_AS(parse_noise_kind("pink"), ContractError);
  }
}
