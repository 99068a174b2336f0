#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sampler.hpp"
#include "test_util.hpp"

using namespace bbr;
using testutil::ingest_text;

namespace {

StudyDataset synthetic_study(int n_examiners, int n_items, std::uint64_t seed) {
  SimulationSpec spec;
  Rng rng(seed);
  for (int i = 0; i < n_examiners; ++i) {
    spec.examiner_ids.push_back("E" + std::to_string(i));
    spec.theta.push_back(rng.skew_normal(1.5, 2.0));
  }
  for (int j = 0; j < n_items; ++j) {
    spec.item_ids.push_back("I" + std::to_string(j));
    spec.item_truth.push_back(GroundTruth::SameSource);
    spec.zeta.push_back(rng.normal(0.0, 1.0));
  }
  return simulate_responses(spec, seed + 1);
}

SamplerConfig quick_config(int chains, int iterations, int warmup, std::uint64_t seed) {
  SamplerConfig sc;
  sc.chains = chains;
  sc.iterations = iterations;
  sc.warmup = warmup;
  sc.seed = seed;
  sc.threads = 1;
  sc.progress = false;
  return sc;
}

}  // namespace

TEST_CASE("adaptive steps move toward the target acceptance") {
  AdaptiveStep step(1.0, 0.44, 1e-3, 50.0);
  for (int k = 0; k < 500; ++k) step.update(0.05, true);  // rejecting: shrink
  CHECK(step.step() < 1.0);
  AdaptiveStep grow(1.0, 0.44, 1e-3, 50.0);
  for (int k = 0; k < 500; ++k) grow.update(0.95, true);  // accepting: grow
  CHECK(grow.step() > 1.0);
  AdaptiveStep frozen(1.0, 0.44, 1e-3, 50.0);
  for (int k = 0; k < 500; ++k) frozen.update(0.0, false);
  CHECK(frozen.step() == 1.0);
}

TEST_CASE("toy bivariate normal target: moments match within Monte Carlo error") {
  // correlated 2d normal sampled with the same per-coordinate machinery the
  // model kernel uses
  const double rho = 0.5;
  auto logp = [&](double x, double y) {
    return -(x * x - 2.0 * rho * x * y + y * y) / (2.0 * (1.0 - rho * rho));
  };
  Rng rng(2024);
  double x = 3.0, y = -3.0;  // over-dispersed start
  AdaptiveStep sx(1.0, 0.44, 1e-3, 50.0), sy(1.0, 0.44, 1e-3, 50.0);
  const int warmup = 2000, iters = 42000;
  std::vector<double> xs, ys, xy;
  for (int it = 0; it < iters; ++it) {
    const bool adapting = it < warmup;
    {
      const double prop = x + sx.step() * rng.normal();
      const double delta = logp(prop, y) - logp(x, y);
      sx.update(std::min(1.0, std::exp(std::min(delta, 0.0))), adapting);
      if (mh_accept(rng, delta)) x = prop;
    }
    {
      const double prop = y + sy.step() * rng.normal();
      const double delta = logp(x, prop) - logp(x, y);
      sy.update(std::min(1.0, std::exp(std::min(delta, 0.0))), adapting);
      if (mh_accept(rng, delta)) y = prop;
    }
    if (it >= warmup) {
      xs.push_back(x);
      ys.push_back(y);
      xy.push_back(x * y);
    }
  }
  // effective sample sizes give the Monte Carlo standard errors
  const double ess_x = ess_bulk_of({xs});
  const double ess_xy = ess_bulk_of({xy});
  const double mean_x = oracles::sample_mean(xs);
  const double var_x = oracles::sample_variance(xs);
  const double mean_xy = oracles::sample_mean(xy);
  CHECK(std::fabs(mean_x - 0.0) < 3.0 * std::sqrt(var_x / ess_x));
  // var of x^2 draws approximates var of the variance estimate
  std::vector<double> x2(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) x2[i] = xs[i] * xs[i];
  const double se_var = std::sqrt(oracles::sample_variance(x2) / ess_bulk_of({x2}));
  CHECK(std::fabs(var_x - 1.0) < 3.0 * se_var);
  const double se_xy = std::sqrt(oracles::sample_variance(xy) / ess_xy);
  CHECK(std::fabs(mean_xy - rho) < 3.0 * se_xy);
}

TEST_CASE("fit is bit-identical for a fixed seed") {
  const auto ds = synthetic_study(6, 6, 11);
  ModelConfig mc;
  const auto sc = quick_config(2, 120, 60, 31);
  const auto a = fit(ds, mc, sc);
  const auto b = fit(ds, mc, sc);
  REQUIRE(a.data.size() == b.data.size());
  CHECK(a.data == b.data);
  CHECK(a.parameter_names == b.parameter_names);
}

TEST_CASE("thread count does not change the draws") {
  const auto ds = synthetic_study(5, 5, 37);
  ModelConfig mc;
  auto sc = quick_config(3, 100, 50, 41);
  const auto serial = fit(ds, mc, sc);
  sc.threads = 3;
  const auto parallel = fit(ds, mc, sc);
  CHECK(serial.data == parallel.data);
}

TEST_CASE("bookkeeping: warmup + 1 iterations keeps exactly one draw") {
  const auto ds = synthetic_study(4, 4, 13);
  ModelConfig mc;
  const auto draws = fit(ds, mc, quick_config(1, 51, 50, 5));
  CHECK(draws.n_chains == 1);
  CHECK(draws.retained == 1);
  CHECK(draws.data.size() == draws.n_parameters());
  CHECK(draws.parameter_names.size() == 4 + 4 + 3);
  CHECK(draws.parameter_names.front() == "theta[E0]");
  CHECK(draws.parameter_names.back() == "alpha");
}

TEST_CASE("constrained draws stay positive") {
  const auto ds = synthetic_study(5, 5, 17);
  ModelConfig mc;
  const auto draws = fit(ds, mc, quick_config(2, 200, 100, 7));
  const auto sigma = draws.pooled(draws.sigma_zeta_index());
  const auto omega = draws.pooled(draws.omega_index());
  for (double v : sigma) CHECK(v > 0.0);
  for (double v : omega) CHECK(v > 0.0);
  // unconstrained view is the log
  CHECK(draws.unconstrained_value(0, 0, draws.sigma_zeta_index()) ==
        doctest::Approx(std::log(draws.value(0, 0, draws.sigma_zeta_index()))));
}

TEST_CASE("longer runs prefix-extend the draw sequence") {
  const auto ds = synthetic_study(5, 4, 19);
  ModelConfig mc;
  const auto short_run = fit(ds, mc, quick_config(1, 120, 60, 77));
  const auto long_run = fit(ds, mc, quick_config(1, 200, 60, 77));
  REQUIRE(long_run.retained >= short_run.retained);
  const std::size_t n = short_run.retained * short_run.n_parameters();
  for (std::size_t k = 0; k < n; ++k) CHECK(short_run.data[k] == long_run.data[k]);
}

TEST_CASE("fit validates its inputs") {
  const auto ds = synthetic_study(4, 4, 23);
  ModelConfig mc;
  auto sc = quick_config(1, 10, 20, 1);  // warmup >= iterations
  CHECK_THROWS_AS(fit(ds, mc, sc), Error);

  StudyDataset one;
  one.responses.push_back(Response{"E", "I", GroundTruth::SameSource, "x",
                                   Conclusion::Identification, {}, {}, 0});
  one.examiners = {"E"};
  one.items = {"I"};
  one.item_truth.emplace("I", GroundTruth::SameSource);
  CHECK_THROWS_AS(fit(one, mc, quick_config(1, 10, 5, 1)), Error);
}

namespace {

PosteriorDraws iid_normal_draws(std::size_t chains, std::size_t retained,
                                std::uint64_t seed) {
  PosteriorDraws draws;
  draws.parameter_names = {"x"};
  draws.n_chains = chains;
  draws.retained = retained;
  draws.model_config.center_items = false;
  Rng rng(seed);
  draws.data.resize(chains * retained);
  for (auto& v : draws.data) v = rng.normal();
  return draws;
}

}  // namespace

TEST_CASE("split R-hat is near one for iid chains") {
  const auto draws = iid_normal_draws(4, 2500, 4);
  const auto diags = diagnostics(draws);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].split_rhat > 0.99);
  CHECK(diags[0].split_rhat < 1.01);
}

TEST_CASE("split R-hat diverges for constant distinct chains") {
  PosteriorDraws draws;
  draws.parameter_names = {"x"};
  draws.n_chains = 2;
  draws.retained = 100;
  draws.model_config.center_items = false;
  draws.data.assign(200, 0.0);
  for (std::size_t k = 100; k < 200; ++k) draws.data[k] = 5.0;
  const auto diags = diagnostics(draws);
  CHECK(std::isinf(diags[0].split_rhat));
}

TEST_CASE("identical constant chains give R-hat one") {
  std::vector<std::vector<double>> chains{std::vector<double>(50, 2.0),
                                          std::vector<double>(50, 2.0)};
  CHECK(split_rhat_of(chains) == 1.0);
}

TEST_CASE("ESS of iid draws is close to the draw count") {
  const auto draws = iid_normal_draws(4, 2500, 9);
  const auto diags = diagnostics(draws);
  CHECK(diags[0].ess_bulk > 0.8 * 10000);
  CHECK(diags[0].ess_bulk <= 10000);
}

TEST_CASE("ESS drops for strongly autocorrelated chains") {
  PosteriorDraws draws;
  draws.parameter_names = {"x"};
  draws.n_chains = 2;
  draws.retained = 2000;
  draws.model_config.center_items = false;
  Rng rng(12);
  draws.data.resize(4000);
  for (std::size_t c = 0; c < 2; ++c) {
    double x = 0.0;
    for (std::size_t it = 0; it < 2000; ++it) {
      x = 0.95 * x + rng.normal() * std::sqrt(1 - 0.95 * 0.95);  // AR(1)
      draws.data[c * 2000 + it] = x;
    }
  }
  const auto diags = diagnostics(draws);
  CHECK(diags[0].ess_bulk < 1000);  // iid would be 4000
}

TEST_CASE("summaries of a constant parameter are degenerate") {
  PosteriorDraws draws;
  draws.parameter_names = {"x"};
  draws.n_chains = 1;
  draws.retained = 50;
  draws.model_config.center_items = false;
  draws.data.assign(50, 3.25);
  const auto s = summarize(draws, 0.95);
  REQUIRE(s.size() == 1);
  CHECK(s[0].mean == 3.25);
  CHECK(s[0].sd == 0.0);
  CHECK(s[0].lower == 3.25);
  CHECK(s[0].upper == 3.25);
}

TEST_CASE("uniform draws give the expected interval") {
  PosteriorDraws draws;
  draws.parameter_names = {"u"};
  draws.n_chains = 1;
  draws.retained = 100000;
  draws.model_config.center_items = false;
  Rng rng(8);
  draws.data.resize(draws.retained);
  for (auto& v : draws.data) v = rng.uniform01();
  const auto s = summarize(draws, 0.95);
  CHECK(s[0].lower == doctest::Approx(0.025).epsilon(0.15));
  CHECK(s[0].upper == doctest::Approx(0.975).epsilon(0.01));
  CHECK(s[0].mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("pooled quantiles ignore chain order") {
  auto draws = iid_normal_draws(3, 500, 21);
  const auto s1 = summarize(draws, 0.9);
  // rotate the chains
  std::vector<double> rotated(draws.data.size());
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t it = 0; it < 500; ++it)
      rotated[((c + 1) % 3) * 500 + it] = draws.data[c * 500 + it];
  draws.data = rotated;
  const auto s2 = summarize(draws, 0.9);
  CHECK(s1[0].lower == doctest::Approx(s2[0].lower).epsilon(1e-12));
  CHECK(s1[0].upper == doctest::Approx(s2[0].upper).epsilon(1e-12));
  CHECK(s1[0].mean == doctest::Approx(s2[0].mean).epsilon(1e-12));
}

TEST_CASE("item centering moves the zeta mean into theta summaries") {
  // two parameters theta[a], zeta[b] with constant draws
  PosteriorDraws draws;
  draws.parameter_names = {"theta[a]", "zeta[b]", "sigma_zeta", "omega", "alpha"};
  draws.examiner_ids = {"a"};
  draws.item_ids = {"b"};
  draws.n_chains = 1;
  draws.retained = 10;
  draws.model_config.center_items = true;
  draws.data.resize(10 * 5);
  for (std::size_t it = 0; it < 10; ++it) {
    draws.data[it * 5 + 0] = 1.0;  // theta
    draws.data[it * 5 + 1] = 0.5;  // zeta
    draws.data[it * 5 + 2] = 1.0;
    draws.data[it * 5 + 3] = 1.0;
    draws.data[it * 5 + 4] = 0.0;
  }
  const auto s = summarize(draws, 0.95);
  CHECK(s[0].mean == doctest::Approx(1.5));  // theta + mean(zeta)
  CHECK(s[1].mean == doctest::Approx(0.0));  // centered zeta
  CHECK(s[2].mean == doctest::Approx(1.0));  // hypers untouched
}

TEST_CASE("draws persist losslessly through CSV and the binary cache") {
  const auto ds = synthetic_study(4, 5, 29);
  ModelConfig mc;
  const auto draws = fit(ds, mc, quick_config(2, 60, 30, 3));

  const auto dir = std::filesystem::temp_directory_path() / "bbr_sampler_test";
  std::filesystem::create_directories(dir);
  const auto csv_path = (dir / "draws.csv").string();
  const auto bin_path = (dir / "draws.bin").string();

  save_draws_csv(draws, csv_path);
  const auto from_csv = load_draws_csv(csv_path);
  CHECK(from_csv.parameter_names == draws.parameter_names);
  CHECK(from_csv.n_chains == draws.n_chains);
  CHECK(from_csv.retained == draws.retained);
  REQUIRE(from_csv.data.size() == draws.data.size());
  CHECK(from_csv.data == draws.data);
  CHECK(from_csv.examiner_ids == draws.examiner_ids);

  save_draws_cache(draws, bin_path);
  const auto from_bin = load_draws_cache(bin_path);
  CHECK(from_bin.parameter_names == draws.parameter_names);
  CHECK(from_bin.data == draws.data);
  CHECK(from_bin.model_config.center_items == draws.model_config.center_items);

  // byte-identical second write
  save_draws_csv(draws, csv_path + ".2");
  std::ifstream a(csv_path, std::ios::binary), b(csv_path + ".2", std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  std::filesystem::remove_all(dir);
}

TEST_CASE("small recovery smoke: posterior means track the truth") {
  // 12 examiners x 20 items keeps this fast; the full-size recovery is in
  // the acceptance suite
  SimulationSpec spec;
  Rng rng(101);
  for (int i = 0; i < 12; ++i) {
    spec.examiner_ids.push_back("E" + std::to_string(i));
    spec.theta.push_back(rng.skew_normal(2.0, 3.0));
  }
  for (int j = 0; j < 20; ++j) {
    spec.item_ids.push_back("I" + std::to_string(j));
    spec.item_truth.push_back(GroundTruth::SameSource);
    spec.zeta.push_back(rng.normal(0.0, 1.5));
  }
  const auto ds = simulate_responses(spec, 555);
  ModelConfig mc;
  const auto draws = fit(ds, mc, quick_config(2, 1500, 750, 909));
  const auto summaries = summarize(draws, 0.95);

  // center the generating truth the same way the summaries are centered
  double zbar = 0.0;
  for (double z : spec.zeta) zbar += z;
  zbar /= static_cast<double>(spec.zeta.size());

  double num = 0.0, den_a = 0.0, den_b = 0.0;
  double mean_est = 0.0, mean_true = 0.0;
  for (std::size_t i = 0; i < spec.theta.size(); ++i) {
    mean_est += summaries[i].mean;
    mean_true += spec.theta[i] + zbar;
  }
  mean_est /= 12.0;
  mean_true /= 12.0;
  for (std::size_t i = 0; i < spec.theta.size(); ++i) {
    const double a = summaries[i].mean - mean_est;
    const double b = spec.theta[i] + zbar - mean_true;
    num += a * b;
    den_a += a * a;
    den_b += b * b;
  }
  const double correlation = num / std::sqrt(den_a * den_b);
  CHECK(correlation > 0.7);
}
