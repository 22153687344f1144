#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "test_support.hpp"
#include "vlmp/data.hpp"
#include "vlmp/error.hpp"
#include "vlmp/tpgmm.hpp"

using namespace vlmp;
using namespace vlmp::test;

namespace {

struct Fixture {
  std::vector<PoseTrajectory> demos;
  std::vector<TaskParameters> frames;
  TaskParameters mean_frames;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture s;
    for (auto& d : synth::gshape_demos(6, 7)) s.demos.push_back(normalize_time(d));
    s.mean_frames = mean_endpoint_frames(s.demos);
    s.frames.assign(s.demos.size(), s.mean_frames);
    return s;
  }();
  return f;
}

Mat stacked(const std::vector<PoseTrajectory>& demos) {
  std::size_t n = 0;
  for (const auto& d : demos) n += d.size();
  const int dim = demos.front().dim();
  Mat data(dim + 1, static_cast<Eigen::Index>(n));
  Eigen::Index c = 0;
  for (const auto& d : demos) {
    for (std::size_t i = 0; i < d.size(); ++i, ++c) {
      data(0, c) = d.times[i];
      data.block(1, c, dim, 1) = d.poses[i].position;
    }
  }
  return data;
}

}  // namespace

TEST_CASE("one identity frame is a plain GMM") {
  const auto& f = fixture();
  const TaskParameters identity{{TaskFrame::identity(2)}};
  const std::vector<TaskParameters> frames(f.demos.size(), identity);
  TpGmmOptions opt;
  opt.num_components = 5;
  opt.seed = 3;
  const TpGmmModel tp = tpgmm_learn(f.demos, frames, opt);

  GmmFitOptions gopt;
  gopt.num_components = opt.num_components;
  gopt.seed = opt.seed;
  gopt.cov_floor = opt.cov_floor;
  const GmmFit plain = gmm_fit(stacked(f.demos), gopt);

  for (int k = 0; k < opt.num_components; ++k) {
    CHECK(std::abs(tp.priors[k] - plain.model.priors[k]) < 1e-10);
    CHECK((tp.means[0][k] - plain.model.means[k]).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((tp.covs[0][k] - plain.model.covs[k]).cwiseAbs().maxCoeff() < 1e-10);
  }

  const auto times = linspace(0.0, 1.0, 80);
  const auto gen = tpgmm_generalize(tp, identity, times);
  const auto ref = gmr_regress(plain.model, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK((gen.position[i].mean() - ref.states[i].mean()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((gen.position[i].cov() - ref.states[i].cov()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("priors are shared and covariances PSD in every frame") {
  const auto& f = fixture();
  const TpGmmModel tp = tpgmm_learn(f.demos, f.frames, TpGmmOptions{});
  CHECK(tp.num_frames() == 2);
  double psum = 0.0;
  for (double p : tp.priors) psum += p;
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& frame : tp.covs) {
    CHECK(frame.size() == tp.priors.size());
    for (const auto& c : frame) {
      Eigen::SelfAdjointEigenSolver<Mat> es(c);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("log-likelihood is monotone") {
  const auto& f = fixture();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TpGmmOptions opt;
    opt.seed = seed;
    opt.num_components = 3 + static_cast<int>(seed % 4);
    const TpGmmModel tp = tpgmm_learn(f.demos, f.frames, opt);
    for (std::size_t i = 1; i < tp.log_likelihood.size(); ++i) {
      CHECK(tp.log_likelihood[i] >= tp.log_likelihood[i - 1] - 1e-9);
    }
  }
}

TEST_CASE("demo frames reproduce the mean demo") {
  const auto& f = fixture();
  const TpGmmModel tp = tpgmm_learn(f.demos, f.frames, TpGmmOptions{});
  const auto gen = tpgmm_generalize(tp, f.mean_frames, linspace(0.0, 1.0, 200));
  PoseTrajectory mean = f.demos.front();
  for (std::size_t i = 0; i < mean.size(); ++i) {
    Vec p = Vec::Zero(2);
    for (const auto& d : f.demos) p += d.poses[i].position;
    mean.poses[i].position = p / static_cast<double>(f.demos.size());
  }
  CHECK(relative_arc_rmse(gen.executed, mean) <= 0.05);
}

TEST_CASE("generalization is equivariant under a common rigid motion") {
  const auto& f = fixture();
  const TpGmmModel tp = tpgmm_learn(f.demos, f.frames, TpGmmOptions{});
  Rng rng(5);
  const auto times = linspace(0.0, 1.0, 100);
  for (int trial = 0; trial < 5; ++trial) {
    const TaskFrame motion = random_rigid_frame(rng, 2, 10.0);
    TaskParameters moved = f.mean_frames;
    for (auto& fr : moved.frames) fr = frame_compose(motion, fr);
    const auto a = tpgmm_generalize(tp, f.mean_frames, times);
    const auto b = tpgmm_generalize(tp, moved, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Vec expected = motion.A * a.executed.poses[i].position + motion.b;
      CHECK((b.executed.poses[i].position - expected).norm() < 1e-9);
    }
  }
}

TEST_CASE("learning is deterministic and checks frame counts") {
  const auto& f = fixture();
  const TpGmmModel a = tpgmm_learn(f.demos, f.frames, TpGmmOptions{});
  const TpGmmModel b = tpgmm_learn(f.demos, f.frames, TpGmmOptions{});
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK(a.means == b.means);
  const TaskParameters one{{TaskFrame::identity(2)}};
  CHECK_THROWS_AS(tpgmm_generalize(a, one, {0.0, 1.0}), Error);
}
