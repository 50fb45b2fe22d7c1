#include <doctest.h>

#include <cmath>

#include "fepl/error.hpp"
#include "fepl/genmodel.hpp"
#include "test_util.hpp"

using namespace fepl;

namespace {

// Central difference of forward() along one input axis.
Jacobian fd_jacobian(const GenModel& m, const NormPose& x, double h) {
  Jacobian fd(m.output_dim(), 2);
  for (int j = 0; j < 2; ++j) {
    NormPose p = x, q = x;
    (j == 0 ? p.u : p.v) += h;
    (j == 0 ? q.u : q.v) -= h;
    const NormScan fp = m.forward(p), fq = m.forward(q);
    for (int i = 0; i < m.output_dim(); ++i) fd(i, j) = (fp.values[i] - fq.values[i]) / (2 * h);
  }
  return fd;
}

bool jacobian_close(const Jacobian& a, const Jacobian& b) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double ref = std::abs(a(i, j));
      const double diff = std::abs(a(i, j) - b(i, j));
      if (ref < 1e-3 ? diff >= 1e-7 : diff / ref >= 1e-4) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("default architecture shape and parameter count") {
  const Architecture arch = default_architecture();
  CHECK_NOTHROW(arch.validate());
  CHECK(arch.output_length == 622);
  CHECK(arch.reshape_length == 40);
  CHECK(arch.conv_output_length() == 660);
  CHECK(arch.crop_offset() == 19);
  CHECK(arch.parameter_count() == 192289);  // tests/oracles/frozen.txt
  CHECK(test::small_arch().parameter_count() == 689);
}

TEST_CASE("init_model output size and zero biases") {
  const Architecture arch = default_architecture();
  Rng rng(1);
  const GenModel m = init_model(arch, rng);
  CHECK(m.output_dim() == 622);
  CHECK(m.parameters().size() == 192289);
  CHECK(m.forward({0.1, -0.2}).values.size() == 622);

  // biases sit after each layer's weight block
  std::size_t off = 0;
  auto check_block = [&](const LayerSpec& l, std::size_t weights) {
    off += weights;
    for (int k = 0; k < l.out; ++k) CHECK(m.parameters()[off + k] == 0.0);
    off += static_cast<std::size_t>(l.out);
  };
  for (const LayerSpec& l : arch.dense) check_block(l, static_cast<std::size_t>(l.in) * l.out);
  for (const LayerSpec& l : arch.conv) check_block(l, static_cast<std::size_t>(l.in) * l.out * l.kernel);
  CHECK(off == m.parameters().size());
}

TEST_CASE("GenModel rejects a parameter vector of the wrong size") {
  const Architecture arch = test::small_arch();
  CHECK_THROWS_AS(GenModel(arch, std::vector<double>(10, 0.0)), ValidationError);
}

TEST_CASE("architecture validation catches broken chains") {
  Architecture arch = test::small_arch();
  arch.conv[1].in = 3;
  CHECK_THROWS_AS(arch.validate(), ValidationError);
  arch = test::small_arch();
  arch.output_length = 1000;
  CHECK_THROWS_AS(arch.validate(), ValidationError);
}

TEST_CASE("forward is pure and zero parameters give zero output") {
  const GenModel m = test::random_model(test::small_arch(), 4);
  const NormScan a = m.forward({0.3, 0.4});
  const NormScan b = m.forward({0.3, 0.4});
  CHECK(a.values == b.values);

  const GenModel z = GenModel::zeros(default_architecture());
  for (double v : z.forward({0.5, -0.5}).values) CHECK(v == 0.0);
  const Jacobian j = z.jacobian({0.5, -0.5});
  CHECK(j.rows() == 622);
  CHECK(j.cols() == 2);
  CHECK(j.isZero(0.0));
}

TEST_CASE("jacobian matches central finite differences") {
  const GenModel m = test::random_model(test::small_arch(), 9);
  Rng rng(21);
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    const NormPose x = test::random_pose(rng);
    if (jacobian_close(m.jacobian(x), fd_jacobian(m, x, 1e-5))) ++ok;
  }
  CHECK(ok == 100);
}

TEST_CASE("evaluate and forward_batch agree with forward and jacobian") {
  const GenModel m = test::random_model(test::small_arch(), 2);
  Rng rng(8);
  std::vector<NormPose> xs;
  for (int i = 0; i < 7; ++i) xs.push_back(test::random_pose(rng));
  const Eigen::MatrixXd batch = m.forward_batch(xs);
  REQUIRE(batch.rows() == 32);
  REQUIRE(batch.cols() == 7);
  for (int c = 0; c < 7; ++c) {
    const NormScan f = m.forward(xs[c]);
    const GenModel::Evaluation ev = m.evaluate(xs[c]);
    const Jacobian j = m.jacobian(xs[c]);
    for (int i = 0; i < 32; ++i) {
      CHECK(batch(i, c) == doctest::Approx(f.values[i]).epsilon(1e-12));
      CHECK(ev.prediction[i] == doctest::Approx(f.values[i]).epsilon(1e-12));
    }
    CHECK((ev.jacobian - j).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("L1 parameter gradient matches finite differences") {
  GenModel m = test::random_model(test::small_arch(), 5);
  const NormPose x{0.2, -0.35};
  std::vector<double> target(32);
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& t : target) t = u(rng);

  auto loss = [&](const GenModel& g) {
    const NormScan p = g.forward(x);
    double s = 0.0;
    for (int i = 0; i < 32; ++i) s += std::abs(p.values[i] - target[i]);
    return s;
  };

  std::vector<double> grad(m.parameters().size(), 0.0);
  auto ws = m.make_workspace();
  const double l = m.accumulate_l1_gradient(x, target, 1.0, grad, *ws);
  CHECK(l == doctest::Approx(loss(m)).epsilon(1e-12));

  const double h = 1e-6;
  int checked = 0, bad = 0;
  for (std::size_t k = 0; k < grad.size(); k += 7) {
    const double orig = m.mutable_parameters()[k];
    m.mutable_parameters()[k] = orig + h;
    const double lp = loss(m);
    m.mutable_parameters()[k] = orig - h;
    const double lm = loss(m);
    m.mutable_parameters()[k] = orig;
    const double fd = (lp - lm) / (2 * h);
    ++checked;
    if (std::abs(fd - grad[k]) > 1e-5 * std::max(1.0, std::abs(fd))) ++bad;
  }
  CHECK(checked > 90);
  CHECK(bad <= 1);  // a residual sign flip inside the stencil spoils at most a stray entry

  // the batched overload accumulates the same gradient
  std::vector<double> grad2(grad.size(), 0.0);
  Eigen::MatrixXd targets(32, 2);
  for (int i = 0; i < 32; ++i) targets(i, 0) = targets(i, 1) = target[i];
  const std::vector<NormPose> xs{x, x};
  const double l2 = m.accumulate_l1_gradient(xs, targets, 0.5, grad2, *ws);
  CHECK(l2 == doctest::Approx(2 * l).epsilon(1e-12));
  for (std::size_t k = 0; k < grad.size(); ++k) CHECK(grad2[k] == doctest::Approx(grad[k]).epsilon(1e-10));
}
