#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "framesift/error.hpp"
#include "framesift/pca.hpp"

using namespace framesift;

namespace {

Matrix gaussian(int n, int d, std::uint64_t seed, const std::vector<double>& scales = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = g(rng) * (scales.empty() ? 1.0 : scales[j]) + 0.5 * j;
  return x;
}

}  // namespace

TEST_CASE("planar data is reconstructed exactly") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd origin(5), u(5), v(5);
  origin << 1, -2, 0.5, 3, 0;
  u << 1, 2, 0, -1, 0.5;
  v << 0, 1, 1, 1, -2;
  Matrix x(40, 5);
  for (int i = 0; i < 40; ++i) x.row(i) = (origin + g(rng) * u + g(rng) * v).transpose();
  const auto model = fit_pca(x, 2);
  for (int i = 0; i < 40; ++i) {
    const Eigen::VectorXd row = x.row(i).transpose();
    CHECK((reconstruct(model, transform(model, row)) - row).norm() <= 1e-8);
  }
  CHECK_THROWS_AS(fit_pca(x, 3), ValidationError);
  try {
    fit_pca(x, 3);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("rank 2") != std::string::npos);
  }
}

TEST_CASE("full dimension is an isometry") {
  const Matrix x = gaussian(30, 6, 2);
  const auto model = fit_pca(x, 6);
  const Matrix z = transform(model, x);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) CHECK(std::abs((x.row(i) - x.row(j)).norm() - (z.row(i) - z.row(j)).norm()) <= 1e-8);
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(fit_pca(gaussian(3, 20, 1), 10), ValidationError);
  CHECK_THROWS_AS(fit_pca(gaussian(30, 4, 1), 5), ValidationError);
  CHECK_THROWS_AS(fit_pca(gaussian(30, 4, 1), 0), ValidationError);
  const auto model = fit_pca(gaussian(30, 4, 1), 2);
  CHECK_THROWS_AS(transform(model, Eigen::VectorXd(Eigen::VectorXd::Zero(5))), ValidationError);
  EmbeddingVector bad{{"s", 0, std::nullopt}, {1.0, 2.0}};
  CHECK_THROWS_AS(transform(model, bad), ValidationError);
}

TEST_CASE("model invariants") {
  const Matrix x = gaussian(80, 12, 3, {5, 4, 3, 2.5, 2, 1.5, 1.2, 1, 0.8, 0.5, 0.3, 0.1});
  const auto model = fit_pca(x, 10);
  CHECK(model.dims() == 10);
  CHECK(model.input_dim() == 12);
  const Matrix gram = model.components * model.components.transpose();
  CHECK((gram - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-6);
  for (int k = 1; k < 10; ++k) CHECK(model.explained_variance(k) <= model.explained_variance(k - 1));
  for (int k = 0; k < 10; ++k) {
    Eigen::Index arg;
    model.components.row(k).cwiseAbs().maxCoeff(&arg);
    CHECK(model.components(k, arg) > 0);
  }
  CHECK(transform(model, model.mean).cwiseAbs().maxCoeff() <= 1e-12);

  // Mean squared reconstruction error of the training data is bounded by the
  // variance left in the dropped components.
  const auto full = fit_pca(x, 12);
  const double tail = full.explained_variance(10) + full.explained_variance(11);
  double mse = 0;
  for (int i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd row = x.row(i).transpose();
    mse += (reconstruct(model, transform(model, row)) - row).squaredNorm();
  }
  mse /= static_cast<double>(x.rows());
  CHECK(mse <= tail + 1e-12);
}

TEST_CASE("deterministic and serializable") {
  const Matrix x = gaussian(50, 8, 4);
  const auto a = fit_pca(x, 3), b = fit_pca(x, 3);
  CHECK(a.components == b.components);
  CHECK(a.mean == b.mean);

  fixtures::TempDir dir;
  save_pca(a, dir / "m.bin");
  const auto loaded = load_pca(dir / "m.bin");
  CHECK(loaded.dims() == 3);
  CHECK(loaded.input_dim() == 8);
  CHECK((loaded.components - a.components).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((loaded.mean - a.mean).cwiseAbs().maxCoeff() <= 1e-5);
  CHECK((loaded.explained_variance - a.explained_variance).cwiseAbs().maxCoeff() <= 1e-5);
  CHECK(fixtures::read_text(dir / "m.bin").substr(0, 4) == "FSPC");
  save_pca(a, dir / "m2.bin");
  CHECK(fixtures::read_text(dir / "m2.bin") == fixtures::read_text(dir / "m.bin"));

  fixtures::write_text(dir / "junk.bin", "XXXX1234");
  CHECK_THROWS_AS(load_pca(dir / "junk.bin"), ParseError);
}

TEST_CASE("embedding inputs") {
  std::vector<EmbeddingVector> rows;
  const Matrix x = gaussian(20, 4, 5);
  for (int i = 0; i < 20; ++i)
    rows.push_back({{"s", i, std::nullopt}, std::vector<double>(x.row(i).data(), x.row(i).data() + 4)});
  const auto model = fit_pca(rows, 2);
  const auto z = transform(model, rows[3]);
  CHECK(z.frame == rows[3].frame);
  CHECK(z.dim() == 2);
  rows[5].values.push_back(1.0);
  CHECK_THROWS_AS(fit_pca(rows, 2), ValidationError);
}
