#include <doctest.h>

#include "adle/error.hpp"
#include "adle/network.hpp"

using namespace adle;

namespace {

bool is_valid_laplacian(const Matrix& l) {
  if ((l - l.transpose()).norm() > 1e-12) return false;
  if ((l * Vector::Ones(l.rows())).norm() > 1e-12) return false;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
      if (i != j && l(i, j) > 0) return false;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
  return eig.eigenvalues().minCoeff() > -1e-10;
}

}  // namespace

TEST_CASE("graph construction") {
  Graph g(4, {{2, 1}, {0, 3}});
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0] == Edge{0, 3});
  CHECK(g.edges()[1] == Edge{1, 2});
  CHECK(g.max_degree() == 1);
  CHECK_THROWS_AS(Graph(3, {{1, 1}}), InvalidGraph);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), InvalidGraph);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), InvalidGraph);

  const auto ex = Graph::example1();
  CHECK(ex.edges().size() == 6);
  CHECK(ex.max_degree() == 3);
}

TEST_CASE("dense laplacian") {
  CHECK(laplacian_of(Graph(3, {})).dense().isZero());
  Matrix expected{{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
  CHECK((laplacian_of(Graph::path(3)).dense() - expected).norm() == 0.0);
}

TEST_CASE("fiedler value") {
  CHECK(fiedler_value(laplacian_of(Graph::complete(5))) == doctest::Approx(5.0));
  CHECK(fiedler_value(laplacian_of(Graph(4, {{0, 1}, {2, 3}}))) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fiedler_value(laplacian_of(Graph::path(3))) == doctest::Approx(1.0));
  // Cycle: 2 - 2 cos(2 pi / N).
  CHECK(fiedler_value(laplacian_of(Graph::cycle(6))) == doctest::Approx(2.0 - 2.0 * std::cos(2 * M_PI / 6)));
  CHECK(fiedler_value(Matrix::Zero(1, 1)) == 0.0);
}

TEST_CASE("mean laplacian") {
  const auto tri = Graph::complete(3);
  const Matrix full = laplacian_of(tri).dense();
  CHECK((mean_laplacian(TopologyModel(tri, StaticLinks{})) - full).norm() < 1e-15);
  CHECK((mean_laplacian(TopologyModel(tri, BernoulliLinks{1.0})) - full).norm() < 1e-15);
  CHECK((mean_laplacian(TopologyModel(tri, BernoulliLinks{0.5})) - 0.5 * full).norm() < 1e-15);
  CHECK((mean_laplacian(TopologyModel(tri, GossipLinks{})) - full / 3.0).norm() < 1e-15);

  SUBCASE("gossip mean matches sample average") {
    TopologyModel topo(tri, GossipLinks{});
    Rng rng(1);
    Matrix avg = Matrix::Zero(3, 3);
    const int count = 100'000;
    for (int i = 0; i < count; ++i) avg += sample_laplacian(topo, rng).dense();
    avg /= count;
    CHECK((avg - mean_laplacian(topo)).cwiseAbs().maxCoeff() < 0.01);
  }
}

TEST_CASE("mean connectivity") {
  CHECK(validate_mean_connectivity(TopologyModel(Graph::example1(), BernoulliLinks{0.5})) ==
        doctest::Approx(0.690983).epsilon(1e-5));
  CHECK(validate_mean_connectivity(TopologyModel(Graph::path(3), BernoulliLinks{0.5})) == doctest::Approx(0.5));
  CHECK(validate_mean_connectivity(TopologyModel(Graph::example1(), GossipLinks{})) > 0.0);
  try {
    validate_mean_connectivity(TopologyModel(Graph(4, {{0, 1}, {2, 3}}), BernoulliLinks{0.9}));
    FAIL("expected NotMeanConnected");
  } catch (const NotMeanConnected& e) {
    CHECK(e.lambda2() < 1e-10);
  }
}

TEST_CASE("topology model validation") {
  CHECK_THROWS_AS(TopologyModel(Graph::path(3), BernoulliLinks{0.0}), InvalidGraph);
  CHECK_THROWS_AS(TopologyModel(Graph::path(3), BernoulliLinks{1.5}), InvalidGraph);
  CHECK_THROWS_AS(TopologyModel(Graph(3, {}), GossipLinks{}), InvalidGraph);
}

TEST_CASE("link sampling statistics") {
  const auto g = Graph::example1();
  SUBCASE("bernoulli edge frequency") {
    TopologyModel topo(g, BernoulliLinks{0.3});
    Rng rng(2);
    std::vector<int> hits(g.edges().size(), 0);
    const int count = 20'000;
    for (int i = 0; i < count; ++i) {
      const auto lap = topo.sample(rng);
      for (const auto& e : lap.edges()) {
        auto it = std::find(g.edges().begin(), g.edges().end(), e);
        REQUIRE(it != g.edges().end());
        ++hits[it - g.edges().begin()];
      }
    }
    for (int h : hits) CHECK(std::abs(double(h) / count - 0.3) < 0.01);
  }
  SUBCASE("gossip activates exactly one edge and is never connected") {
    TopologyModel topo(g, GossipLinks{});
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      const auto lap = topo.sample(rng);
      CHECK(lap.edges().size() == 1);
      CHECK(fiedler_value(lap) < 1e-12);
    }
  }
  SUBCASE("static law draws no randomness") {
    TopologyModel topo(g, StaticLinks{});
    Rng rng(4), untouched(4);
    CHECK(topo.sample(rng).edges() == g.edges());
    CHECK(rng() == untouched());
  }
}

TEST_CASE("sampled laplacians are valid and lambda2 of the mean dominates the mean lambda2") {
  for (const LinkLaw& law : {LinkLaw{BernoulliLinks{0.5}}, LinkLaw{GossipLinks{}}}) {
    TopologyModel topo(Graph::example1(), law);
    Rng rng(9);
    double mean_l2 = 0.0;
    const int count = 10'000;
    for (int i = 0; i < count; ++i) {
      const Matrix l = topo.sample(rng).dense();
      CHECK(is_valid_laplacian(l));
      mean_l2 += fiedler_value(l);
    }
    mean_l2 /= count;
    // lambda2 is concave on Laplacians, so lambda2(E L) >= E lambda2(L).
    CHECK(fiedler_value(mean_laplacian(topo)) >= mean_l2 - 1e-12);
  }
}
