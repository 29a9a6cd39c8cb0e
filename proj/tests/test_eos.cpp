#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "prflow/diagnostics.hpp"
#include "prflow/eos.hpp"

using namespace prflow;
using eos::Composition;
using eos::EosModel;
using eos::MixtureSpec;

namespace {

// CH4 / nC10 literature constants used throughout the suite.
MixtureSpec ch4_nc10(double T, double k12 = 0.0, double beta12 = 0.5,
                     double lambda = 1.0) {
  MixtureSpec mix;
  mix.components = {
      {"CH4", 190.56, 4.599e6, 0.011, 0.016043, 1e-6},
      {"nC10", 617.7, 2.103e6, 0.489, 0.142285, 1e-6},
  };
  mix.k = Eigen::MatrixXd::Zero(2, 2);
  mix.k(0, 1) = mix.k(1, 0) = k12;
  mix.beta = Eigen::MatrixXd::Zero(2, 2);
  mix.beta(0, 1) = mix.beta(1, 0) = beta12;
  mix.lambda = lambda;
  mix.T = T;
  return mix;
}

// Draws feasible binary states spanning the simulated density ranges.
struct StateSampler {
  std::mt19937_64 rng{20240915ull};
  std::uniform_real_distribution<double> d1{2800.0, 9200.0};
  std::uniform_real_distribution<double> d2{20.0, 4600.0};

  Eigen::VectorXd operator()(const EosModel& model) {
    for (;;) {
      Eigen::VectorXd n(2);
      n << d1(rng), d2(rng);
      if (model.covolumes().dot(n) < 0.95 &&
          (model.covolumes().array() * n.array() < 0.95).all()) {
        return n;
      }
    }
  }
};

}  // namespace

TEST_CASE("parameter correlations reproduce hand-computed values") {
  const MixtureSpec mix = ch4_nc10(320.0);
  Composition comp(Eigen::Vector2d(7133.9, 26.5));
  const eos::EosParams p = eos::eos_params(mix, comp);

  CHECK(p.b_i[0] == doctest::Approx(2.6802920401525772e-05).epsilon(1e-12));
  CHECK(p.b_i[1] == doctest::Approx(0.00018999934802709612).epsilon(1e-12));
  CHECK(p.a_i[0] == doctest::Approx(0.19510250290920059).epsilon(1e-12));
  CHECK(p.a_i[1] == doctest::Approx(9.6659842208956182).epsilon(1e-12));
  CHECK(p.a == doctest::Approx(0.20392049976055551).epsilon(1e-12));
  CHECK(p.b == doctest::Approx(2.7406895784476115e-05).epsilon(1e-12));

  // omega = 0.489 stays on the low-omega branch; 0.6 switches.
  CHECK(p.m_i[1] == doctest::Approx(0.37464 + 1.54226 * 0.489 - 0.26992 * 0.489 * 0.489)
                        .epsilon(1e-14));
  MixtureSpec heavy = ch4_nc10(320.0);
  heavy.components[1].omega = 0.6;
  const eos::EosParams ph = eos::eos_params(heavy, comp);
  CHECK(ph.m_i[1] == doctest::Approx(1.2150675759999998).epsilon(1e-14));
}

TEST_CASE("mixing rules collapse for trivial mixtures") {
  MixtureSpec single;
  single.components = {{"CH4", 190.56, 4.599e6, 0.011, 0.016043, 1e-6}};
  single.k = Eigen::MatrixXd::Zero(1, 1);
  single.beta = Eigen::MatrixXd::Zero(1, 1);
  single.T = 320.0;
  const eos::EosParams ps =
      eos::eos_params(single, Composition(Eigen::VectorXd::Constant(1, 5000.0)));
  CHECK(ps.a == doctest::Approx(ps.a_i[0]).epsilon(1e-14));
  CHECK(ps.b == doctest::Approx(ps.b_i[0]).epsilon(1e-14));

  // two identical components at equal fractions behave like the pure fluid
  MixtureSpec twin = ch4_nc10(320.0);
  twin.components[1] = twin.components[0];
  twin.components[1].name = "CH4b";
  const eos::EosParams pt =
      eos::eos_params(twin, Composition(Eigen::Vector2d(2500.0, 2500.0)));
  CHECK(pt.a == doctest::Approx(pt.a_i[0]).epsilon(1e-14));
  CHECK(pt.b == doctest::Approx(pt.b_i[0]).epsilon(1e-14));
}

TEST_CASE("ideal-gas limits through the raw-parameter hook") {
  const EosModel ideal = EosModel::from_raw(Eigen::VectorXd::Zero(1),
                                            Eigen::VectorXd::Zero(1),
                                            Eigen::MatrixXd::Zero(1, 1), 300.0);
  Eigen::VectorXd n(1);
  n << 100.0;
  const eos::BulkEnergy e = ideal.bulk_energy(n);
  CHECK(e.ideal == doctest::Approx(899251.582287783).epsilon(1e-12));
  CHECK(e.repulsion == 0.0);
  CHECK(e.attraction == 0.0);
  CHECK(ideal.pressure(n) == doctest::Approx(249433.87854).epsilon(1e-12));
  CHECK(ideal.pressure_identity(n) == doctest::Approx(249433.87854).epsilon(1e-10));
  CHECK(ideal.chemical_potential(n)[0] ==
        doctest::Approx(eos::kGasConstant * 300.0 * std::log(100.0)).epsilon(1e-12));
}

TEST_CASE("bulk energy terms: signs and pinned regression value") {
  const MixtureSpec mix = ch4_nc10(320.0);
  const EosModel model(mix);

  const Eigen::Vector2d gas(7133.9, 26.5);
  const eos::BulkEnergy e = model.bulk_energy(gas);
  CHECK(e.ideal == doctest::Approx(149587906.69618341).epsilon(1e-10));
  CHECK(e.repulsion == doctest::Approx(4161915.8170793592).epsilon(1e-10));
  CHECK(e.attraction == doctest::Approx(-8902162.3449328598).epsilon(1e-10));
  CHECK(e.total() == doctest::Approx(144847660.16832992).epsilon(1e-10));

  StateSampler sample;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd n = sample(model);
    const eos::BulkEnergy r = model.bulk_energy(n);
    CHECK(r.repulsion >= 0.0);
    CHECK(r.attraction <= 0.0);
  }
}

TEST_CASE("bulk energy rejects covolume violations") {
  const MixtureSpec mix = ch4_nc10(320.0);
  const EosModel model(mix);
  Eigen::VectorXd n(2);
  n << 1000.0, 1.0 / 0.00018999934802709612;  // b2 n2 > 1
  CHECK_THROWS_AS(model.bulk_energy(n), std::domain_error);
  CHECK_THROWS_AS(model.energy_split(n), std::domain_error);
}

TEST_CASE("mixture validation catches bad inputs") {
  MixtureSpec mix = ch4_nc10(320.0);
  mix.T = -1.0;
  CHECK_THROWS_AS(mix.validate(), std::domain_error);
  mix = ch4_nc10(320.0);
  mix.components[0].P_c = 0.0;
  CHECK_THROWS_AS(mix.validate(), std::domain_error);
  mix = ch4_nc10(320.0);
  mix.k(0, 1) = 0.3;  // asymmetric
  CHECK_THROWS_AS(mix.validate(), std::invalid_argument);
  mix = ch4_nc10(320.0);
  mix.beta(0, 0) = 0.1;  // nonzero diagonal
  CHECK_THROWS_AS(mix.validate(), std::invalid_argument);

  // deeply subcritical evaluation with a large acentric factor drives the
  // pure influence parameter negative
  mix = ch4_nc10(3.0);
  mix.components[1].omega = 3.0;
  mix.components[1].T_c = 300.0;
  CHECK_THROWS_AS(EosModel{mix}, std::domain_error);
}

TEST_CASE("chemical potential matches central differences of f_bulk") {
  const EosModel model(ch4_nc10(320.0));
  StateSampler sample;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd n = sample(model);
    const Eigen::VectorXd mu = model.chemical_potential(n);
    const Eigen::VectorXd eps = 1e-6 * n;
    const Eigen::VectorXd fd = diag::fd_gradient(
        [&](const Eigen::VectorXd& x) { return model.bulk_energy(x).total(); }, n,
        eps);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(mu[i] - fd[i]) / std::abs(mu[i]) < 1e-6);
    }
  }
}

TEST_CASE("chemical potential respects permutation of identical components") {
  MixtureSpec twin = ch4_nc10(320.0);
  twin.components[1] = twin.components[0];
  twin.components[1].name = "CH4b";
  twin.beta.setZero();
  const EosModel model(twin);
  Eigen::VectorXd n(2), nswap(2);
  n << 4000.0, 1500.0;
  nswap << 1500.0, 4000.0;
  const Eigen::VectorXd mu = model.chemical_potential(n);
  const Eigen::VectorXd mus = model.chemical_potential(nswap);
  CHECK(mu[0] == doctest::Approx(mus[1]).epsilon(1e-14));
  CHECK(mu[1] == doctest::Approx(mus[0]).epsilon(1e-14));
  CHECK(model.pressure(n) == doctest::Approx(model.pressure(nswap)).epsilon(1e-14));

  CHECK(model.bulk_energy(n).total() ==
        doctest::Approx(model.bulk_energy(nswap).total()).epsilon(1e-14));
  const eos::EnergySplit sp = model.energy_split(n);
  const eos::EnergySplit sps = model.energy_split(nswap);
  CHECK(sp.convex == doctest::Approx(sps.convex).epsilon(1e-14));
  CHECK(sp.concave == doctest::Approx(sps.concave).epsilon(1e-14));
  const Eigen::MatrixXd H = model.convex_hessian(n);
  const Eigen::MatrixXd Hs = model.convex_hessian(nswap);
  CHECK(H(0, 0) == doctest::Approx(Hs(1, 1)).epsilon(1e-14));
  CHECK(H(0, 1) == doctest::Approx(Hs(1, 0)).epsilon(1e-14));
}

TEST_CASE("pressure: paper states and the general-pressure identity") {
  const MixtureSpec mix = ch4_nc10(320.0);
  const EosModel model(mix);

  const double p_gas = model.pressure(Eigen::Vector2d(7133.9, 26.5));
  const double p_liq = model.pressure(Eigen::Vector2d(3513.2, 3814.6));
  CHECK(std::abs(p_gas - 1.60e7) / 1.60e7 < 0.03);
  CHECK(std::abs(p_liq - 1.60e7) / 1.60e7 < 0.03);

  StateSampler sample;
  int checked = 0;
  while (checked < 100) {
    const Eigen::VectorXd n = sample(model);
    const double pe = model.pressure(n);
    if (std::abs(pe) < 1e4) continue;  // keep the relative test well-posed
    const double pi = model.pressure_identity(n);
    CHECK(std::abs(pi - pe) / std::abs(pe) < 1e-10);
    ++checked;
  }
}

TEST_CASE("convex-concave split reconstructs the bulk quantities") {
  const EosModel model(ch4_nc10(320.0));
  StateSampler sample;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd n = sample(model);
    const eos::EnergySplit s = model.energy_split(n);
    const double f = model.bulk_energy(n).total();
    CHECK(std::abs(s.convex + s.concave - f) / std::abs(f) < 1e-12);

    const eos::MuSplit ms = model.chemical_potential_split(n);
    const Eigen::VectorXd mu = model.chemical_potential(n);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(ms.convex[i] + ms.concave[i] - mu[i]) / std::abs(mu[i]) < 1e-10);
    }
  }
}

TEST_CASE("lambda = 0 degenerates to the plain ideal+repulsion / attraction split") {
  // lambda must stay positive per the contract, so approach zero instead.
  const EosModel model(ch4_nc10(320.0, 0.0, 0.5, 1e-300));
  const Eigen::Vector2d n(4000.0, 1200.0);
  const eos::BulkEnergy e = model.bulk_energy(n);
  const eos::EnergySplit s = model.energy_split(n);
  CHECK(s.convex == doctest::Approx(e.ideal + e.repulsion).epsilon(1e-12));
  CHECK(s.concave == doctest::Approx(e.attraction).epsilon(1e-12));
}

TEST_CASE("mu_convex matches central differences of f_convex") {
  const EosModel model(ch4_nc10(320.0));
  StateSampler sample;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd n = sample(model);
    const eos::MuSplit ms = model.chemical_potential_split(n);
    const Eigen::VectorXd eps = 1e-6 * n;
    const Eigen::VectorXd fd = diag::fd_gradient(
        [&](const Eigen::VectorXd& x) { return model.energy_split(x).convex; }, n,
        eps);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(ms.convex[i] - fd[i]) / std::abs(ms.convex[i]) < 1e-6);
    }
  }
}

TEST_CASE("auxiliary Hessian diagonal matches its closed form") {
  const EosModel model(ch4_nc10(320.0));
  const double RT = eos::kGasConstant * 320.0;
  const Eigen::Vector2d n(5000.0, 2000.0);
  const Eigen::VectorXd d = model.auxiliary_hessian_diag(n);
  const Eigen::VectorXd b = model.covolumes();
  for (int i = 0; i < 2; ++i) {
    const double g = 1.0 - b[i] * n[i];
    const double expected = RT / n[i] + RT * b[i] / g + RT * b[i] / (g * g);
    CHECK(std::abs(d[i] - expected) / expected < 1e-10);
  }
}

TEST_CASE("convex Hessian: symmetry, FD consistency and numerical convexity") {
  const EosModel model(ch4_nc10(320.0));
  StateSampler sample;

  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd n = sample(model);
    const Eigen::MatrixXd H = model.convex_hessian(n);
    CHECK(H(0, 1) == doctest::Approx(H(1, 0)).epsilon(1e-14));

    const Eigen::VectorXd eps = 1e-5 * n;
    const Eigen::MatrixXd fd = diag::fd_jacobian(
        [&](const Eigen::VectorXd& x) {
          return model.chemical_potential_split(x).convex;
        },
        n, eps);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(H(i, j) - fd(i, j)) / std::abs(H(i, j)) < 1e-5);
      }
    }
  }

  const double RT = eos::kGasConstant * 320.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd n = sample(model);
    const Eigen::MatrixXd H = model.convex_hessian(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    CHECK(es.eigenvalues().minCoeff() >= -1e-6 * RT / n.minCoeff());
  }
}

TEST_CASE("influence parameters: limits and pinned CH4/nC10 value") {
  // beta_12 = 1 kills the cross term
  const EosModel cut(ch4_nc10(320.0, 0.0, 1.0));
  CHECK(cut.influence()(0, 1) == 0.0);

  // identical components with beta = 0 collapse to the pure value
  MixtureSpec twin = ch4_nc10(320.0);
  twin.components[1] = twin.components[0];
  twin.beta.setZero();
  const EosModel same(twin);
  CHECK(same.influence()(0, 1) ==
        doctest::Approx(same.influence()(0, 0)).epsilon(1e-14));

  const EosModel model(ch4_nc10(320.0));
  CHECK(model.influence()(0, 0) == doctest::Approx(2.8463481634682737e-20).epsilon(1e-12));
  CHECK(model.influence()(1, 1) == doctest::Approx(1.1179466817447201e-18).epsilon(1e-12));
  CHECK(model.influence()(0, 1) == doctest::Approx(8.9191724454115344e-20).epsilon(1e-12));
  CHECK(model.influence()(0, 1) == doctest::Approx(model.influence()(1, 0)));
}

TEST_CASE("mass density is the exact weighted sum and linear") {
  MixtureSpec toy = ch4_nc10(320.0);
  toy.components[0].M_w = 1.0;
  toy.components[1].M_w = 2.0;
  CHECK(eos::mass_density(toy, Composition(Eigen::Vector2d(2.0, 3.0))) ==
        doctest::Approx(8.0));

  const EosModel model(ch4_nc10(320.0));
  CHECK(model.mass_density(Eigen::Vector2d(1000.0, 0.0)) ==
        doctest::Approx(16.043).epsilon(1e-14));
  const Eigen::Vector2d a(1234.5, 67.8), b(90.1, 2345.6);
  CHECK(model.mass_density(a + b) ==
        doctest::Approx(model.mass_density(a) + model.mass_density(b)).epsilon(1e-14));
}

TEST_CASE("clamp_to_feasible projects onto the feasible interior") {
  const EosModel model(ch4_nc10(320.0));
  Eigen::VectorXd n(2);
  n << -5.0, 6000.0;
  CHECK(model.clamp_to_feasible(n));
  CHECK(model.feasible(n));
  n << 8000.0, 5200.0;  // b.n > 1
  CHECK(model.clamp_to_feasible(n));
  CHECK(model.covolumes().dot(n) < 1.0);
  n << 5000.0, 2000.0;
  CHECK_FALSE(model.clamp_to_feasible(n));
}
