#include "support.hpp"

#include "gweave/perturb.hpp"

#include <doctest.h>

using namespace gweave;
using namespace gwtest;

namespace {

PerturbationScalars lambda_only(std::vector<double> lambdas) {
  PerturbationScalars s;
  s.etas.assign(lambdas.size(), 0.0);
  s.mus.assign(lambdas.size(), 0.0);
  s.lambdas = std::move(lambdas);
  return s;
}

GFrame perturbed(const GFrame& f, double scale, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Matrix> blocks;
  for (const auto& b : f.blocks()) blocks.push_back(b + scale * random_matrix(b.rows(), b.cols(), rng, true));
  return GFrame(f.ambient_dim(), std::move(blocks));
}

Matrix rotation3(double angle, int axis) {
  Matrix r = Matrix::Identity(3, 3);
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  r(a, a) = std::cos(angle);
  r(a, b) = -std::sin(angle);
  r(b, a) = std::sin(angle);
  r(b, b) = std::cos(angle);
  return r;
}

GFrame with_spectrum(const std::vector<double>& s, const std::vector<std::size_t>& dims,
                     std::uint64_t seed) {
  GenSpec spec;
  spec.ambient_dim = s.size();
  spec.block_dims = dims;
  spec.kind = GenKind::PrescribedSpectrum;
  spec.spectrum = s;
  spec.seed = seed;
  return std::get<GFrame>(generate(spec));
}

}  // namespace

TEST_CASE("minimal K on identical members") {
  const GFrame f = random_frame(2, {1, 1, 1}, 1);
  const GFrameFamily fam({f, f});
  const KCertificate k = minimal_k(fam);
  CHECK(k.feasible);
  CHECK(k.k == doctest::Approx(0.0));
  const double a = fam.member_bounds(0).lower;
  CHECK(k.predicted_lower == doctest::Approx(2 * a / 3));
  CHECK(k.subsets_checked == 7);
}

TEST_CASE("minimal K on a scaled pair is eps^2") {
  const GFrame f = random_frame(3, {1, 1, 2, 1}, 2);
  for (double eps : {0.05, 0.2, 0.5}) {
    const GFrameFamily fam({f, scaled(f, 1 + eps)});
    const KCertificate k = minimal_k(fam);
    REQUIRE(k.feasible);
    CHECK(k.k == doctest::Approx(eps * eps).epsilon(1e-9));
    CHECK(certify_woven(fam).universal_lower >= k.predicted_lower - 1e-8);
  }
}

TEST_CASE("minimal K on near-identical full-rank blocks") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GFrame f = random_frame(2, {2, 2, 3}, 10 + seed);
    const GFrameFamily fam({f, perturbed(f, 1e-3, 20 + seed)});
    const KCertificate k = minimal_k(fam);
    REQUIRE(k.feasible);
    CHECK(k.k < 1e-3);
    CHECK(certify_woven(fam).universal_lower >= k.predicted_lower - 1e-8);
  }
}

TEST_CASE("minimal K is infeasible when a difference escapes a member's support") {
  // Index 1 alone: member 1 vanishes on e2 while the difference does not.
  const GFrame a(2, {row({1, 0}), row({0, 1})});
  const GFrame b(2, {row({1, 1}), row({0, 1})});
  const KCertificate k = minimal_k(GFrameFamily({a, b}));
  CHECK_FALSE(k.feasible);
  CHECK(k.predicted_lower == 0.0);
}

TEST_CASE("minimal K grows with the perturbation") {
  const GFrame f = random_frame(2, {2, 2}, 30);
  const GFrame g = perturbed(f, 0.05, 31);
  double last = -1.0;
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    std::vector<Matrix> blocks;
    for (std::size_t i = 0; i < f.size(); ++i) blocks.push_back(f.block(i) + t * (g.block(i) - f.block(i)));
    const KCertificate k = minimal_k(GFrameFamily({f, GFrame(2, std::move(blocks))}));
    REQUIRE(k.feasible);
    CHECK(k.k >= last);
    last = k.k;
  }
}

TEST_CASE("minimal K budget and determinism") {
  const GFrame f = random_frame(2, std::vector<std::size_t>(12, 1), 40);
  const GFrameFamily fam({f, scaled(f, 1.1)});
  CHECK_THROWS_AS(minimal_k(fam, 1000), BudgetExceeded);
  const KCertificate one = minimal_k(fam, kDefaultBudget, {}, 1);
  const KCertificate many = minimal_k(fam, kDefaultBudget, {}, 4);
  CHECK(one.k == many.k);
  CHECK(one.worst_subset == many.worst_subset);
}

TEST_CASE("Paley-Wiener certificate examples") {
  const GFrame f = onb(2);
  {
    const GFrameFamily fam({f, f});
    const PerturbationCertificate c =
        perturbation_certificate(fam, 0, lambda_only({0, 0}), VerificationMode::ExactLambdaOnly);
    CHECK(c.valid());
    CHECK(c.predicted_lower == doctest::Approx(1.0));
    CHECK(certify_woven(fam).universal_lower == doctest::Approx(1.0));
  }
  {
    const GFrameFamily fam({f, scaled(f, 1.1)});
    const std::vector<double> fit = fit_lambdas(fam, 0);
    CHECK(fit[1] == doctest::Approx(0.1));
    const PerturbationCertificate c =
        perturbation_certificate(fam, 0, lambda_only(fit), VerificationMode::ExactLambdaOnly);
    CHECK(c.valid());
    CHECK(c.predicted_lower == doctest::Approx(0.79));
    CHECK(certify_woven(fam).universal_lower == doctest::Approx(1.0));
  }
  {
    const GFrameFamily fam({f, scaled(f, 1.6)});
    const PerturbationCertificate c = perturbation_certificate(
        fam, 0, lambda_only(fit_lambdas(fam, 0)), VerificationMode::ExactLambdaOnly);
    CHECK(c.status == CertificateStatus::HypothesisFails);
    CHECK(c.predicted_lower < 0.0);
  }
}

TEST_CASE("Paley-Wiener certificate rejects an undersized lambda") {
  const GFrameFamily fam({onb(2), scaled(onb(2), 1.1)});
  const PerturbationCertificate c =
      perturbation_certificate(fam, 0, lambda_only({0, 0.05}), VerificationMode::ExactLambdaOnly);
  CHECK(c.status == CertificateStatus::ConditionViolated);
  CHECK_THROWS_AS(perturbation_certificate(fam, 2, lambda_only({0, 0}), VerificationMode::ExactLambdaOnly),
                  InvalidArgument);
  CHECK_THROWS_AS(perturbation_certificate(fam, 0, lambda_only({0}), VerificationMode::ExactLambdaOnly),
                  InvalidArgument);
}

TEST_CASE("sampled falsification") {
  const GFrame f = random_frame(2, {1, 1, 1}, 50);
  const GFrameFamily fam({f, perturbed(f, 0.05, 51)});

  // Zero scalars cannot dominate a nonzero difference.
  const PerturbationCertificate bad = perturbation_certificate(
      fam, 0, lambda_only({0, 0}), VerificationMode::SampledFalsification, 100, 7);
  CHECK(bad.status == CertificateStatus::ConditionViolated);
  REQUIRE(bad.witness);
  CHECK(bad.witness->lhs > bad.witness->rhs);

  PerturbationScalars s = lambda_only(fit_lambdas(fam, 0));
  s.etas[1] = 0.01;
  s.mus[1] = 0.01;
  const PerturbationCertificate ok =
      perturbation_certificate(fam, 0, s, VerificationMode::SampledFalsification, 500, 7);
  CHECK(ok.status == CertificateStatus::NotFalsified);
  CHECK(ok.trials == 500);
  CHECK(certify_woven(fam).universal_lower >= ok.predicted_lower - 1e-8);

  const PerturbationCertificate again =
      perturbation_certificate(fam, 0, s, VerificationMode::SampledFalsification, 500, 7);
  CHECK(again.status == ok.status);
  CHECK(again.predicted_lower == ok.predicted_lower);
}

TEST_CASE("restricting to J never enlarges the synthesis difference") {
  const GFrame f = random_frame(3, {1, 2, 1, 1}, 60);
  const GFrame g = perturbed(f, 0.1, 61);
  const Matrix diff = synthesis_matrix(f) - synthesis_matrix(g);
  const double full = op_norm(diff);
  for (std::uint64_t mask = 1; mask < 16; ++mask) {
    Matrix masked = diff;
    for (std::size_t i = 0; i < 4; ++i) {
      if (!(mask & (1u << i))) {
        masked.middleCols(static_cast<Eigen::Index>(f.offset(i)), f.block(i).rows()).setZero();
      }
    }
    CHECK(op_norm(masked) <= full + 1e-12);
  }
}

TEST_CASE("chained certificate") {
  const GFrame f = random_frame(2, {1, 1, 1}, 70);
  const GFrameFamily pair({f, perturbed(f, 0.02, 71)});
  const std::vector<double> chain = fit_chain_lambdas(pair);
  const PerturbationCertificate c =
      chained_certificate(pair, lambda_only(chain), VerificationMode::ExactLambdaOnly);
  const PerturbationCertificate b = perturbation_certificate(
      pair, 0, lambda_only({0, chain[0]}), VerificationMode::ExactLambdaOnly);
  CHECK(c.predicted_lower == doctest::Approx(b.predicted_lower).epsilon(1e-14));
  CHECK(c.status == b.status);

  const GFrameFamily three({f, f, f});
  const PerturbationCertificate t =
      chained_certificate(three, lambda_only({0, 0}), VerificationMode::ExactLambdaOnly);
  CHECK(t.predicted_lower == doctest::Approx(three.member_bounds(0).lower));

  const GFrameFamily ramp({onb(3), scaled(onb(3), 1.05), scaled(onb(3), 1.1)});
  const PerturbationCertificate r =
      chained_certificate(ramp, lambda_only(fit_chain_lambdas(ramp)), VerificationMode::ExactLambdaOnly);
  CHECK(r.valid());
  CHECK(certify_woven(ramp).universal_lower >= r.predicted_lower - 1e-8);
  CHECK(recompute_predicted_lower(r) == r.predicted_lower);
}

TEST_CASE("operator perturbation") {
  const GFrame p(3, {Matrix::Identity(3, 3).topRows(2), Matrix::Identity(3, 3).bottomRows(1)});
  {
    const OperatorPerturbationReport r =
        operator_perturbation(p, std::vector<Matrix>(2, Matrix::Identity(3, 3)));
    CHECK(r.condition_holds);
    CHECK(r.stated_lower == doctest::Approx(1.0));
    REQUIRE(r.exhaustive);
    CHECK(r.exhaustive->universal_lower == doctest::Approx(1.0));
  }
  {
    // max ||I - T||^2 = 0.01 < A/B = 1. The stated A - B * 0.01 = 0.99 is not
    // attained: the all-0.9 weaving has lower bound 0.81 = (1 - 0.1)^2.
    const OperatorPerturbationReport r =
        operator_perturbation(p, std::vector<Matrix>(2, 0.9 * Matrix::Identity(3, 3)));
    CHECK(r.condition_holds);
    CHECK(r.uniform);
    CHECK(r.stated_lower == doctest::Approx(0.99));
    CHECK(r.triangle_lower == doctest::Approx(0.81));
    REQUIRE(r.exhaustive);
    CHECK(r.exhaustive->status == WeaveStatus::Woven);
    CHECK(r.exhaustive->universal_lower == doctest::Approx(0.81));
    CHECK_FALSE(r.stated_bound_holds(1e-8));
    CHECK(r.exhaustive->universal_lower >= r.triangle_lower - 1e-8);
  }
  {
    const GFrame f = with_spectrum({1.0, 1.5, 2.0}, {1, 1, 2, 1}, 80);
    std::vector<Matrix> ops;
    for (int i = 0; i < 4; ++i) ops.push_back(rotation3(0.05 * (i + 1) / 4.0, i % 3));
    const OperatorPerturbationReport r = operator_perturbation(f, ops);
    CHECK(r.lower == doctest::Approx(1.0));
    CHECK(r.upper == doctest::Approx(2.0));
    CHECK_FALSE(r.uniform);
    CHECK(r.condition_holds);
    REQUIRE(r.exhaustive);
    CHECK(r.exhaustive->universal_lower >= r.triangle_lower - 1e-8);
  }
  CHECK_THROWS_AS(operator_perturbation(p, {Matrix::Identity(3, 3)}), InvalidArgument);
  CHECK_THROWS_AS(operator_perturbation(p, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}),
                  InvalidArgument);
  CHECK_THROWS_AS(operator_perturbation(p, {Matrix::Identity(3, 3), diag({1, 1, 0})}), NumericFailure);
}

TEST_CASE("scaled canonical dual") {
  {
    const ScaledDualReport r = scaled_dual_weave(onb(3));
    CHECK(r.hypothesis_holds);
    CHECK(r.factor == doctest::Approx(1.0));
    REQUIRE(r.scaled_dual);
    CHECK(block_distance(*r.scaled_dual, onb(3)) < 1e-14);
    CHECK(r.certified_woven);
    CHECK(r.perturbation->exhaustive->universal_lower == doctest::Approx(1.0));
    CHECK(r.perturbation->exhaustive->universal_upper == doctest::Approx(1.0));
  }
  {
    const GFrame f = with_spectrum({1.0, 1.5}, {1, 1, 1}, 90);
    const ScaledDualReport r = scaled_dual_weave(f);
    CHECK(r.factor == doctest::Approx(1.2));
    CHECK(r.defect_norm <= 0.2 + 1e-9);
    CHECK(r.spectral_containment);
    CHECK(r.certified_woven);
  }
  {
    const GFrame f = with_spectrum({1.0, 2.5}, {1, 1, 1}, 91);
    const ScaledDualReport r = scaled_dual_weave(f);
    CHECK_FALSE(r.hypothesis_holds);
    CHECK_FALSE(r.certified_woven);
    CHECK(r.ratio == doctest::Approx(2.5));
  }
  {
    const ScaledDualReport r = scaled_dual_weave(GFrame(2, {row({1, 0})}));
    CHECK_FALSE(r.hypothesis_holds);
  }
}

TEST_CASE("valid certificates are sound on random instances") {
  int valid = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t m = 2 + seed % 2;
    const GFrame f = random_frame(2, {1, 1, 1, 1}, 100 + seed);
    std::vector<GFrame> frames{f};
    for (std::size_t j = 1; j < m; ++j) frames.push_back(perturbed(f, 0.02 * static_cast<double>(j), 200 + seed * 7 + j));
    const GFrameFamily fam(std::move(frames));
    const double exhaustive = certify_woven(fam).universal_lower;

    const PerturbationCertificate pw = perturbation_certificate(
        fam, seed % m, lambda_only(fit_lambdas(fam, seed % m)), VerificationMode::ExactLambdaOnly);
    if (pw.valid()) {
      ++valid;
      CHECK(exhaustive >= pw.predicted_lower - 1e-8);
    }
    const PerturbationCertificate ch =
        chained_certificate(fam, lambda_only(fit_chain_lambdas(fam)), VerificationMode::ExactLambdaOnly);
    if (ch.valid()) CHECK(exhaustive >= ch.predicted_lower - 1e-8);
  }
  CHECK(valid > 10);
}
