#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "naff/dealias.hpp"

namespace {

using naff::DualRateMeasurement;
using naff::Reconstruction;
using naff::kPi;

// Aliased frequency in cycles: nu0 - k/h with k = [nu0 h].
double alias_cycles(double nu0, double h) {
  return nu0 - static_cast<double>(naff::bracket(nu0 * h)) / h;
}

TEST(Reconstruct, NoAliasing) {
  const Reconstruction r = naff::reconstruct({0.21, 0.21, 1.0, 1.001});
  EXPECT_EQ(r.k, 0);
  EXPECT_EQ(r.nu0, 0.21);
  EXPECT_LT(r.residue, 1e-9);
}

TEST(Reconstruct, TableRow990) {
  // Angular nu0/pi = 990.5: in cycles nu0 = 495.25.
  const Reconstruction r = naff::reconstruct({0.25, -0.5095 / 2.0 / 1.001, 1.0, 1.001});
  EXPECT_NEAR(2.0 * r.nu0, 990.5, 1e-9);
  EXPECT_EQ(r.k, 495);
}

TEST(Reconstruct, BeyondValidityWraps) {
  const double nu0 = 1000.5 / 2.0;
  const double h = 1.0;
  const double hp = 1.001;
  const Reconstruction r =
      naff::reconstruct({alias_cycles(nu0, h), alias_cycles(nu0, hp), h, hp});
  EXPECT_NEAR(2.0 * r.nu0, -999.5, 1e-9);
}

TEST(Reconstruct, Errors) {
  EXPECT_THROW(naff::reconstruct({0.1, 0.1, 1.0, 1.0}), naff::DomainError);
  EXPECT_THROW(naff::reconstruct({0.1, 0.1, 1.0, 0.9}), naff::DomainError);
  EXPECT_THROW(naff::reconstruct({0.1, 0.1, 0.0, 1.0}), naff::DomainError);
  EXPECT_THROW(naff::reconstruct({0.7, 0.1, 1.0, 1.001}), naff::DomainError);
  // Two unrelated tones: k_raw lands between integers.
  EXPECT_THROW(naff::reconstruct({0.1, 0.1 + 0.4e-3, 1.0, 1.001}), naff::InconsistentMeasurement);
}

TEST(Reconstruct, RoundtripProperty) {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> step(0.05, 2.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> frac(1e-4, 1e-2);
  for (int i = 0; i < 10000; ++i) {
    const double h = step(rng);
    const double eps = h * frac(rng);
    const double nu0 = unit(rng) * 0.45 / eps;
    const double hp = h + eps;
    const Reconstruction r =
        naff::reconstruct({alias_cycles(nu0, h), alias_cycles(nu0, hp), h, hp});
    ASSERT_NEAR(r.nu0, nu0, 1e-12 * std::max(1.0, std::fabs(nu0)))
        << "nu0=" << nu0 << " h=" << h << " eps=" << eps;
    EXPECT_LT(r.residue, 1e-6);
    EXPECT_EQ(r.k, naff::bracket(nu0 * h));
  }
}

TEST(Reconstruct, EdgeOfValidityShiftsByOneOverEps) {
  const double h = 1.0;
  const double eps = 0.001;
  const double hp = h + eps;
  for (double over : {0.5005, 0.51, 0.6}) {
    const double nu0 = over / eps;
    const Reconstruction r =
        naff::reconstruct({alias_cycles(nu0, h), alias_cycles(nu0, hp), h, hp});
    EXPECT_NEAR(r.nu0, nu0 - 1.0 / eps, 1e-9 * nu0) << over;
  }
}

naff::DualAnalysis dual_for(const naff::QPModel& m, int terms) {
  const naff::SampledSignal a = naff::sample_model(m, 1000.0, 1.0);
  const naff::SampledSignal b = naff::sample_model(m, 1000.0, 1.001);
  naff::ExtractionConfig c;
  c.max_terms = terms;
  return naff::analyze_dual(a, b, naff::WeightWindow::cosine(1), c);
}

TEST(AnalyzeDual, SingleTone) {
  const naff::DualAnalysis d = dual_for(naff::QPModel({{2.5 * kPi, 1.0}}), 1);
  ASSERT_EQ(d.terms.size(), 1u);
  ASSERT_TRUE(d.terms[0].k.has_value());
  EXPECT_NEAR(2.0 * d.terms[0].nu0, 2.5, 1e-9);
}

TEST(AnalyzeDual, InBandToneMatchesSingleRateEstimate) {
  const naff::DualAnalysis d = dual_for(naff::QPModel({{0.3 * kPi, 1.0}}), 1);
  ASSERT_EQ(d.terms.size(), 1u);
  EXPECT_EQ(*d.terms[0].k, 0);
  EXPECT_EQ(d.terms[0].nu0, d.first.terms[0].freq / naff::kTwoPi);
}

TEST(AnalyzeDual, ThreeTones) {
  const naff::QPModel m({{0.3 * kPi, 1.0}, {5.5 * kPi, 0.5}, {12.25 * kPi, 0.25}});
  const naff::DualAnalysis d = dual_for(m, 3);
  ASSERT_EQ(d.terms.size(), 3u);
  const double want[] = {0.3, 5.5, 12.25};
  for (int i = 0; i < 3; ++i) {
    ASSERT_TRUE(d.terms[i].k.has_value()) << d.terms[i].note;
    EXPECT_NEAR(2.0 * d.terms[i].nu0, want[i], 1e-8);
  }
}

TEST(AnalyzeDual, ReportsUnpairedAndMismatchedTerms) {
  // The second signal carries an extra strong tone.
  const naff::QPModel m({{0.3 * kPi, 1.0}});
  const naff::QPModel m2({{0.3 * kPi, 1.0}, {0.7 * kPi, 0.6}});
  const naff::SampledSignal a = naff::sample_model(m, 1000.0, 1.0);
  const naff::SampledSignal b = naff::sample_model(m2, 1000.0, 1.001);
  naff::ExtractionConfig c;
  c.max_terms = 2;
  const naff::DualAnalysis d = naff::analyze_dual(a, b, naff::WeightWindow::cosine(1), c);
  ASSERT_EQ(d.terms.size(), 2u);
  EXPECT_TRUE(d.terms[0].k.has_value());
  EXPECT_FALSE(d.terms[1].k.has_value());
  EXPECT_EQ(d.terms[1].note, "unpaired");

  const naff::QPModel m3({{0.3 * kPi, 0.5}});
  const naff::SampledSignal b3 = naff::sample_model(m3, 1000.0, 1.001);
  const naff::DualAnalysis e = naff::analyze_dual(a, b3, naff::WeightWindow::cosine(1), c);
  ASSERT_EQ(e.terms.size(), 1u);
  EXPECT_EQ(e.terms[0].note, "amplitude mismatch");
  EXPECT_FALSE(e.terms[0].k.has_value());
}

}  // namespace
