#include "graspda/emg_label.hpp"
#include "graspda/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace graspda {
namespace {

EmgLabel lab(std::initializer_list<double> v, std::uint32_t trial = 0, int seg = 0, int cls = 1) {
  EmgLabel l;
  l.rms = Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
  l.source_trial_id = trial;
  l.segment_index = seg;
  l.class_label = cls;
  return l;
}

// Segment whose channel c is the constant value[c]; RMS is |value[c]|.
Segment constant_segment(std::initializer_list<double> values, Eigen::Index width = 500) {
  Matrix m(static_cast<Eigen::Index>(values.size()), width);
  Eigen::Index r = 0;
  for (double v : values) m.row(r++).setConstant(v);
  const Trial t = Trial::make(12, 4, Paradigm::ME, 1000, m);
  Segment s;
  s.source_trial_id = 12;
  s.class_label = 4;
  s.segment_index = 6;
  s.source = t.samples;
  s.offset = 0;
  s.width = width;
  return s;
}

TEST(Rms, ClosedForms) {
  Matrix m(3, 2);
  m << 3, 4, -2, -2, 0, 0;
  const Eigen::VectorXd r = rms(m);
  EXPECT_NEAR(r(0), std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(r(0), 3.535534, 1e-6);
  EXPECT_EQ(r(1), 2.0);
  EXPECT_EQ(r(2), 0.0);
}

TEST(Rms, ScaleEquivariant) {
  const Matrix x = test::random_matrix(4, 300, 2);
  for (double k : {-3.0, 0.5, 7.0}) {
    EXPECT_LT((rms(k * x) - std::abs(k) * rms(x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Rms, EmptyRejected) { EXPECT_THROW(rms(Matrix(2, 0)), InvalidParameter); }

TEST(BuildLabel, SubtractsReference) {
  const EmgLabel l = build_label(constant_segment({5, 4, 3, 2, 1}), 4);
  ASSERT_EQ(l.rms.size(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(l.rms(i), 4.0 - i, 1e-12);
  EXPECT_EQ(l.source_trial_id, 12u);
  EXPECT_EQ(l.class_label, 4);
  EXPECT_EQ(l.segment_index, 6);
}

TEST(BuildLabel, EqualToReferenceGivesZero) {
  const EmgLabel l = build_label(constant_segment({1, -1, 1, 1, 1}), 4);
  EXPECT_EQ(l.rms, Eigen::VectorXd::Zero(4));
}

TEST(BuildLabel, ClampsAtZero) {
  const EmgLabel l = build_label(constant_segment({0.5, 2, 0.5, 1, 1}), 4);
  EXPECT_EQ(l.rms(0), 0.0);
  EXPECT_EQ(l.rms(1), 1.0);
  EXPECT_EQ(l.rms(2), 0.0);
  EXPECT_EQ(l.rms(3), 0.0);
}

TEST(BuildLabel, ReferenceMayBeAnyChannel) {
  const EmgLabel l = build_label(constant_segment({1, 5, 4, 3, 2}), 0);
  EXPECT_NEAR(l.rms(0), 4.0, 1e-12);
  EXPECT_NEAR(l.rms(3), 1.0, 1e-12);
}

TEST(BuildLabel, NeverNegativeOnRandomData) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix m = test::random_matrix(5, 100, s);
    const Trial t = Trial::make(1, 1, Paradigm::ME, 1000, m);
    for (const auto& l : label_trial(t, SegmentGeometry{50, 25}, 4)) EXPECT_GE(l.rms.minCoeff(), 0.0);
  }
}

TEST(BuildLabel, ReferenceOutOfRange) {
  EXPECT_THROW(build_label(constant_segment({1, 2, 3}), 3), InvalidParameter);
  EXPECT_THROW(build_label(constant_segment({1, 2, 3}), -1), InvalidParameter);
}

TEST(LabelTrial, OneLabelPerSegment) {
  Matrix m = Matrix::Zero(5, 4000);
  for (Eigen::Index t = 0; t < 4000; ++t) m(0, t) = static_cast<double>(t / 250);  // step every 250 samples
  const auto labels = label_trial(Trial::make(3, 2, Paradigm::ME, 1000, m), SegmentGeometry{}, 4);
  ASSERT_EQ(labels.size(), 15u);
  for (int i = 0; i < 15; ++i) {
    EXPECT_EQ(labels[i].segment_index, i);
    // Window i holds 250 samples of value i and 250 of value i + 1.
    EXPECT_NEAR(labels[i].rms(0), std::sqrt((i * i + (i + 1.0) * (i + 1.0)) / 2.0), 1e-12);
  }
}

TEST(Mse, ClosedForms) {
  EXPECT_EQ(mse(lab({1, 2, 3, 4}), lab({1, 2, 3, 4})), 0.0);
  EXPECT_EQ(mse(lab({1, 0, 0, 0}), lab({0, 1, 0, 0})), 0.5);
  EXPECT_EQ(mse(lab({2, 2, 2, 2}), lab({0, 0, 0, 0})), 4.0);
  EXPECT_NEAR(mse(lab({0.1, 0.2, 0.3, 0.4}), lab({0.4, 0.3, 0.2, 0.1})), (0.09 + 0.01 + 0.01 + 0.09) / 4.0, 1e-12);
}

TEST(Mse, SymmetricAndZeroOnSelf) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const EmgLabel a = lab({u(rng), u(rng), u(rng), u(rng)});
    const EmgLabel b = lab({u(rng), u(rng), u(rng), u(rng)});
    EXPECT_EQ(mse(a, b), mse(b, a));
    EXPECT_EQ(mse(a, a), 0.0);
    EXPECT_GE(mse(a, b), 0.0);
  }
}

TEST(Mse, LengthMismatch) { EXPECT_THROW(mse(lab({1, 2}), lab({1, 2, 3})), InvalidParameter); }

std::vector<EmgLabel> random_pool(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EmgLabel> pool;
  for (std::size_t i = 0; i < n; ++i) {
    pool.push_back(lab({u(rng), u(rng), u(rng), u(rng)}, static_cast<std::uint32_t>(i / 15), static_cast<int>(i % 15),
                       static_cast<int>(i / 15) % 5 + 1));
  }
  return pool;
}

// Exhaustive scan written independently of the library: explicit squared
// differences, strict ordering on (error, trial, segment).
std::size_t scan_argmin(const EmgLabel& q, const std::vector<EmgLabel>& pool, std::uint32_t skip_trial) {
  std::size_t best = pool.size();
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].source_trial_id == skip_trial) continue;
    double e = 0.0;
    for (Eigen::Index d = 0; d < q.rms.size(); ++d) e += (q.rms(d) - pool[i].rms(d)) * (q.rms(d) - pool[i].rms(d));
    e /= static_cast<double>(q.rms.size());
    const bool better = e < best_err || (e == best_err && (pool[i].source_trial_id < pool[best].source_trial_id ||
                                                           (pool[i].source_trial_id == pool[best].source_trial_id &&
                                                            pool[i].segment_index < pool[best].segment_index)));
    if (better) {
      best = i;
      best_err = e;
    }
  }
  return best;
}

TEST(NearestLabel, VerbatimQueryFound) {
  const auto pool = random_pool(300, 1);
  for (std::size_t i : {0u, 17u, 299u}) EXPECT_EQ(nearest_label(pool[i], pool), i);
}

TEST(NearestLabel, TieGoesToLowerProvenance) {
  std::vector<EmgLabel> pool = {lab({0, 0, 0, 2}, 5, 3), lab({0, 0, 2, 0}, 5, 1), lab({0, 2, 0, 0}, 2, 9)};
  EXPECT_EQ(nearest_label(lab({0, 0, 0, 0}), pool), 2u);
  pool.pop_back();
  EXPECT_EQ(nearest_label(lab({0, 0, 0, 0}), pool), 1u);
}

TEST(NearestLabel, MatchesBruteForceWithExclusion) {
  const auto pool = random_pool(3000, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int q = 0; q < 300; ++q) {
    const EmgLabel query = lab({u(rng), u(rng), u(rng), u(rng)});
    const auto skip = static_cast<std::uint32_t>(q % 200);
    const auto got = nearest_label(query, pool, [&](const EmgLabel& l) { return l.source_trial_id == skip; });
    EXPECT_EQ(got, scan_argmin(query, pool, skip));
  }
}

TEST(NearestLabel, QuantizedTiesMatchBruteForce) {
  // Coarse values make exact ties common.
  auto pool = random_pool(600, 4);
  for (auto& l : pool) l.rms = (l.rms * 2.0).array().round().matrix();
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(0, 2);
  for (int q = 0; q < 200; ++q) {
    const EmgLabel query = lab({double(u(rng)), double(u(rng)), double(u(rng)), double(u(rng))});
    EXPECT_EQ(nearest_label(query, pool, [](const EmgLabel&) { return false; }),
              scan_argmin(query, pool, std::numeric_limits<std::uint32_t>::max()));
  }
}

TEST(NearestLabel, EmptyAfterExclusion) {
  const std::vector<EmgLabel> pool = {lab({1, 1, 1, 1}, 3, 0), lab({2, 2, 2, 2}, 3, 1)};
  EXPECT_THROW(nearest_label(lab({1, 1, 1, 1}), pool, [](const EmgLabel& l) { return l.source_trial_id == 3; }),
               NoCandidate);
  EXPECT_THROW(nearest_label(lab({1, 1, 1, 1}), std::span<const EmgLabel>()), NoCandidate);
}

std::vector<EmgLabel> full_labels(int trials, int segments = 15) {
  std::vector<EmgLabel> out;
  for (int t = 0; t < trials; ++t) {
    for (int s = 0; s < segments; ++s) {
      const double v = 10.0 * t + s;
      out.push_back(lab({v, v, v, v}, static_cast<std::uint32_t>(t), s, t % 5 + 1));
    }
  }
  return out;
}

TEST(Templates, SingleLabelPerCellIsTemplate) {
  const auto labels = full_labels(5);
  const auto templates = build_templates(labels);
  ASSERT_EQ(templates.size(), 5u);
  for (const auto& t : templates) {
    ASSERT_EQ(t.per_segment.size(), 15u);
    const int trial = t.class_label - 1;
    for (int s = 0; s < 15; ++s) EXPECT_EQ(t.per_segment[s](0), 10.0 * trial + s);
  }
}

TEST(Templates, CellMeanOfTwo) {
  std::vector<EmgLabel> labels = {lab({1, 1, 1, 1}, 0, 0, 2), lab({3, 3, 3, 3}, 1, 0, 2)};
  const auto templates = build_templates(labels, 1);
  ASSERT_EQ(templates.size(), 1u);
  EXPECT_EQ(templates[0].per_segment[0], Eigen::VectorXd::Constant(4, 2.0));
}

TEST(Templates, TwoHundredTrialsGiveFiveByFifteen) {
  const auto templates = build_templates(full_labels(200));
  ASSERT_EQ(templates.size(), 5u);
  for (const auto& t : templates) EXPECT_EQ(t.per_segment.size(), 15u);
  // Class 1 collects trials 0, 5, ..., 195: mean value 975 + s.
  EXPECT_NEAR(templates[0].per_segment[4](2), 975.0 + 4.0, 1e-9);
}

TEST(Templates, MissingCellNamed) {
  auto labels = full_labels(5);
  labels.erase(labels.begin() + 2 * 15 + 7);  // class 3, segment 7
  try {
    build_templates(labels);
    FAIL() << "expected IncompleteTemplate";
  } catch (const IncompleteTemplate& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("class 3"), std::string::npos);
    EXPECT_NE(msg.find("segment 7"), std::string::npos);
  }
}

TEST(MiLabels, RecallClassTemplate) {
  const auto templates = build_templates(full_labels(5));
  const Trial mi = Trial::make(900, 1, Paradigm::MI, 1000, Matrix::Zero(2, 4000));
  const auto labels = assign_mi_labels(mi, templates);
  ASSERT_EQ(labels.size(), 15u);
  for (int s = 0; s < 15; ++s) {
    EXPECT_EQ(labels[s].rms, templates[0].per_segment[s]);
    EXPECT_EQ(labels[s].source_trial_id, 900u);
    EXPECT_EQ(labels[s].segment_index, s);
    EXPECT_EQ(labels[s].class_label, 1);
  }
}

TEST(MiLabels, SingleMeTrialTemplates) {
  auto labels = full_labels(1);
  const auto templates = build_templates(labels);
  const Trial mi = Trial::make(50, 1, Paradigm::MI, 1000, Matrix::Zero(1, 4000));
  const auto mi_labels = assign_mi_labels(mi, templates);
  for (int s = 0; s < 15; ++s) EXPECT_EQ(mi_labels[s].rms, labels[s].rms);
}

TEST(MiLabels, UnknownClass) {
  const auto templates = build_templates(full_labels(2));
  const Trial mi = Trial::make(50, 4, Paradigm::MI, 1000, Matrix::Zero(1, 4000));
  EXPECT_THROW(assign_mi_labels(mi, templates), MissingTemplate);
}

TEST(Normalization, DividesByChannelMean) {
  std::vector<EmgLabel> labels = {lab({1, 0, 4, 2}), lab({3, 0, 4, 6})};
  const Eigen::VectorXd scale = label_scale(labels);
  EXPECT_EQ(scale(0), 2.0);
  EXPECT_EQ(scale(1), 1e-12);
  normalize_labels(labels, scale);
  EXPECT_EQ(labels[1].rms(0), 1.5);
  EXPECT_EQ(labels[0].rms(2), 1.0);
  EXPECT_THROW(label_scale(std::span<const EmgLabel>()), InvalidParameter);
}

TEST(LabelCsv, Format) {
  std::ostringstream out;
  const std::vector<EmgLabel> labels = {lab({0.5, 1, 0, 2.25}, 3, 14, 2)};
  write_label_csv(out, labels);
  EXPECT_EQ(out.str(), "source_trial_id,class_label,segment_index,rms1,rms2,rms3,rms4\n3,2,14,0.5,1,0,2.25\n");
}

}  // namespace
}  // namespace graspda
