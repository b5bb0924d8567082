#pragma once

#include "graspda/eval.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace graspda {

// `method,paradigm,mean_acc,std_acc,p_vs_nonDA`; the p column is filled on
// augmented rows (paired against their non-augmented counterpart) and "-"
// elsewhere.
void write_report_csv(std::ostream& out, std::span<const ComparisonReport> reports);

// `true_class,pred_class,count,row_percent`, one row per cell.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

// Row-normalized heatmap with per-cell percentages.
void write_confusion_svg(std::ostream& out, const ConfusionMatrix& cm, const std::string& title);

struct SweepRow {
  std::string param;
  double value = 0.0;
  Method method = Method::CSP;
  Paradigm paradigm = Paradigm::ME;
  double mean = 0.0;
  double stddev = 0.0;
};

// `param,value,method,paradigm,mean_acc,std_acc`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace graspda
