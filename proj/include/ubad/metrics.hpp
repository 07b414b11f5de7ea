#pragma once

#include <string>
#include <vector>

#include "ubad/scoring.hpp"

namespace ubad {

struct LabeledOutcome {
  std::string user_id;
  bool abnormal = false;
  int priority = 0;  // from the investigation list; smaller = investigate first
};

struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

// Top-k of the ordered outcomes are predicted abnormal.
Confusion confusion_at_k(const std::vector<LabeledOutcome>& ordered, std::size_t k);

struct Rates {
  double tp_rate = 0.0;
  double fp_rate = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Exact formulas; 0/0 is defined as 0.
Rates metrics(const Confusion& counts);

struct CurvePoint {
  std::size_t k = 0;
  Rates rates;
};

enum class CurveKind { Roc, Pr };
enum class TieMode { Pessimistic, Optimistic };

struct Curve {
  CurveKind kind = CurveKind::Roc;
  std::vector<CurvePoint> points;  // k = 0..n
  double auc = 0.0;
  // #normal users listed before the i-th abnormal one (the paper-style
  // "FPs before the i-th TP" table).
  std::vector<long> fps_before_tp;
};

// Sorts by (priority, tie_mode, user_id) and sweeps k = 0..n. Pessimistic
// ties list the normal user first (worst-case investigation order). ROC AUC
// is accumulated in integers, which equals the trapezoid over the one-step
// sweep exactly; PR AUC uses the plain trapezoid rule.
Curve curves_and_auc(std::vector<LabeledOutcome> outcomes, CurveKind kind, TieMode tie_mode);

}  // namespace ubad
