#include "ubad/metrics.hpp"

#include <algorithm>

#include "ubad/errors.hpp"

namespace ubad {

Confusion confusion_at_k(const std::vector<LabeledOutcome>& ordered, std::size_t k) {
  if (k > ordered.size()) throw UsageError("k exceeds the number of outcomes");
  Confusion c;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const bool investigated = i < k;
    if (ordered[i].abnormal) {
      (investigated ? c.tp : c.fn) += 1;
    } else {
      (investigated ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

namespace {
double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
}  // namespace

Rates metrics(const Confusion& c) {
  Rates r;
  r.tp_rate = ratio(c.tp, c.tp + c.fn);
  r.fp_rate = ratio(c.fp, c.fp + c.tn);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = r.tp_rate;
  return r;
}

Curve curves_and_auc(std::vector<LabeledOutcome> outcomes, CurveKind kind, TieMode tie_mode) {
  long positives = 0, negatives = 0;
  for (const auto& o : outcomes) (o.abnormal ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0) {
    throw DataError("curve undefined: outcomes contain a single class");
  }

  std::sort(outcomes.begin(), outcomes.end(), [&](const LabeledOutcome& a,
                                                  const LabeledOutcome& b) {
    if (a.priority != b.priority) return a.priority < b.priority;
    if (a.abnormal != b.abnormal) {
      return tie_mode == TieMode::Pessimistic ? !a.abnormal : a.abnormal;
    }
    return a.user_id < b.user_id;
  });

  Curve curve;
  curve.kind = kind;
  curve.points.reserve(outcomes.size() + 1);

  long tp = 0, fp = 0;
  long long roc_area = 0;  // sum of tp over each consumed normal, exact
  curve.points.push_back({0, metrics(confusion_at_k(outcomes, 0))});
  for (std::size_t k = 1; k <= outcomes.size(); ++k) {
    if (outcomes[k - 1].abnormal) {
      ++tp;
      curve.fps_before_tp.push_back(fp);
    } else {
      ++fp;
      roc_area += tp;
    }
    Confusion c;
    c.tp = tp;
    c.fp = fp;
    c.fn = positives - tp;
    c.tn = negatives - fp;
    curve.points.push_back({k, metrics(c)});
  }

  if (kind == CurveKind::Roc) {
    curve.auc = static_cast<double>(roc_area) /
                (static_cast<double>(positives) * static_cast<double>(negatives));
  } else {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      const auto& a = curve.points[i - 1].rates;
      const auto& b = curve.points[i].rates;
      area += (b.recall - a.recall) * (b.precision + a.precision) / 2.0;
    }
    curve.auc = area;
  }
  return curve;
}

}  // namespace ubad
