#include "urbanscore/scoring/calibration.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace urbanscore::scoring {

namespace {

struct Best {
  double error = std::numeric_limits<double>::infinity();
  double distance = std::numeric_limits<double>::infinity();

  bool offer(double err, double dist) {
    constexpr double kTie = 1e-12;
    if (err < error - kTie || (err <= error + kTie && dist < distance)) {
      error = std::min(err, error);
      distance = dist;
      return true;
    }
    return false;
  }
};

double sq(double x) { return x * x; }

// Inclusive integer-stepped grid to avoid accumulated rounding.
void grid(double from, double to, double step, const std::function<void(double)>& fn) {
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long i = 0; i <= n; ++i) fn(from + static_cast<double>(i) * step);
}

}  // namespace

CalibrationInputs CalibrationInputs::from_summary(const geodata::FacilitySummary& summary) {
  return CalibrationInputs{summary.lifestyle_counts(), summary.schools,
                           static_cast<int>(summary.routes.size()), summary.nearest_metro_m};
}

CalibrationResult calibrate(const std::vector<CalibrationCase>& cases,
                            const CalibrationConstants& start) {
  start.validate();
  CalibrationConstants cal = start;
  double total_error = 0.0;

  // Lifestyle: count reference and count/entropy mix.
  {
    Best best;
    double best_ref = start.lifestyle_count_ref;
    double best_w = start.lifestyle_w_count;
    grid(10.0, 200.0, 1.0, [&](double ref) {
      grid(0.05, 0.95, 0.01, [&](double w) {
        CalibrationConstants c = start;
        c.lifestyle_count_ref = ref;
        c.lifestyle_w_count = w;
        c.lifestyle_w_entropy = 1.0 - w;
        double err = 0.0;
        for (const auto& k : cases)
          if (k.targets.lifestyle)
            err += sq(lifestyle_score(k.inputs.lifestyle_counts, c) - *k.targets.lifestyle);
        const double dist = sq((ref - start.lifestyle_count_ref) / start.lifestyle_count_ref) +
                            sq(w - start.lifestyle_w_count);
        if (best.offer(err, dist)) {
          best_ref = ref;
          best_w = w;
        }
      });
    });
    cal.lifestyle_count_ref = best_ref;
    cal.lifestyle_w_count = best_w;
    cal.lifestyle_w_entropy = 1.0 - best_w;
    total_error += best.error;
  }

  // Education: decay length and a common scale on the type weights (their
  // ratios stay as configured).
  {
    Best best;
    double best_decay = start.education_decay_m;
    double best_scale = 1.0;
    grid(300.0, 3000.0, 10.0, [&](double decay) {
      grid(0.25, 4.0, 0.01, [&](double scale) {
        CalibrationConstants c = start;
        c.education_decay_m = decay;
        for (auto& [_, w] : c.education_type_weights) w *= scale;
        double err = 0.0;
        for (const auto& k : cases)
          if (k.targets.education)
            err += sq(education_score(k.inputs.schools, c) - *k.targets.education);
        const double dist =
            sq((decay - start.education_decay_m) / start.education_decay_m) + sq(scale - 1.0);
        if (best.offer(err, dist)) {
          best_decay = decay;
          best_scale = scale;
        }
      });
    });
    cal.education_decay_m = best_decay;
    for (auto& [_, w] : cal.education_type_weights) w *= best_scale;
    total_error += best.error;
  }

  // Surface transport coefficient.
  {
    Best best;
    double best_k = start.surface_k;
    grid(1.0, 60.0, 0.01, [&](double k_value) {
      CalibrationConstants c = start;
      c.surface_k = k_value;
      double err = 0.0;
      for (const auto& k : cases)
        if (k.targets.surface) err += sq(surface_score(k.inputs.distinct_routes, c) - *k.targets.surface);
      if (best.offer(err, sq((k_value - start.surface_k) / start.surface_k))) best_k = k_value;
    });
    cal.surface_k = best_k;
    total_error += best.error;
  }

  // Metro has no free constants; its residual still counts.
  for (const auto& k : cases)
    if (k.targets.metro) total_error += sq(metro_score(k.inputs.nearest_metro_m, cal) - *k.targets.metro);

  cal.validate();
  CalibrationResult result{cal, total_error, {}};
  for (const auto& k : cases) {
    SubScores s;
    s.lifestyle = lifestyle_score(k.inputs.lifestyle_counts, cal);
    s.education = education_score(k.inputs.schools, cal);
    s.surface = surface_score(k.inputs.distinct_routes, cal);
    s.metro = metro_score(k.inputs.nearest_metro_m, cal);
    result.fitted.push_back(s);
  }
  return result;
}

}  // namespace urbanscore::scoring
