#ifndef REDLINE_METRICS_HPP_
#define REDLINE_METRICS_HPP_

#include <vector>

namespace redline {

struct StepTrace;

// Per-episode evaluation summary.
struct EpisodeEvaluation {
  double ground_truth_score = 0.0;  // mean per-step penalty, <= 0
  double episodic_reward = 0.0;     // sum of per-step training rewards
  int steps = 0;
};

enum class CurveMeaning { MeanEpisodicReward, MeanGroundTruthScore };

// One training curve, indexed by training iteration / evaluation point.
struct CurveSeries {
  std::vector<double> values;
  CurveMeaning meaning = CurveMeaning::MeanGroundTruthScore;
};

// -(number of nodes compromised at any point during the step). A node counts
// once per step no matter how many snapshots show it compromised.
double step_ground_truth_penalty(const StepTrace& trace);

// Mean of step_ground_truth_penalty over a full episode. A perfect
// containment policy against a 0.9-attack-rate red scores -0.9.
double episode_ground_truth_score(const std::vector<StepTrace>& traces);

// First differences d_t = y_{t+1} - y_t; removes smooth improvement trends so
// only high-frequency fluctuation remains. Throws TooShort for length < 2.
std::vector<double> detrend_differences(const std::vector<double>& curve);

// Q3 - Q1 with quartiles by linear interpolation of the order statistics at
// quantiles 0.25 / 0.75. Throws TooShort for length < 2.
double iqr(const std::vector<double>& values);

// Dispersion variability: mean IQR over stride-1 sliding windows of the
// first-differenced curve. A window at least as long as the differenced
// series degenerates to one global IQR. Throws TooShort / BadWindow.
double dispersion_variability(const std::vector<double>& curve, int window);
double dispersion_variability(const CurveSeries& curve, int window);

}  // namespace redline

#endif  // REDLINE_METRICS_HPP_
