#pragma once

// Subcommands of the command-line tool. Each writes its files into
// RunConfig::out_dir (names carry the sweep suffix), prints a one-line
// result, and returns the computed values.

#include <ostream>
#include <string>
#include <vector>

#include "anisoswarm/config.hpp"
#include "anisoswarm/discrete.hpp"

namespace anisoswarm {

struct SimulateOutcome {
  TerminationReason termination = TerminationReason::ReachedTEnd;
  double t_final = 0.0;
  double max_speed_final = 0.0;
  long n_steps = 0;
  PatternSummary pattern;
};
/// trajectory.csv, summary.json, pattern.json.
SimulateOutcome cmd_simulate(const RunConfig& rc, const std::string& suffix, std::ostream& out);

struct RingOutcome {
  double R_continuous = 0.0;
  double R_discrete = 0.0;
  int n = 0;
  double relative_difference = 0.0;
};
/// ring.json.
RingOutcome cmd_ring(const RunConfig& rc, const std::string& suffix, std::ostream& out);

struct DiscreteBranchRow {
  double r = 0.0;
  double R = 0.0;
  double chi = 0.0;
  double eccentricity = 0.0;
};
struct BranchOutcome {
  EquilibriumBranch continuous;
  std::vector<DiscreteBranchRow> discrete;  // stops where the discrete branch ends
};
/// branch.csv (continuous) and branch_discrete.csv.
BranchOutcome cmd_ellipse_branch(const RunConfig& rc, const std::string& suffix, std::ostream& out);

/// stability.csv, one row per chi value.
std::vector<SweepRow> cmd_stability(const RunConfig& rc, const std::string& suffix, std::ostream& out);

/// threshold.json.
ThresholdResult cmd_line_threshold(const RunConfig& rc, const std::string& suffix, std::ostream& out);

struct StripeOutcome {
  double value = 0.0;
  bool equilibrium = false;  // |value| <= stripe.tol
};
/// stripe.json.
StripeOutcome cmd_stripe(const RunConfig& rc, const std::string& suffix, std::ostream& out);

/// pattern.json for the positions in classify.input (last snapshot).
PatternSummary cmd_classify(const RunConfig& rc, const std::string& suffix, std::ostream& out);

/// Exit status for a library error: 2 configuration, 3 runtime, 4 solver.
int exit_code_for(ErrorCode code);

/// Expands the sweep, echoes each effective config to config<suffix>.ini and
/// runs the named subcommand for every point. Returns the exit status;
/// diagnostics go to `err`.
int run_command(const std::string& name, const ConfigMap& map, std::ostream& out, std::ostream& err);

}  // namespace anisoswarm
