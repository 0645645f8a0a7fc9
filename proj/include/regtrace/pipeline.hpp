#pragma once

#include <string>
#include <vector>

#include "regtrace/fourier.hpp"
#include "regtrace/scenario.hpp"
#include "regtrace/traces.hpp"

namespace regtrace {

struct CutRow {
  int p = 0;
  int n_p = 0;
  double b_p = 0.0;
  double gap_p = 0.0;
  double lhs1 = 0.0, err1 = 0.0;
  double lhs2 = 0.0, err2 = 0.0;
  double remainder = 0.0;
  double sum_sq_direct = 0.0;
  double second_moment_quad = 0.0;
  double closure_rel = 0.0;
  std::vector<double> dps_theorem1;   // s = 1..m at [s], base grid
  std::vector<double> dps_resolvent;  // s = 1..m at [s], base grid
  double d1_theorem1_fine = 0.0;
  double d1_resolvent_fine = 0.0;
  double d2_theorem1_fine = 0.0;
  double d2_resolvent_fine = 0.0;
  int nodes_fine = 0;
  int nodes_base = 0;
};

struct CheckRow {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct WeylReport {
  bool computed = false;
  WeylFit mu_fit;
  WeylFit lambda_fit;
  double target_beta = 0.0;
  std::size_t list_length = 0;
};

// Lazy verification pipeline shared by the CLI commands and the
// acceptance suite.  Every stage is computed once and cached; outputs
// are deterministic for a fixed scenario.
class Pipeline {
public:
  Pipeline(const RawModel& raw, const RunOptions& run);

  const SpectralModel& model() const { return model_; }
  const RunOptions& run_options() const { return run_; }
  int m() const { return m_; }
  double rhs1();
  double rhs2();

  const GalerkinSystem& system();
  const SpectrumResult& spectrum();
  const Subsequence& cuts();
  const TraceLedger& ledger();
  const std::vector<CutRow>& cut_rows();
  const std::vector<CheckRow>& checks();
  const WeylReport& weyl();
  int dropped_cuts();
  bool checks_pass();

  std::string validate_summary();
  std::string assemble_summary();
  std::string ledger_trace1_csv();
  std::string ledger_trace2_csv();
  std::string checks_csv();
  std::string weyl_csv();
  std::string report_json();

private:
  void add_check(const std::string& name, double measured, double tolerance);
  void run_checks();

  SpectralModel model_;
  RunOptions run_;
  int m_ = 2;

  bool have_rhs_ = false;
  RhsRoutes rhs1_routes_, rhs2_routes_;
  double rhs1_ = 0.0, rhs2_ = 0.0;

  bool have_system_ = false;
  GalerkinSystem system_;
  bool have_spectrum_ = false;
  SpectrumResult spectrum_;
  bool have_cuts_ = false;
  Subsequence cuts_;
  int dropped_cuts_ = 0;
  bool have_basic_ledger_ = false;
  bool have_full_ledger_ = false;
  TraceLedger ledger_;
  bool have_cut_rows_ = false;
  std::vector<CutRow> cut_rows_;
  bool have_checks_ = false;
  std::vector<CheckRow> checks_;
  bool have_weyl_ = false;
  WeylReport weyl_;
  AsymptoticConstants fitted_constants_;

  const TraceLedger& basic_ledger();
};

// Shortest-width decimal formatting with 17 significant digits;
// locale-independent (used for every CSV/JSON number).
std::string format_double(double v);

}  // namespace regtrace
