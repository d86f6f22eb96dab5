#pragma once

#include <optional>
#include <string>

#include "phaselab/injectivity.hpp"
#include "phaselab/stability_avg.hpp"
#include "phaselab/stability_worst.hpp"
#include "phaselab/types.hpp"

namespace phaselab {

// "%.17g" rendering: shortest form that round-trips doubles exactly.
// Non-finite values render as "null".
std::string json_double(double v);

MeasurementEnsemble parse_ensemble_json(const std::string& text);
MeasurementEnsemble load_ensemble(const std::string& path);
std::string ensemble_to_json(const MeasurementEnsemble& Phi);
void save_ensemble(const MeasurementEnsemble& Phi, const std::string& path);

// JSON array of numbers or [re, im] pairs.
Eigen::VectorXcd parse_theta_json(const std::string& text);
Eigen::VectorXcd load_theta(const std::string& path);

std::string verdict_to_json(const InjectivityVerdict& v);
std::string scp_report_to_json(const SCPReport& rep);
std::string scp_bound_to_json(const SCPBound& bound);
std::string lipschitz_report_to_json(const LipschitzReport& rep);
std::string fisher_report_to_json(const FisherReport& rep,
                                  std::optional<double> mc_discrepancy = std::nullopt,
                                  std::optional<std::uint64_t> mc_trials = std::nullopt);
std::string bounds_to_json(int M);

std::string points_csv(const GaussianExperimentResult& result);
std::string summary_csv(const GaussianExperimentResult& result);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace phaselab
