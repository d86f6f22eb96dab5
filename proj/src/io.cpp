#include "phaselab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace phaselab {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_complex(std::string& out, const cplx& z) {
  out += '[';
  out += fmt(z.real());
  out += ',';
  out += fmt(z.imag());
  out += ']';
}

void append_complex_vector(std::string& out, const Eigen::VectorXcd& v) {
  out += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    append_complex(out, v(i));
  }
  out += ']';
}

void append_real_vector(std::string& out, const Eigen::VectorXd& v) {
  out += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += json_double(v(i));
  }
  out += ']';
}

void append_real_matrix(std::string& out, const Eigen::MatrixXd& A) {
  out += '[';
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (i) out += ',';
    append_real_vector(out, A.row(i));
  }
  out += ']';
}

void append_int_vector(std::string& out, const std::vector<int>& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  out += ']';
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        out += c;
    }
  }
  return out;
}

cplx parse_entry(const json& e, const char* what) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    return {e[0].get<double>(), e[1].get<double>()};
  }
  throw input_error(std::string(what) + ": entries must be numbers or [re, im] pairs");
}

}  // namespace

std::string json_double(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt(v);
}

MeasurementEnsemble parse_ensemble_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("ensemble: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw input_error("ensemble: top level must be an object");
  if (!j.contains("field") || !j["field"].is_string()) {
    throw input_error("ensemble: missing string field \"field\"");
  }
  const std::string field = j["field"].get<std::string>();
  if (field != "real" && field != "complex") {
    throw input_error("ensemble: field must be \"real\" or \"complex\"");
  }
  for (const char* key : {"M", "N"}) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 1) {
      throw input_error(std::string("ensemble: \"") + key + "\" must be a positive integer");
    }
  }
  const Eigen::Index M = j["M"].get<Eigen::Index>();
  const Eigen::Index N = j["N"].get<Eigen::Index>();
  if (!j.contains("columns") || !j["columns"].is_array()) {
    throw input_error("ensemble: missing array \"columns\"");
  }
  if (static_cast<Eigen::Index>(j["columns"].size()) != N) {
    throw input_error("ensemble: \"columns\" length disagrees with N");
  }
  Eigen::MatrixXcd cols(M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const json& col = j["columns"][static_cast<std::size_t>(n)];
    if (!col.is_array() || static_cast<Eigen::Index>(col.size()) != M) {
      throw input_error("ensemble: columns must be rectangular with M entries each");
    }
    for (Eigen::Index m = 0; m < M; ++m) {
      cols(m, n) = parse_entry(col[static_cast<std::size_t>(m)], "ensemble");
    }
  }
  if (field == "real" && cols.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw input_error("ensemble: field \"real\" with nonzero imaginary part");
  }
  MeasurementEnsemble e;
  e.field = field == "real" ? Field::Real : Field::Complex;
  e.columns = std::move(cols);
  return e;
}

MeasurementEnsemble load_ensemble(const std::string& path) {
  return parse_ensemble_json(read_file(path));
}

std::string ensemble_to_json(const MeasurementEnsemble& Phi) {
  std::string out = "{\"field\":\"";
  out += Phi.is_real() ? "real" : "complex";
  out += "\",\"M\":" + std::to_string(Phi.M()) + ",\"N\":" + std::to_string(Phi.N());
  out += ",\"columns\":[";
  for (Eigen::Index n = 0; n < Phi.N(); ++n) {
    if (n) out += ',';
    out += '[';
    for (Eigen::Index m = 0; m < Phi.M(); ++m) {
      if (m) out += ',';
      if (Phi.is_real()) {
        out += fmt(Phi.columns(m, n).real());
      } else {
        append_complex(out, Phi.columns(m, n));
      }
    }
    out += ']';
  }
  out += "]}";
  return out;
}

void save_ensemble(const MeasurementEnsemble& Phi, const std::string& path) {
  write_file(path, ensemble_to_json(Phi) + "\n");
}

Eigen::VectorXcd parse_theta_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("theta: malformed JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw input_error("theta: must be a nonempty array");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_entry(j[i], "theta");
  }
  return v;
}

Eigen::VectorXcd load_theta(const std::string& path) { return parse_theta_json(read_file(path)); }

std::string verdict_to_json(const InjectivityVerdict& v) {
  std::string out = "{\"status\":\"";
  out += to_string(v.status);
  out += "\",\"method\":\"" + escape(v.method) + "\"";
  out += ",\"nullity\":" + std::to_string(v.nullity);
  if (v.witness) {
    out += ",\"witness\":{\"x\":";
    append_complex_vector(out, v.witness->x);
    out += ",\"y\":";
    append_complex_vector(out, v.witness->y);
    out += '}';
  }
  if (v.subset) {
    out += ",\"subset\":{\"indices\":";
    append_int_vector(out, v.subset->subset);
    out += ",\"mask\":" + std::to_string(v.subset->mask);
    out += std::string(",\"spans_subset\":") + (v.subset->spans_subset ? "true" : "false");
    out += std::string(",\"spans_complement\":") +
           (v.subset->spans_complement ? "true" : "false");
    out += '}';
  }
  if (!v.reason.empty()) out += ",\"reason\":\"" + escape(v.reason) + "\"";
  out += ",\"diagnostics\":{\"rank_floor\":" + json_double(v.rank_floor);
  out += ",\"det_tol\":" + json_double(v.det_tol) + "}}";
  return out;
}

std::string scp_report_to_json(const SCPReport& rep) {
  std::string out = "{\"exact\":true";
  out += ",\"sigma\":" + json_double(rep.sigma);
  out += ",\"sigma_sq\":" + json_double(rep.sigma_sq);
  out += ",\"witness_subset\":";
  append_int_vector(out, rep.witness_subset);
  out += ",\"witness_mask\":" + std::to_string(rep.witness_mask);
  out += ",\"lambda_S\":" + json_double(rep.lambda_S);
  out += ",\"lambda_Sc\":" + json_double(rep.lambda_Sc);
  out += ",\"subsets_examined\":" + std::to_string(rep.subsets_examined) + "}";
  return out;
}

std::string scp_bound_to_json(const SCPBound& bound) {
  std::string out = "{\"exact\":false";
  out += ",\"sigma_upper\":" + json_double(bound.sigma_upper);
  out += ",\"sigma_sq_upper\":" + json_double(bound.sigma_sq_upper);
  out += ",\"witness_subset\":";
  append_int_vector(out, bound.witness_subset);
  out += ",\"witness_mask\":" + std::to_string(bound.witness_mask);
  out += ",\"lambda_S\":" + json_double(bound.lambda_S);
  out += ",\"lambda_Sc\":" + json_double(bound.lambda_Sc);
  out += ",\"subsets_examined\":" + std::to_string(bound.subsets_examined) + "}";
  return out;
}

std::string lipschitz_report_to_json(const LipschitzReport& rep) {
  std::string out = "{\"beta\":" + json_double(rep.beta);
  out += ",\"sigma\":" + json_double(rep.sigma);
  out += ",\"alpha_lower\":" + json_double(rep.alpha_lower);
  out += ",\"alpha_upper\":" + json_double(rep.alpha_upper);
  out += std::string(",\"stability_finite\":") + (rep.stability_finite ? "true" : "false");
  out += ",\"stability_constant_upper\":";
  out += rep.stability_finite ? json_double(rep.stability_constant_upper) : "null";
  out += ",\"sampled_min_ratio\":";
  out += rep.sampled ? json_double(rep.sampled_min_ratio) : "null";
  out += ",\"sampled_max_ratio\":";
  out += rep.sampled ? json_double(rep.sampled_max_ratio) : "null";
  out += ",\"scp\":" + scp_report_to_json(rep.scp) + "}";
  return out;
}

std::string fisher_report_to_json(const FisherReport& rep, std::optional<double> mc_discrepancy,
                                  std::optional<std::uint64_t> mc_trials) {
  std::string out = "{\"field\":\"";
  out += rep.field == Field::Real ? "real" : "complex";
  out += "\",\"noise_sigma\":" + json_double(rep.noise_sigma);
  out += ",\"theta\":";
  append_real_vector(out, rep.theta);
  out += ",\"J\":";
  append_real_matrix(out, rep.J);
  if (rep.field == Field::Complex) {
    out += ",\"J_reduced\":";
    append_real_matrix(out, rep.J_reduced);
  }
  out += std::string(",\"positive_definite\":") + (rep.positive_definite ? "true" : "false");
  out += ",\"condition\":" + json_double(rep.condition);
  out += std::string(",\"reliable\":") + (rep.reliable ? "true" : "false");
  out += ",\"crlb_trace\":";
  out += rep.crlb_trace ? json_double(*rep.crlb_trace) : "null";
  if (!rep.reason.empty()) out += ",\"reason\":\"" + escape(rep.reason) + "\"";
  if (mc_discrepancy) {
    out += ",\"mc_discrepancy\":" + json_double(*mc_discrepancy);
    out += ",\"mc_trials\":" + std::to_string(mc_trials.value_or(0));
  }
  out += "}";
  return out;
}

std::string bounds_to_json(int M) {
  std::string out = "{\"M\":" + std::to_string(M);
  out += ",\"hmw\":" + std::to_string(hmw_lower_bound(M));
  out += ",\"conjecture_4m4\":" + std::to_string(4 * M - 4);
  out += std::string(",\"status\":\"") + ((M == 2 || M == 3) ? "proven" : "conjectured") + "\"}";
  return out;
}

std::string points_csv(const GaussianExperimentResult& result) {
  std::string out = "M,R,trial,log10_value\n";
  for (const GaussianPoint& p : result.points) {
    out += std::to_string(p.M) + "," + fmt(p.R) + "," + std::to_string(p.trial) + ",";
    out += p.finite ? fmt(p.log10_value) : "inf";
    out += '\n';
  }
  return out;
}

std::string summary_csv(const GaussianExperimentResult& result) {
  std::string out = "M,R,mean,curve_a,curve_b\n";
  for (const GaussianSummaryRow& r : result.summary) {
    out += std::to_string(r.M) + "," + fmt(r.R) + "," + fmt(r.mean) + "," + fmt(r.curve_a) +
           "," + fmt(r.curve_b) + '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write file: " + path);
  out << content;
  if (!out) throw input_error("failed writing file: " + path);
}

}  // namespace phaselab
