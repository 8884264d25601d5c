#include "formhom/io.hpp"

#include <cstdio>

namespace formhom {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hashHex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string formatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

Json matrixRows(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (long i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

Json toJson(const AhomEstimate& est) {
  Json j;
  j["d"] = est.dim;
  j["r"] = est.degree;
  j["m"] = est.m;
  j["nsamples"] = est.nsamples;
  j["seed"] = est.seed;
  j["ahom"] = matrixRows(est.matrix);
  j["stderr"] = matrixRows(est.stderr_);
  j["condition_number"] = est.conditionNumber;
  j["spectrum_ok"] = est.spectrumOk;
  return j;
}

Json toJson(const RateFit& fit) {
  Json j;
  j["alpha"] = fit.allZero ? Json("infinity") : Json(fit.alpha);
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.rSquared;
  j["n_range"] = {fit.nFirst, fit.nLast};
  j["all_zero"] = fit.allZero;
  return j;
}

Json toJson(const DualityReport& rep) {
  Json j;
  j["primal"] = toJson(rep.primal);
  j["inverse"] = toJson(rep.inverse);
  j["duality_deviation"] = rep.deviationOpNorm;
  j["exchange_residual_mean"] = rep.exchangeResidualMean;
  j["exchange_residual_stderr"] = rep.exchangeResidualStderr;
  return j;
}

Json toJson(const FlatnessResult& res) {
  Json j;
  j["grad_term_mean"] = res.gradTermMean;
  j["grad_term_stderr"] = res.gradTermStderr;
  j["flux_term_mean"] = res.fluxTermMean;
  j["flux_term_stderr"] = res.fluxTermStderr;
  return j;
}

Json toJson(const TwoScaleReport& rep) {
  Json j;
  j["eps"] = rep.epsList;
  j["l2_errors"] = rep.l2Errors;
  j["hminus1_errors"] = rep.hminus1Errors;
  j["corrector_energy_errors"] = rep.correctorEnergyErrors;
  j["fitted_rate"] = rep.fittedRate;
  j["fitted_rate_hminus1"] = rep.fittedRateHminus1;
  j["samples_per_eps"] = rep.samplesPerEps;
  j["domain"] = "unit cube (cube domain substituted for the smooth-domain hypothesis)";
  return j;
}

Json toJson(const OsCalibration& cal) {
  Json j;
  j["C"] = cal.C;
  j["s"] = cal.s;
  j["nsamples"] = cal.nsamples;
  j["all_zero"] = cal.allZero;
  return j;
}

Json toJson(const CaccioppoliReport& rep) {
  Json j;
  j["ratios"] = rep.ratios;
  j["max_ratio"] = rep.maxRatio;
  j["mean_ratio"] = rep.meanRatio;
  j["dist_v_boundary"] = rep.distVBoundary;
  return j;
}

CsvWriter::CsvWriter(std::ostream& s) : os(s) { os << "experiment,n_or_eps,quantity,value,stderr\n"; }

void CsvWriter::row(const std::string& experiment, double nOrEps, const std::string& quantity,
                    double value, double stderr_) {
  os << experiment << ',' << formatDouble(nOrEps) << ',' << quantity << ',' << formatDouble(value)
     << ',' << formatDouble(stderr_) << '\n';
}

void dumpEnvironmentCsv(const Environment& env, std::ostream& os) {
  os << "cell_index,row,col,entry\n";
  for (long c = 0; c < env.grid.cellCount(); ++c) {
    auto M = env.cell(c);
    for (int i = 0; i < env.comps; ++i)
      for (int j = 0; j < env.comps; ++j)
        os << c << ',' << i << ',' << j << ',' << formatDouble(M(i, j)) << '\n';
  }
}

Json environmentSidecar(const EnsembleSpec& spec, int m, std::uint64_t seed) {
  Json j;
  j["spec"] = spec.describe();
  j["seed"] = seed;
  j["lambda"] = spec.lambda;
  j["d"] = spec.dim;
  j["r"] = spec.degree;
  j["m"] = m;
  return j;
}

void dumpCochainCsv(const Cochain& u, std::ostream& os) {
  const Grid& g = u.grid;
  os << "face_index,direction_set";
  for (int a = 0; a < g.dim; ++a) os << ",pos" << a;
  os << ",value\n";
  for (long f = 0; f < g.faceCount(u.degree); ++f) {
    int ds;
    Pos pos;
    g.faceDecode(u.degree, f, ds, pos);
    MultiIndex K = MultiIndex::fromRank(g.dim, u.degree, ds);
    os << f << ',';
    if (K.indices.empty()) os << '0';
    for (std::size_t i = 0; i < K.indices.size(); ++i)
      os << (i ? "|" : "") << (K.indices[i] + 1);
    for (int a = 0; a < g.dim; ++a) os << ',' << pos[a];
    os << ',' << formatDouble(u.values(f)) << '\n';
  }
}

void dumpCellFieldCsv(const CellField& f, std::ostream& os) {
  const Grid& g = f.grid;
  os << "cell_index,direction_set";
  for (int a = 0; a < g.dim; ++a) os << ",pos" << a;
  os << ",value\n";
  Pos cell{};
  for (long c = 0; c < g.cellCount(); ++c) {
    g.cellDecode(c, cell);
    for (int k = 0; k < f.values.cols(); ++k) {
      MultiIndex K = MultiIndex::fromRank(g.dim, f.degree, k);
      os << c << ',';
      if (K.indices.empty()) os << '0';
      for (std::size_t i = 0; i < K.indices.size(); ++i)
        os << (i ? "|" : "") << (K.indices[i] + 1);
      for (int a = 0; a < g.dim; ++a) os << ',' << cell[a];
      os << ',' << formatDouble(f.values(c, k)) << '\n';
    }
  }
}

}  // namespace formhom
