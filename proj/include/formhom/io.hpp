#ifndef FORMHOM_IO_HPP
#define FORMHOM_IO_HPP

#include <json.hpp>
#include <ostream>
#include <string>

#include "formhom/dirichlet.hpp"

namespace formhom {

inline constexpr const char* kVersion = "1.0.0";

using Json = nlohmann::ordered_json;

/// FNV-1a hash of a canonical string; embedded in every output.
std::uint64_t fnv1a(const std::string& text);
std::string hashHex(std::uint64_t h);

Json toJson(const AhomEstimate& est);
Json toJson(const RateFit& fit);
Json toJson(const DualityReport& rep);
Json toJson(const FlatnessResult& res);
Json toJson(const TwoScaleReport& rep);
Json toJson(const OsCalibration& cal);
Json toJson(const CaccioppoliReport& rep);

/// One row per scalar observable: experiment, n_or_eps, quantity, value, stderr.
struct CsvWriter {
  std::ostream& os;
  explicit CsvWriter(std::ostream& s);
  void row(const std::string& experiment, double nOrEps, const std::string& quantity, double value,
           double stderr_);
};

/// Environment dump: cell_index,row,col,entry rows plus a JSON sidecar.
void dumpEnvironmentCsv(const Environment& env, std::ostream& os);
Json environmentSidecar(const EnsembleSpec& spec, int m, std::uint64_t seed);

/// Cochain dump: face_index,direction_set,pos0..pos{d-1},value with the
/// documented face ordering; direction_set prints 1-based axes joined by '|'.
void dumpCochainCsv(const Cochain& u, std::ostream& os);

/// Per-cell field dump: cell_index,direction_set,pos0..pos{d-1},value,
/// one row per (cell, component), cells in row-major order.
void dumpCellFieldCsv(const CellField& f, std::ostream& os);

std::string formatDouble(double v);

}  // namespace formhom

#endif
