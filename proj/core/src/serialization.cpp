#include "quadtomo/serialization.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "quadtomo/errors.hpp"

namespace quadtomo {

using nlohmann::json;

namespace {

json matrixJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vectorJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrixFrom(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " is not an array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw ParseError(std::string(what) + " is not rectangular");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json covarianceJson(const CovarianceMatrix& v) {
  return json{{"modes", v.modeCount()},
              {"phiphi", matrixJson(v.phiPhi())},
              {"phirho", matrixJson(v.phiRho())},
              {"rhorho", matrixJson(v.rhoRho())},
              {"feasibility_margin", v.feasibilityMargin()}};
}

CovarianceMatrix covarianceFrom(const json& j) {
  const Eigen::MatrixXd pp = matrixFrom(j.at("phiphi"), "phiphi");
  const Eigen::MatrixXd pr = matrixFrom(j.at("phirho"), "phirho");
  const Eigen::MatrixXd rr = matrixFrom(j.at("rhorho"), "rhorho");
  const auto m = pp.rows();
  if (pp.cols() != m || pr.rows() != m || pr.cols() != m || rr.rows() != m || rr.cols() != m)
    throw DimensionError("covariance blocks must all be M x M");
  return CovarianceMatrix::fromBlocks(pp, pr, rr);
}

std::string dump(json& doc, const std::string& manifest) {
  if (!manifest.empty()) doc["manifest"] = manifest;
  return doc.dump(1) + "\n";
}

json parseDocument(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

std::vector<std::string> splitComma(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double number(const std::string& s, int row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("cannot parse number '" + s + "'", row);
  }
  if (used != s.size()) throw ParseError("trailing characters in '" + s + "'", row);
  return v;
}

void writeHeader(std::ostringstream& out, const std::string& header) {
  if (header.empty()) return;
  std::istringstream in(header);
  std::string line;
  while (std::getline(in, line)) out << (line.rfind('#', 0) == 0 ? "" : "# ") << line << '\n';
}

}  // namespace

std::string modeBasisToJson(const ModeBasis& basis, const std::string& manifest) {
  json doc{{"frequencies_rad_per_ms", vectorJson(basis.frequencies)},
           {"phi_wavefunctions", matrixJson(basis.phiWavefunctions)},
           {"rho_wavefunctions", matrixJson(basis.rhoWavefunctions)},
           {"delta_z_um", basis.deltaZ},
           {"n_zero_modes", basis.zeroModeCount},
           {"grid_um", vectorJson(basis.gridPoints)}};
  return dump(doc, manifest);
}

std::string covarianceToJson(const CovarianceMatrix& v, const std::string& manifest) {
  json doc = covarianceJson(v);
  return dump(doc, manifest);
}

CovarianceMatrix covarianceFromJson(const std::string& text) {
  try {
    return covarianceFrom(parseDocument(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed covariance: ") + e.what());
  }
}

std::string resultToJson(const ReconstructionResult& r, const std::string& manifest) {
  json doc{{"V", covarianceJson(r.v)},
           {"theta", r.theta},
           {"feasibility_margin", r.feasibilityMargin},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"input_times_ms", r.inputWindow},
           {"rank_deficient", r.rankDeficient},
           {"suppressed_unknowns", r.suppressedUnknowns},
           {"suppressed_modes", r.suppressedModes},
           {"penalty_changes", r.penaltyChanges},
           {"warnings", r.diagnostics.warnings}};
  return dump(doc, manifest);
}

ReconstructionResult resultFromJson(const std::string& text) {
  const json doc = parseDocument(text);
  try {
    ReconstructionResult r;
    r.v = covarianceFrom(doc.at("V"));
    r.theta = doc.at("theta").get<double>();
    r.feasibilityMargin = doc.at("feasibility_margin").get<double>();
    r.iterations = doc.at("iterations").get<int>();
    r.converged = doc.at("converged").get<bool>();
    r.inputWindow = doc.at("input_times_ms").get<std::vector<double>>();
    r.rankDeficient = doc.value("rank_deficient", false);
    r.suppressedUnknowns = doc.value("suppressed_unknowns", std::vector<int>{});
    r.suppressedModes = doc.value("suppressed_modes", std::vector<int>{});
    r.penaltyChanges = doc.value("penalty_changes", std::vector<int>{});
    r.diagnostics.warnings = doc.value("warnings", std::vector<std::string>{});
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed reconstruction result: ") + e.what());
  }
}

std::string thermalFitToJson(const ThermalFitResult& fit, const std::string& manifest) {
  json doc{{"T_nK", fit.temperature},
           {"J_hz", fit.couplingHz},
           {"residual", fit.residual},
           {"identifiable", fit.identifiable},
           {"warnings", fit.diagnostics.warnings}};
  if (fit.surface.size() > 0) {
    doc["surface"] = {{"T_nK", vectorJson(fit.temperatureGrid)},
                      {"J_hz", vectorJson(fit.couplingGridHz)},
                      {"residual", matrixJson(fit.surface)}};
  }
  return dump(doc, manifest);
}

std::string formatProfileCsv(const GpProfile& profile, const std::string& header) {
  std::ostringstream out;
  out << std::setprecision(17);
  writeHeader(out, header);
  out << "# half_length_um = " << profile.halfLength << ", atoms = " << profile.totalAtoms << '\n';
  out << "z_um,density_per_um\n";
  for (int i = 0; i < profile.size(); ++i) out << profile.gridPoints(i) << ',' << profile.density(i) << '\n';
  return out.str();
}

GpProfile parseProfileCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int row = 0;
  bool header = false;
  std::vector<double> z, n;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "z_um,density_per_um") throw ParseError("unexpected header '" + line + "'", row);
      header = true;
      continue;
    }
    const auto f = splitComma(line);
    if (f.size() != 2) throw ParseError("expected 2 fields", row);
    z.push_back(number(f[0], row));
    n.push_back(number(f[1], row));
  }
  if (z.size() < 2) throw ParseError("profile needs at least two rows", row);
  GpProfile p;
  p.gridPoints = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  p.density = Eigen::Map<Eigen::VectorXd>(n.data(), static_cast<Eigen::Index>(n.size()));
  const double dz = z[1] - z[0];
  p.halfLength = (z.back() - z.front() + dz) / 2.0;
  p.totalAtoms = p.integratedAtoms();
  p.validate();
  return p;
}

std::string formatProfileSamplesCsv(const PhaseProfileSamples& samples, int timeIndex, const std::string& header) {
  if (timeIndex < 0 || timeIndex >= static_cast<int>(samples.times.size()))
    throw RangeError("time index out of range");
  const Eigen::MatrixXd& p = samples.profiles[timeIndex];
  std::ostringstream out;
  out << std::setprecision(17);
  writeHeader(out, header);
  out << "# seed = " << samples.seed << '\n';
  out << "# t_ms = " << samples.times[timeIndex] << '\n';
  out << "# reference_pixel = " << samples.referenceIndex << '\n';
  if (!samples.generatingSpec.empty()) out << "# spec = " << samples.generatingSpec << '\n';
  for (Eigen::Index a = 0; a < p.cols(); ++a) out << (a ? "," : "") << 'p' << a;
  out << '\n';
  for (Eigen::Index s = 0; s < p.rows(); ++s) {
    for (Eigen::Index a = 0; a < p.cols(); ++a) out << (a ? "," : "") << p(s, a);
    out << '\n';
  }
  return out.str();
}

PhaseProfileSamples parseProfileSamplesCsv(const std::vector<std::string>& texts) {
  PhaseProfileSamples samples;
  for (const std::string& text : texts) {
    std::istringstream in(text);
    std::string line;
    int row = 0;
    bool header = false;
    bool haveTime = false;
    double t = 0.0;
    std::vector<std::vector<double>> shots;
    while (std::getline(in, line)) {
      ++row;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        key.erase(key.find_last_not_of(' ') + 1);
        const std::string value = line.substr(line.find_first_not_of(' ', eq + 1));
        if (key == "t_ms") {
          t = number(value, row);
          haveTime = true;
        } else if (key == "seed") {
          samples.seed = std::stoull(value);
        } else if (key == "reference_pixel") {
          samples.referenceIndex = static_cast<int>(number(value, row));
        } else if (key == "spec") {
          samples.generatingSpec = value;
        }
        continue;
      }
      if (!header) {
        if (line.rfind("p0", 0) != 0) throw ParseError("unexpected header '" + line + "'", row);
        header = true;
        continue;
      }
      std::vector<double> values;
      for (const auto& f : splitComma(line)) values.push_back(number(f, row));
      if (!shots.empty() && values.size() != shots.front().size()) throw ParseError("ragged profile row", row);
      shots.push_back(std::move(values));
    }
    if (!haveTime) throw ParseError("profile file lacks a '# t_ms = ' header");
    if (shots.empty()) throw ParseError("profile file has no shots");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(shots.size()), static_cast<Eigen::Index>(shots.front().size()));
    for (std::size_t s = 0; s < shots.size(); ++s)
      for (std::size_t a = 0; a < shots[s].size(); ++a) m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = shots[s][a];
    if (!samples.times.empty() && !(t > samples.times.back())) throw ParseError("profile files must be in time order");
    samples.times.push_back(t);
    samples.profiles.push_back(std::move(m));
  }
  return samples;
}

std::string readTextFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void writeTextFile(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace quadtomo
