#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "quadtomo/errors.hpp"
#include "quadtomo/measurement.hpp"

namespace quadtomo {

MeasurementSet MeasurementSet::empty(const ImagingModel& imaging, const std::vector<double>& times) {
  MeasurementSet m;
  m.imaging = imaging;
  m.times = times;
  const int np = imaging.pixelCount;
  const int ref = imaging.referenceIndex;
  for (std::size_t i = 0; i < times.size(); ++i) {
    m.phi.push_back(Eigen::MatrixXd::Zero(np, np));
    m.stdError.push_back(Eigen::MatrixXd::Constant(np, np, std::numeric_limits<double>::quiet_NaN()));
    BoolMatrix inc = BoolMatrix::Constant(np, np, true);
    inc.row(ref).setConstant(false);
    inc.col(ref).setConstant(false);
    m.stdError.back().row(ref).setZero();
    m.stdError.back().col(ref).setZero();
    m.included.push_back(inc);
    m.sampleCounts.push_back(0);
  }
  return m;
}

void MeasurementSet::validate() const {
  const std::size_t nt = times.size();
  if (phi.size() != nt || stdError.size() != nt || included.size() != nt || sampleCounts.size() != nt) {
    throw DimensionError("measurement set arrays disagree on the number of times");
  }
  const int np = pixelCount();
  const int ref = imaging.referenceIndex;
  for (std::size_t i = 0; i < nt; ++i) {
    if (phi[i].rows() != np || phi[i].cols() != np || stdError[i].rows() != np || stdError[i].cols() != np ||
        included[i].rows() != np || included[i].cols() != np) {
      throw DimensionError("measurement matrices must be N_p x N_p");
    }
    for (int a = 0; a < np; ++a) {
      if (phi[i](a, ref) != 0.0 || phi[i](ref, a) != 0.0 || included[i](a, ref) || included[i](ref, a)) {
        throw DimensionError("reference pixel rows must be zero and excluded");
      }
      for (int b = 0; b < np; ++b) {
        if (phi[i](a, b) != phi[i](b, a)) throw DimensionError("measured correlations must be symmetric");
      }
    }
  }
}

int MeasurementSet::timeIndex(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-9) return static_cast<int>(i);
  }
  return -1;
}

MeasurementSet MeasurementSet::subset(const std::vector<int>& timeIndices) const {
  MeasurementSet m;
  m.imaging = imaging;
  for (int i : timeIndices) {
    if (i < 0 || i >= timeCount()) throw RangeError("time index " + std::to_string(i) + " out of range");
    m.times.push_back(times[i]);
    m.phi.push_back(phi[i]);
    m.stdError.push_back(stdError[i]);
    m.included.push_back(included[i]);
    m.sampleCounts.push_back(sampleCounts[i]);
  }
  return m;
}

std::string formatMeasurementCsv(const MeasurementSet& m, const std::string& headerComment) {
  std::ostringstream out;
  out << std::setprecision(17);
  if (!headerComment.empty()) out << headerComment << '\n';
  out << "t_ms,za_um,zb_um,phi,phi_std,n_sample\n";
  const int np = m.pixelCount();
  for (int i = 0; i < m.timeCount(); ++i) {
    for (int a = 0; a < np; ++a) {
      for (int b = a; b < np; ++b) {
        double value = m.phi[i](a, b);
        double err = m.stdError[i](a, b);
        if (!m.included[i](a, b)) {
          value = 0.0;
          err = 0.0;
        }
        if (std::isnan(err)) continue;
        out << m.times[i] << ',' << m.imaging.pixelPosition(a) << ',' << m.imaging.pixelPosition(b) << ','
            << value << ',' << err << ',' << m.sampleCounts[i] << '\n';
      }
    }
  }
  return out.str();
}

void writeMeasurementCsv(const std::string& path, const MeasurementSet& m, const std::string& headerComment) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << formatMeasurementCsv(m, headerComment);
  if (!f) throw IoError("failed writing " + path);
}

namespace {

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parseNumber(const std::string& s, int row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("cannot parse number '" + s + "'", row);
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) throw ParseError("trailing characters in '" + s + "'", row);
  return v;
}

}  // namespace

MeasurementSet parseMeasurementCsv(const std::string& text, const ImagingModel& imaging) {
  std::istringstream in(text);
  std::string line;
  int row = 0;
  bool sawHeader = false;
  struct Entry {
    int a, b;
    double phi, err;
    int n;
  };
  std::map<double, std::vector<Entry>> byTime;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!sawHeader) {
      if (line != "t_ms,za_um,zb_um,phi,phi_std,n_sample") throw ParseError("unexpected header '" + line + "'", row);
      sawHeader = true;
      continue;
    }
    const auto f = splitCsv(line);
    if (f.size() != 6) throw ParseError("expected 6 fields, found " + std::to_string(f.size()), row);
    const double t = parseNumber(f[0], row);
    const double za = parseNumber(f[1], row);
    const double zb = parseNumber(f[2], row);
    Entry e{imaging.pixelIndexOf(za), imaging.pixelIndexOf(zb), parseNumber(f[3], row), parseNumber(f[4], row),
            static_cast<int>(parseNumber(f[5], row))};
    if (e.a < 0 || e.b < 0) throw ParseError("position is not on the configured pixel grid", row);
    if (!std::isfinite(t) || !std::isfinite(e.phi)) throw ParseError("non-finite time or correlation", row);
    byTime[t].push_back(e);
  }
  if (!sawHeader) throw ParseError("missing header line", row);

  std::vector<double> times;
  for (const auto& [t, entries] : byTime) times.push_back(t);
  MeasurementSet m = MeasurementSet::empty(imaging, times);
  const int ref = imaging.referenceIndex;
  int i = 0;
  for (const auto& [t, entries] : byTime) {
    for (const Entry& e : entries) {
      m.sampleCounts[i] = std::max(m.sampleCounts[i], e.n);
      if (e.a == ref || e.b == ref) continue;
      const bool flagged = e.phi == 0.0 && e.err == 0.0;
      m.phi[i](e.a, e.b) = m.phi[i](e.b, e.a) = e.phi;
      m.stdError[i](e.a, e.b) = m.stdError[i](e.b, e.a) = e.err;
      m.included[i](e.a, e.b) = m.included[i](e.b, e.a) = !flagged;
    }
    ++i;
  }
  return m;
}

MeasurementSet readMeasurementCsv(const std::string& path, const ImagingModel& imaging) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parseMeasurementCsv(buf.str(), imaging);
}

}  // namespace quadtomo
