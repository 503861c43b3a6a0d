#pragma once

#include <filesystem>
#include <string>

#include "quadtomo/analysis.hpp"
#include "quadtomo/core_model.hpp"
#include "quadtomo/modes.hpp"
#include "quadtomo/synthesis.hpp"
#include "quadtomo/tomography.hpp"

namespace quadtomo {

// JSON documents. A non-empty `manifest` adds a "manifest" field carrying the run digest.
// Doubles are written with round-trip precision.

std::string modeBasisToJson(const ModeBasis& basis, const std::string& manifest = "");

std::string covarianceToJson(const CovarianceMatrix& v, const std::string& manifest = "");
CovarianceMatrix covarianceFromJson(const std::string& text);

// { V: {phiphi, phirho, rhorho}, theta, feasibility_margin, iterations, converged, input_times_ms, ... }
std::string resultToJson(const ReconstructionResult& result, const std::string& manifest = "");
ReconstructionResult resultFromJson(const std::string& text);

std::string thermalFitToJson(const ThermalFitResult& fit, const std::string& manifest = "");

// Two-column profile CSV `z_um,density_per_um` after `#` header lines.
std::string formatProfileCsv(const GpProfile& profile, const std::string& header = "");
GpProfile parseProfileCsv(const std::string& text);

// Shots of one time: `#` header with seed, time and spec, then `p0,...,p{N_p-1}` and one row per shot.
std::string formatProfileSamplesCsv(const PhaseProfileSamples& samples, int timeIndex, const std::string& header = "");

// Reassembles samples from per-time CSV texts (in time order).
PhaseProfileSamples parseProfileSamplesCsv(const std::vector<std::string>& texts);

std::string readTextFile(const std::filesystem::path& path);
void writeTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace quadtomo
