#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "noon/estimation.hpp"
#include "noon/experiment.hpp"
#include "noon/fock.hpp"

// File formats shared by the CLI and the test fixtures. All floating-point
// output goes through a fixed "%.17g" round-trip so reruns from a stored
// config reproduce byte-identical files.

namespace noon::io {

using json = nlohmann::json;

std::string fmt_double(double v);  // %.17g

/// Dataset rows as CSV: <axis_label>,rep_index,counts.
void write_scan_csv(const sim::ScanDataset& data, const std::filesystem::path& path);
sim::ScanDataset read_scan_csv(const std::filesystem::path& path, const json& sidecar);

/// Per-angle summary: axis, mean, variance, std, fit model value.
void write_fringe_csv(const sim::ScanDataset& data, const est::FringeFit& fit,
                      const std::filesystem::path& path);

json scan_sidecar(const sim::ScanDataset& data);
json fit_report(const est::FringeFit& fit);

/// {n_photons, ell, re[], im[]} test-fixture form.
json state_to_json(const fock::TwoModeFockState& state);
fock::TwoModeFockState state_from_json(const json& j);

void write_json(const json& j, const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes; for reproducibility checks.
std::uint64_t file_digest(const std::filesystem::path& path);

std::string scheme_name(sim::ProjectionScheme scheme);
sim::ProjectionScheme scheme_from_name(const std::string& name);

}  // namespace noon::io

// ADL serializers live with the types they serialize.
namespace noon::sim {

void to_json(nlohmann::json& j, const SourceModel& s);
void from_json(const nlohmann::json& j, SourceModel& s);
void to_json(nlohmann::json& j, const LossModel& l);
void from_json(const nlohmann::json& j, LossModel& l);
void to_json(nlohmann::json& j, const ScanConfig& c);
void from_json(const nlohmann::json& j, ScanConfig& c);

}  // namespace noon::sim
