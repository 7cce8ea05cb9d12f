#include "noon/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace noon::io {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string() + " for reading");
  }
  return in;
}

}  // namespace

void write_scan_csv(const sim::ScanDataset& data, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << data.axis_label << ",rep_index,counts\n";
  for (std::size_t i = 0; i < data.axis.size(); ++i) {
    for (std::size_t r = 0; r < data.counts[i].size(); ++r) {
      out << fmt_double(data.axis[i]) << "," << r << ","
          << fmt_double(data.counts[i][r]) << "\n";
    }
  }
}

sim::ScanDataset read_scan_csv(const std::filesystem::path& path, const json& sidecar) {
  auto in = open_in(path);
  sim::ScanDataset ds;
  ds.config = sidecar.at("config").get<sim::ScanConfig>();
  ds.axis_label = sidecar.at("axis_label").get<std::string>();
  ds.accidentals_subtracted = sidecar.at("accidentals_subtracted").get<bool>();

  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string axis_s, rep_s, count_s;
    if (!std::getline(row, axis_s, ',') || !std::getline(row, rep_s, ',') ||
        !std::getline(row, count_s)) {
      throw std::runtime_error("malformed row in " + path.string() + ": " + line);
    }
    const double axis = std::stod(axis_s);
    const double count = std::stod(count_s);
    if (ds.axis.empty() || axis != ds.axis.back()) {
      ds.axis.push_back(axis);
      ds.counts.emplace_back();
    }
    ds.counts.back().push_back(count);
  }
  ds.validate();
  return ds;
}

void write_fringe_csv(const sim::ScanDataset& data, const est::FringeFit& fit,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  out << data.axis_label << ",mean,variance,std,fit\n";
  for (std::size_t i = 0; i < data.axis.size(); ++i) {
    const double var = data.sample_variance(i);
    out << fmt_double(data.axis[i]) << "," << fmt_double(data.mean(i)) << ","
        << fmt_double(var) << "," << fmt_double(std::sqrt(var)) << ","
        << fmt_double(fit.eval(data.axis[i])) << "\n";
  }
}

json scan_sidecar(const sim::ScanDataset& data) {
  json j;
  j["config"] = data.config;
  j["axis_label"] = data.axis_label;
  j["accidentals_subtracted"] = data.accidentals_subtracted;
  j["n_axis_points"] = data.axis.size();
  return j;
}

json fit_report(const est::FringeFit& fit) {
  json j;
  j["amplitude"] = fit.amplitude;
  j["phase_offset_rad"] = fit.phase_offset;
  j["offset"] = fit.offset;
  j["visibility"] = fit.visibility;
  j["visibility_se"] = fit.visibility_se;
  j["n_photons"] = fit.n_photons;
  j["ell"] = fit.ell;
  j["period_deg"] = fit.period_deg();
  j["fitted_period_deg"] = fit.fitted_period_deg;
  j["weighted_rss"] = fit.weighted_rss;
  j["gradient_norm"] = fit.gradient_norm;
  j["iterations"] = fit.iterations;
  std::vector<std::vector<double>> cov(3, std::vector<double>(3));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cov[r][c] = fit.covariance(r, c);
  }
  j["covariance"] = cov;
  return j;
}

json state_to_json(const fock::TwoModeFockState& state) {
  json j;
  j["n_photons"] = state.n_photons();
  j["ell"] = state.ell();
  std::vector<double> re, im;
  for (const auto& a : state.amplitudes()) {
    re.push_back(a.real());
    im.push_back(a.imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

fock::TwoModeFockState state_from_json(const json& j) {
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size()) {
    throw std::runtime_error("state fixture re[] and im[] lengths differ");
  }
  const int n = j.at("n_photons").get<int>();
  if (re.size() != static_cast<std::size_t>(n) + 1) {
    throw std::runtime_error("state fixture amplitude length does not match N+1");
  }
  std::vector<fock::cplx> amps(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) amps[i] = {re[i], im[i]};
  return fock::TwoModeFockState(j.at("ell").get<int>(), std::move(amps));
}

void write_json(const json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  return json::parse(in);
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string() + " for digest");
  }
  std::uint64_t h = 0xcbf29ce484222325ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string scheme_name(sim::ProjectionScheme scheme) {
  return scheme == sim::ProjectionScheme::Orthogonal ? "orthogonal" : "identical";
}

sim::ProjectionScheme scheme_from_name(const std::string& name) {
  if (name == "orthogonal") return sim::ProjectionScheme::Orthogonal;
  if (name == "identical") return sim::ProjectionScheme::Identical;
  throw std::runtime_error("unknown projection scheme: " + name);
}

}  // namespace noon::io

namespace noon::sim {

using nlohmann::json;

void to_json(json& j, const SourceModel& s) {
  j = json{{"pair_rate_hz", s.pair_rate_hz},
           {"indistinguishability", s.indistinguishability},
           {"coherence_sigma_fs", s.coherence_sigma_fs},
           {"heralded", s.heralded}};
  if (s.delay_fs) j["delay_fs"] = *s.delay_fs;
}

void from_json(const json& j, SourceModel& s) {
  s = SourceModel{};
  j.at("pair_rate_hz").get_to(s.pair_rate_hz);
  j.at("indistinguishability").get_to(s.indistinguishability);
  j.at("coherence_sigma_fs").get_to(s.coherence_sigma_fs);
  j.at("heralded").get_to(s.heralded);
  if (j.contains("delay_fs")) s.delay_fs = j["delay_fs"].get<double>();
}

void to_json(json& j, const LossModel& l) {
  j = json{{"channel_eta", l.channel_eta},
           {"detector_eta1", l.detector_eta1},
           {"detector_eta2", l.detector_eta2},
           {"coincidence_window_ns", l.coincidence_window_ns},
           {"dark_rate_hz", l.dark_rate_hz}};
}

void from_json(const json& j, LossModel& l) {
  j.at("channel_eta").get_to(l.channel_eta);
  j.at("detector_eta1").get_to(l.detector_eta1);
  j.at("detector_eta2").get_to(l.detector_eta2);
  j.at("coincidence_window_ns").get_to(l.coincidence_window_ns);
  j.at("dark_rate_hz").get_to(l.dark_rate_hz);
}

void to_json(json& j, const ScanConfig& c) {
  j = json{{"n_photons", c.n_photons},
           {"ell", c.ell},
           {"scheme", io::scheme_name(c.scheme)},
           {"integration_time_s", c.integration_time_s},
           {"repetitions", c.repetitions},
           {"subtract_accidentals", c.subtract_accidentals}};
}

void from_json(const json& j, ScanConfig& c) {
  j.at("n_photons").get_to(c.n_photons);
  j.at("ell").get_to(c.ell);
  c.scheme = io::scheme_from_name(j.at("scheme").get<std::string>());
  j.at("integration_time_s").get_to(c.integration_time_s);
  j.at("repetitions").get_to(c.repetitions);
  j.at("subtract_accidentals").get_to(c.subtract_accidentals);
}

}  // namespace noon::sim
