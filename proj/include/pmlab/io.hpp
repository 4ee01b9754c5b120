#pragma once

// Artifact emission: deterministic CSV writers, the versioned binary/CSV
// field snapshot formats, trajectory persistence with a JSON manifest, and
// the FNV-1a checksum used in manifests.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmlab/exponents.hpp"
#include "pmlab/functionals.hpp"
#include "pmlab/grid.hpp"
#include "pmlab/quadform.hpp"
#include "pmlab/solver.hpp"

namespace pmlab {

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fnv1a64_file: cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// round-trip-exact float formatting for reproducible CSV output
inline std::string format_scalar(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- CSV writers ------------------------------------------------------------

template <typename Scalar>
void write_region_csv(const std::filesystem::path& path, const RegionGrid<Scalar>& grid) {
  std::ofstream out(path);
  out << "alpha,p,class\n";
  for (std::size_t i = 0; i < grid.alphas.size(); ++i)
    for (std::size_t j = 0; j < grid.ps.size(); ++j)
      out << format_scalar(grid.alphas[i]) << ',' << format_scalar(grid.ps[j]) << ','
          << to_string(grid.at(i, j)) << '\n';
}

// per-w scan rows for Q(1, w): w, eig_min, eig_max, q11
template <typename Scalar>
void write_scan_csv(const std::filesystem::path& path, Scalar n, Scalar alpha, Scalar p,
                    Scalar w_min, Scalar w_max, int steps) {
  std::ofstream out(path);
  out << "w,eig_min,eig_max,q11\n";
  const Scalar lmin = std::log(w_min), lmax = std::log(w_max);
  for (int j = 0; j < steps; ++j) {
    Scalar w = steps == 1 ? w_min : std::exp(lmin + (lmax - lmin) * Scalar(j) / Scalar(steps - 1));
    if (j == steps - 1) w = w_max;
    const auto q = q_matrix(n, alpha, p, Scalar(1), w);
    const auto eig = q.eigenvalues();
    out << format_scalar(w) << ',' << format_scalar(eig[0]) << ',' << format_scalar(eig[1]) << ','
        << format_scalar(q.a11) << '\n';
  }
}

template <typename Scalar>
struct EquivalenceRow {
  Scalar n, alpha, p;
  RegionClass cls;
  Scalar min_scaled_eig;
  Scalar witness_w;
};

template <typename Scalar>
void write_equivalence_csv(const std::filesystem::path& path,
                           const std::vector<EquivalenceRow<Scalar>>& rows) {
  std::ofstream out(path);
  out << "n,alpha,p,class,min_scaled_eig,witness_w\n";
  for (const auto& r : rows)
    out << format_scalar(r.n) << ',' << format_scalar(r.alpha) << ',' << format_scalar(r.p) << ','
        << to_string(r.cls) << ',' << format_scalar(r.min_scaled_eig) << ','
        << format_scalar(r.witness_w) << '\n';
}

template <typename Scalar>
void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsRow<Scalar>>& rows) {
  std::ofstream out(path);
  out << "t,lyapunov,dissipation,cumulative_dissipation,balance_residual\n";
  for (const auto& r : rows)
    out << format_scalar(r.t) << ',' << format_scalar(r.lyapunov) << ','
        << format_scalar(r.dissipation) << ',' << format_scalar(r.cumulative_dissipation) << ','
        << format_scalar(r.balance_residual) << '\n';
}

// --- field snapshots ---------------------------------------------------------

// Binary snapshot, version 1: a 32-byte header
//   bytes 0-3   magic "PMLB"
//   bytes 4-7   u32 format version (1)
//   bytes 8-11  u32 dimension d
//   bytes 12-15 u32 cells per dimension N
//   bytes 16-23 f64 period L
//   bytes 24-31 f64 snapshot time
// followed by N^d little-endian f64 values, row-major.
inline constexpr std::uint32_t kSnapshotVersion = 1;

template <typename Scalar>
void write_snapshot_binary(const std::filesystem::path& path, const ScalarField<Scalar>& f,
                           Scalar time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_snapshot_binary: cannot open " + path.string());
  const char magic[4] = {'P', 'M', 'L', 'B'};
  const std::uint32_t version = kSnapshotVersion;
  const std::uint32_t d = static_cast<std::uint32_t>(f.grid.dim);
  const std::uint32_t n = static_cast<std::uint32_t>(f.grid.cells);
  const double L = double(f.grid.period);
  const double t = double(time);
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&L), 8);
  out.write(reinterpret_cast<const char*>(&t), 8);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    const double v = double(f.values[i]);
    out.write(reinterpret_cast<const char*>(&v), 8);
  }
}

template <typename Scalar = double>
ScalarField<Scalar> read_snapshot_binary(const std::filesystem::path& path, Scalar* time = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_snapshot_binary: cannot open " + path.string());
  char magic[4];
  std::uint32_t version = 0, d = 0, n = 0;
  double L = 0, t = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&L), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  if (!in || std::string(magic, 4) != "PMLB")
    throw std::runtime_error("read_snapshot_binary: bad magic in " + path.string());
  if (version != kSnapshotVersion)
    throw std::runtime_error("read_snapshot_binary: unsupported version");
  auto grid = TorusGrid<Scalar>::make(int(d), Eigen::Index(n), Scalar(L));
  auto f = ScalarField<Scalar>::zeros(grid);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    f.values[i] = Scalar(v);
  }
  if (!in) throw std::runtime_error("read_snapshot_binary: truncated file");
  if (time) *time = Scalar(t);
  return f;
}

// CSV snapshot: header "i,value" (d=1) or "i,j,value" (d=2), row-major.
template <typename Scalar>
void write_snapshot_csv(const std::filesystem::path& path, const ScalarField<Scalar>& f) {
  std::ofstream out(path);
  if (f.grid.dim == 1) {
    out << "i,value\n";
    for (Eigen::Index i = 0; i < f.grid.cells; ++i)
      out << i << ',' << format_scalar(f.values[i]) << '\n';
  } else {
    out << "i,j,value\n";
    for (Eigen::Index i = 0; i < f.grid.cells; ++i)
      for (Eigen::Index j = 0; j < f.grid.cells; ++j)
        out << i << ',' << j << ',' << format_scalar(f.at(i, j)) << '\n';
  }
}

// --- trajectory persistence ---------------------------------------------------

template <typename Scalar>
nlohmann::json solver_config_json(const SolverConfig<Scalar>& c) {
  return {{"m", c.params.m},
          {"dim", c.params.dim},
          {"cfl_fraction", c.cfl_fraction},
          {"t_end", c.t_end},
          {"sample_every", c.sample_every},
          {"epsilon_floor", c.epsilon_floor},
          {"variable", c.variable == SolveVariable::UAlpha ? "u" : "U"},
          {"alpha", c.alpha}};
}

// Directory layout: snap_<k>.f64 per sample plus trajectory.json with the
// config echo, times, and per-file checksums.
template <typename Scalar>
void write_trajectory(const std::filesystem::path& dir, const Trajectory<Scalar>& traj) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["config"] = solver_config_json(traj.config);
  manifest["grid"] = {{"dim", traj.grid().dim},
                      {"cells", traj.grid().cells},
                      {"period", traj.grid().period}};
  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.fields.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%06zu.f64", k);
    const auto path = dir / name;
    write_snapshot_binary(path, traj.fields[k], traj.times[k]);
    snaps.push_back({{"file", name},
                     {"time", traj.times[k]},
                     {"fnv1a64", hex64(fnv1a64_file(path))}});
  }
  manifest["snapshots"] = snaps;
  std::ofstream out(dir / "trajectory.json");
  out << manifest.dump(2) << '\n';
}

template <typename Scalar = double>
Trajectory<Scalar> read_trajectory(const std::filesystem::path& dir) {
  std::ifstream in(dir / "trajectory.json");
  if (!in) throw std::runtime_error("read_trajectory: no manifest in " + dir.string());
  nlohmann::json manifest;
  in >> manifest;
  Trajectory<Scalar> traj;
  const auto& cfgj = manifest.at("config");
  traj.config.params = DiffusionParams<Scalar>::from_m(Scalar(cfgj.at("m").get<double>()),
                                                       cfgj.at("dim").get<int>());
  traj.config.cfl_fraction = Scalar(cfgj.at("cfl_fraction").get<double>());
  traj.config.t_end = Scalar(cfgj.at("t_end").get<double>());
  traj.config.sample_every = Scalar(cfgj.at("sample_every").get<double>());
  traj.config.epsilon_floor = Scalar(cfgj.at("epsilon_floor").get<double>());
  traj.config.variable =
      cfgj.at("variable").get<std::string>() == "u" ? SolveVariable::UAlpha : SolveVariable::U;
  traj.config.alpha = Scalar(cfgj.at("alpha").get<double>());
  for (const auto& s : manifest.at("snapshots")) {
    Scalar t;
    traj.fields.push_back(read_snapshot_binary<Scalar>(dir / s.at("file").get<std::string>(), &t));
    traj.times.push_back(t);
  }
  return traj;
}

} // namespace pmlab
