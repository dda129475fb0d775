#pragma once

// Result persistence: CSV exports, binary density snapshots, the run
// manifest and gnuplot-ready plot data.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "levyml/fp_solver.hpp"
#include "levyml/mlt.hpp"
#include "levyml/model.hpp"

namespace levyml {

std::string cycle_csv(const LimitCycle& cycle);          // v,w
std::string fixed_point_csv(const FixedPoint& fp);       // v,w,re1,im1,re2,im2,stability
std::string density_csv(const DensityField& field, const Domain& domain);  // i,j,v,w,p
std::string mlt_csv(const MLTrajectory& mlt);            // t,v,w,pmax
std::string phase_diagram_csv(const PhaseDiagram& pd);   // alpha,sigma,mark

// Binary density snapshot, little-endian:
//   char[8]  magic "LVMLDEN1"
//   u32      J
//   u32      nx
//   u32      ny
//   u32      reserved (0)
//   f64      time, alpha, sigma
//   f64      domain v_min, v_max, w_min, w_max
//   f64[nx*ny] values, i fastest (value(i, j) at i + nx * j)
struct SnapshotHeader {
  std::uint32_t J = 0;
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  double time = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  Domain domain;
};

std::string density_binary(const DensityField& field, double alpha, double sigma, const Domain& domain);

struct Snapshot {
  SnapshotHeader header;
  DensityField field;
};

/// Throws ParseError on a bad magic or truncated payload.
Snapshot read_density_binary(const std::string& bytes);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Sole writer for one run directory. Every file goes through it so the
/// manifest can list each one with its checksum.
class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path dir);

  /// Writes `name` (relative, may contain subdirectories) and records it.
  void write(const std::string& name, const std::string& bytes);

  /// manifest.json: config echo, code version, start/finish timestamps and a
  /// sorted artifact list with byte counts and SHA-256.
  void write_manifest(const std::string& config_json, const std::vector<std::string>& warnings = {});

  const std::filesystem::path& dir() const { return dir_; }
  std::vector<std::string> files() const;

 private:
  struct Entry {
    std::string name;
    std::uintmax_t bytes = 0;
    std::string sha256;
  };
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
  std::string started_;
};

std::string code_version();

struct PlotStyle {
  std::string terminal = "pngcairo size 900,600";
};

/// Reads a CSV artifact produced above, recognised by its header line, and
/// writes `<stem>.dat` plus a `<stem>.gp` gnuplot stub through `writer`.
/// Throws UnknownArtifact for anything else.
void emit_plotdata(const std::filesystem::path& artifact, RunWriter& writer, const PlotStyle& style = {});

}  // namespace levyml
