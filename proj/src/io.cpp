#include "levyml/io.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "levyml/error.hpp"

#ifndef LEVYML_VERSION
#define LEVYML_VERSION "unknown"
#endif

namespace levyml {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'L', 'V', 'M', 'L', 'D', 'E', 'N', '1'};

// Shortest text that reads back to the same double.
std::string num(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class T>
void put(std::string& out, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  out.append(raw, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorCode::ParseError, "snapshot is truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::string& header) {
  std::istringstream in(text);
  std::getline(in, header);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string cycle_csv(const LimitCycle& cycle) {
  std::string out = "v,w\n";
  for (const State& s : cycle.polyline) out += num(s.v) + "," + num(s.w) + "\n";
  return out;
}

std::string fixed_point_csv(const FixedPoint& fp) {
  std::string out = "v,w,re1,im1,re2,im2,stability\n";
  out += num(fp.location.v) + "," + num(fp.location.w);
  for (const auto& e : fp.eigenvalues) out += "," + num(e.real()) + "," + num(e.imag());
  out += fp.stability == Stability::Stable ? ",stable\n" : ",unstable\n";
  return out;
}

std::string density_csv(const DensityField& field, const Domain& domain) {
  const Grid grid{field.J, static_cast<int>(field.values.cols()) == 2 * field.J - 1
                               ? 0
                               : static_cast<int>(field.values.cols())};
  const AffineMap map(domain);
  std::string out = "i,j,v,w,p\n";
  for (int i = 0; i < grid.nx(); ++i)
    for (int j = 0; j < grid.rows_y(); ++j) {
      const State s = map.to_state({grid.x(i), grid.y(j)});
      out += std::to_string(i) + "," + std::to_string(j) + "," + num(s.v) + "," + num(s.w) + "," +
             num(field.values(i, j)) + "\n";
    }
  return out;
}

std::string mlt_csv(const MLTrajectory& mlt) {
  std::string out = "t,v,w,pmax\n";
  for (const MLTSample& s : mlt.samples)
    out += num(s.t) + "," + num(s.location.v) + "," + num(s.location.w) + "," + num(s.pmax) + "\n";
  return out;
}

std::string phase_diagram_csv(const PhaseDiagram& pd) {
  std::string out = "alpha,sigma,mark\n";
  for (const PhaseCell& c : pd.cells) out += num(c.alpha) + "," + num(c.sigma) + "," + mark_symbol(c.mark) + "\n";
  return out;
}

std::string density_binary(const DensityField& field, double alpha, double sigma, const Domain& domain) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.J));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.values.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.values.cols()));
  put<std::uint32_t>(out, 0);
  for (double x : {field.time, alpha, sigma, domain.a, domain.b, domain.c, domain.d}) put(out, x);
  // Eigen's default storage is column-major, which is the documented order.
  out.append(reinterpret_cast<const char*>(field.values.data()), sizeof(double) * field.values.size());
  return out;
}

Snapshot read_density_binary(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw Error(ErrorCode::ParseError, "not a density snapshot (bad magic)");
  std::size_t pos = sizeof kMagic;
  Snapshot s;
  s.header.J = take<std::uint32_t>(bytes, pos);
  s.header.nx = take<std::uint32_t>(bytes, pos);
  s.header.ny = take<std::uint32_t>(bytes, pos);
  take<std::uint32_t>(bytes, pos);
  s.header.time = take<double>(bytes, pos);
  s.header.alpha = take<double>(bytes, pos);
  s.header.sigma = take<double>(bytes, pos);
  s.header.domain.a = take<double>(bytes, pos);
  s.header.domain.b = take<double>(bytes, pos);
  s.header.domain.c = take<double>(bytes, pos);
  s.header.domain.d = take<double>(bytes, pos);
  const std::size_t n = std::size_t{s.header.nx} * s.header.ny;
  if (bytes.size() - pos != n * sizeof(double)) throw Error(ErrorCode::ParseError, "snapshot payload size mismatch");
  s.field.J = static_cast<int>(s.header.J);
  s.field.time = s.header.time;
  s.field.values.resize(s.header.nx, s.header.ny);
  std::memcpy(s.field.values.data(), bytes.data() + pos, n * sizeof(double));
  return s;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char b : digest) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    hex += buf;
  }
  return hex;
}

std::string code_version() { return LEVYML_VERSION; }

RunWriter::RunWriter(std::filesystem::path dir) : dir_(std::move(dir)), started_(utc_now()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir_.string() + ": " + ec.message());
}

void RunWriter::write(const std::string& name, const std::string& bytes) {
  const std::filesystem::path path = dir_ / name;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  const Entry e{name, bytes.size(), sha256_hex(bytes)};
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& x) { return x.name == name; });
  if (it == entries_.end()) {
    entries_.push_back(e);
  } else {
    *it = e;
  }
}

std::vector<std::string> RunWriter::files() const {
  std::vector<std::string> names;
  for (const Entry& e : entries_) names.push_back(e.name);
  std::sort(names.begin(), names.end());
  return names;
}

void RunWriter::write_manifest(const std::string& config_json, const std::vector<std::string>& warnings) {
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
  nlohmann::ordered_json artifacts = nlohmann::ordered_json::array();
  for (const Entry& e : sorted) artifacts.push_back({{"path", e.name}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  nlohmann::ordered_json doc = {
      {"code_version", code_version()},
      {"config", nlohmann::json::parse(config_json)},
      {"artifacts", artifacts},
      {"warnings", warnings},
      {"started", started_},
      {"finished", utc_now()},
  };
  const std::string text = doc.dump(2) + "\n";
  std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out.write(text.data(), static_cast<std::streamsize>(text.size())))
    throw Error(ErrorCode::Io, "cannot write manifest in " + dir_.string());
}

void emit_plotdata(const std::filesystem::path& artifact, RunWriter& writer, const PlotStyle& style) {
  const std::filesystem::path source = artifact.is_absolute() ? artifact : writer.dir() / artifact;
  std::string header;
  const auto rows = csv_rows(read_file(source), header);
  const std::string stem = "plot/" + artifact.stem().string();
  std::string data, script = "set terminal " + style.terminal + "\nset output '" + artifact.stem().string() + ".png'\n";
  const std::string dat = artifact.stem().string() + ".dat";

  if (header == "v,w") {
    data = "# v w\n";
    for (const auto& r : rows) data += r[0] + " " + r[1] + "\n";
    script += "set xlabel 'v (mV)'\nset ylabel 'w'\nplot '" + dat + "' using 1:2 with lines title '" +
              artifact.stem().string() + "'\n";
  } else if (header == "i,j,v,w,p") {
    // Long format, one blank line after each v column as pm3d expects.
    data = "# v w p\n";
    std::string last_i;
    for (const auto& r : rows) {
      if (!last_i.empty() && r[0] != last_i) data += "\n";
      last_i = r[0];
      data += r[2] + " " + r[3] + " " + r[4] + "\n";
    }
    script += "set xlabel 'v (mV)'\nset ylabel 'w'\nset view map\nset pm3d at b\nsplot '" + dat +
              "' using 1:2:3 with pm3d notitle\n";
  } else if (header == "t,v,w,pmax") {
    data = "# t v w\n";
    for (const auto& r : rows) data += r[0] + " " + r[1] + " " + r[2] + "\n";
    script += "set xlabel 'v (mV)'\nset ylabel 'w'\nplot '" + dat + "' using 2:3 with linespoints notitle\n";
  } else if (header == "alpha,sigma,mark") {
    // Three gnuplot index blocks: o, x, +.
    const char* names[3] = {"o", "x", "+"};
    for (int k = 0; k < 3; ++k) {
      data += std::string(k ? "\n\n" : "") + "# mark " + names[k] + ": alpha sigma\n";
      for (const auto& r : rows)
        if (r[2] == names[k]) data += r[0] + " " + r[1] + "\n";
    }
    script += "set xlabel 'alpha'\nset ylabel 'sigma'\nplot '" + dat + "' index 0 with points pt 6 title 'o', '" +
              dat + "' index 1 with points pt 2 title 'x', '" + dat + "' index 2 with points pt 1 title '+'\n";
  } else {
    throw Error(ErrorCode::UnknownArtifact, "no plot layout for " + artifact.string() + " (header '" + header + "')");
  }
  writer.write(stem + ".dat", data);
  writer.write(stem + ".gp", script);
}

}  // namespace levyml
