#include "anisoswarm/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace anisoswarm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileError, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::FileError, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::FileError, "cannot rename onto '" + path.string() + "'");
  }
}

std::string trajectory_csv(std::span<const ParticleState> snapshots) {
  std::string out = "t,id,x,y\n";
  for (const ParticleState& s : snapshots) {
    const std::string t = format_double(s.t);
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      out += t;
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += format_double(s.positions[i].x);
      out += ',';
      out += format_double(s.positions[i].y);
      out += '\n';
    }
  }
  return out;
}

std::vector<Vec2> read_positions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileError, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::FileError, "empty file '" + path.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,id,x,y") {
    throw Error(ErrorCode::InvalidConfig, "expected header 't,id,x,y' in '" + path.string() + "'");
  }
  std::map<long, Vec2> by_id;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    double fields[4];
    bool ok = true;
    for (int f = 0; f < 4 && ok; ++f) {
      fields[f] = std::strtod(p, &end);
      ok = end != p && (f == 3 || *end == ',');
      p = end + 1;
    }
    if (!ok) {
      throw Error(ErrorCode::InvalidConfig,
                  "malformed row at line " + std::to_string(lineno) + " of '" + path.string() + "'");
    }
    by_id[static_cast<long>(fields[1])] = {fields[2], fields[3]};
  }
  std::vector<Vec2> out;
  out.reserve(by_id.size());
  long expected = 0;
  for (const auto& [id, pos] : by_id) {
    if (id != expected++) throw Error(ErrorCode::InvalidConfig, "particle ids must be 0..N-1");
    out.push_back(pos);
  }
  return out;
}

std::string run_summary_json(const Trajectory& traj) {
  nlohmann::ordered_json j;
  j["termination"] = std::string(to_string(traj.termination));
  j["t_final"] = traj.t_final;
  j["max_speed_final"] = traj.max_speed_final;
  j["n_steps"] = traj.n_steps;
  j["wall_seconds"] = traj.wall_seconds;
  return j.dump(2) + "\n";
}

}  // namespace anisoswarm
