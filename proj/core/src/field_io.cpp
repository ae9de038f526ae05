#include <fstream>
#include <sstream>

#include "pinnflow/errors.hpp"
#include "pinnflow/oracle.hpp"

namespace pinnflow::oracle {

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open for writing: " + tmp.string());
    os << content;
    if (!os.good()) throw ConfigError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_field(const ReferenceField& ref, const std::filesystem::path& path) {
  ref.field.validate();
  std::ostringstream os;
  os.precision(17);
  os << "# pinnflow-field v1\n";
  os << "# case: " << (ref.case_name.empty() ? "unnamed" : ref.case_name) << "\n";
  os << "# re: " << ref.re << "\n";
  os << "# provenance: " << (ref.provenance == Provenance::Analytic ? "analytic" : "solver")
     << "\n";
  os << "# origin: " << ref.field.grid.origin.x << ' ' << ref.field.grid.origin.y << "\n";
  os << "# dx: " << ref.field.grid.dx << "\n";
  os << "# nx: " << ref.field.grid.nx << "\n";
  os << "# ny: " << ref.field.grid.ny << "\n";
  os << "# arrangement: "
     << (ref.field.arrangement == sampling::Arrangement::CellCentered ? "cell-centered"
                                                                      : "node-centered")
     << "\n";
  os << "# steady_residual: " << ref.steady_residual << "\n";
  os << "# max_divergence: " << ref.max_divergence << "\n";
  os << "# iterations: " << ref.iterations << "\n";
  os << "x,y,u,v,p,mask\n";
  for (int j = 0; j < ref.field.grid.ny; ++j) {
    for (int i = 0; i < ref.field.grid.nx; ++i) {
      const int k = ref.field.index(i, j);
      const Vec2 pos = ref.field.pos(i, j);
      os << pos.x << ',' << pos.y << ',' << ref.field.u[k] << ',' << ref.field.v[k] << ','
         << ref.field.p[k] << ',' << static_cast<int>(ref.field.mask[k]) << "\n";
    }
  }
  atomic_write(path, os.str());
}

ReferenceField read_field(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open field file: " + path.string());
  ReferenceField ref;
  std::string line;
  bool have_dims = false;
  sampling::GridSpec grid;
  std::string arrangement = "cell-centered";

  const auto header_value = [](const std::string& l) {
    const auto pos = l.find(':');
    return pos == std::string::npos ? std::string() : l.substr(pos + 1);
  };

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("# case:") == 0) {
        std::istringstream v(header_value(line));
        v >> ref.case_name;
      } else if (line.find("# re:") == 0) {
        ref.re = std::stod(header_value(line));
      } else if (line.find("# provenance:") == 0) {
        std::string s;
        std::istringstream(header_value(line)) >> s;
        ref.provenance = s == "analytic" ? Provenance::Analytic : Provenance::Solver;
      } else if (line.find("# origin:") == 0) {
        std::istringstream v(header_value(line));
        v >> grid.origin.x >> grid.origin.y;
      } else if (line.find("# dx:") == 0) {
        grid.dx = std::stod(header_value(line));
      } else if (line.find("# nx:") == 0) {
        grid.nx = std::stoi(header_value(line));
      } else if (line.find("# ny:") == 0) {
        grid.ny = std::stoi(header_value(line));
        have_dims = true;
      } else if (line.find("# arrangement:") == 0) {
        std::istringstream(header_value(line)) >> arrangement;
      } else if (line.find("# steady_residual:") == 0) {
        ref.steady_residual = std::stod(header_value(line));
      } else if (line.find("# max_divergence:") == 0) {
        ref.max_divergence = std::stod(header_value(line));
      } else if (line.find("# iterations:") == 0) {
        ref.iterations = std::stoll(header_value(line));
      }
      continue;
    }
    if (line.rfind("x,y,", 0) == 0) break;  // column header
  }
  if (!have_dims) throw ConfigError("field file missing grid header: " + path.string());

  ref.field.grid = grid;
  ref.field.arrangement = arrangement == "node-centered"
                              ? sampling::Arrangement::NodeCentered
                              : sampling::Arrangement::CellCentered;
  ref.field.allocate();

  std::size_t row = 0;
  const std::size_t total = ref.field.size();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row >= total) throw ConfigError("field file has extra rows: " + path.string());
    std::istringstream cells(line);
    std::string tok;
    double vals[5];
    for (int c = 0; c < 5; ++c) {
      if (!std::getline(cells, tok, ',')) {
        throw ConfigError("field file row too short: " + path.string());
      }
      vals[c] = std::stod(tok);
    }
    if (!std::getline(cells, tok, ',')) {
      throw ConfigError("field file row too short: " + path.string());
    }
    ref.field.u[row] = vals[2];
    ref.field.v[row] = vals[3];
    ref.field.p[row] = vals[4];
    ref.field.mask[row] = static_cast<uint8_t>(std::stoi(tok));
    ++row;
  }
  if (row != total) throw ConfigError("field file truncated: " + path.string());
  return ref;
}

}  // namespace pinnflow::oracle
