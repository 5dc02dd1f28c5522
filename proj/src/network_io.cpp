#include "wsr/network_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace wsr {

namespace {

constexpr const char* kMagic = "wsrnet";
constexpr int kVersion = 1;

std::string format_complex(Complex z) {
  return "(" + format_real(z.real()) + "," + format_real(z.imag()) + ")";
}

void write_matrix(std::ostream& out, const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_complex(m(i, j));
    }
    out << '\n';
  }
}

double parse_real(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ConfigError("network file: bad number '" + token + "'");
  return value;
}

long parse_int(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const long value = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') throw ConfigError("network file: bad integer '" + token + "'");
  return value;
}

Complex parse_complex(const std::string& token) {
  if (token.size() < 5 || token.front() != '(' || token.back() != ')') {
    throw ConfigError("network file: bad complex entry '" + token + "'");
  }
  const std::string body = token.substr(1, token.size() - 2);
  const auto comma = body.find(',');
  if (comma == std::string::npos) throw ConfigError("network file: bad complex entry '" + token + "'");
  return {parse_real(body.substr(0, comma)), parse_real(body.substr(comma + 1))};
}

// Line-oriented reader that skips blank lines and '#' comments.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    throw ConfigError("network file: unexpected end of input");
  }

  std::vector<std::string> expect(const std::string& keyword, std::size_t count) {
    auto tokens = next();
    if (tokens.empty() || tokens[0] != keyword || tokens.size() != count) {
      throw ConfigError("network file line " + std::to_string(line_no_) + ": expected '" + keyword + "' record");
    }
    return tokens;
  }

  CMatrix matrix(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto tokens = next();
      if (static_cast<Eigen::Index>(tokens.size()) != cols) {
        throw ConfigError("network file line " + std::to_string(line_no_) + ": expected " +
                          std::to_string(cols) + " entries");
      }
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = parse_complex(tokens[j]);
    }
    return m;
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::string scenario_record(const Scenario& sc) {
  std::ostringstream out;
  out << "scenario links=" << sc.links << " tx=" << sc.tx_antennas << " rx=" << sc.rx_antennas
      << " alpha=" << format_real(sc.interference_scale) << " weight_lo=" << format_real(sc.weight_lo)
      << " weight_hi=" << format_real(sc.weight_hi) << " mode=" << to_string(sc.mode)
      << " total_power=" << format_real(sc.total_power) << " budget_min=" << sc.budget_min
      << " budget_max=" << sc.budget_max << " cells=" << sc.cells
      << " cell_power=" << format_real(sc.cell_power);
  return out.str();
}

Scenario parse_scenario(const std::vector<std::string>& tokens) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos) throw ConfigError("network file: bad scenario field '" + tokens[i] + "'");
    kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(std::string("network file: scenario is missing '") + key + "'");
    return it->second;
  };
  Scenario sc;
  sc.links = static_cast<std::size_t>(parse_int(get("links")));
  sc.tx_antennas = parse_int(get("tx"));
  sc.rx_antennas = parse_int(get("rx"));
  sc.interference_scale = parse_real(get("alpha"));
  sc.weight_lo = parse_real(get("weight_lo"));
  sc.weight_hi = parse_real(get("weight_hi"));
  sc.mode = constraint_mode_from_string(get("mode"));
  sc.total_power = parse_real(get("total_power"));
  sc.budget_min = static_cast<int>(parse_int(get("budget_min")));
  sc.budget_max = static_cast<int>(parse_int(get("budget_max")));
  sc.cells = static_cast<std::size_t>(parse_int(get("cells")));
  sc.cell_power = parse_real(get("cell_power"));
  return sc;
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_network(std::ostream& out, const Network& net) {
  out << "format " << kMagic << ' ' << kVersion << '\n';
  if (net.seed) out << "seed " << *net.seed << '\n';
  if (net.scenario) out << scenario_record(*net.scenario) << '\n';
  out << "links " << net.num_links() << '\n';
  for (LinkId l = 0; l < net.num_links(); ++l) {
    const Link& link = net.link(l);
    out << "link " << l << " tx " << link.tx_antennas << " rx " << link.rx_antennas << " weight "
        << format_real(link.weight) << '\n';
  }
  for (LinkId l = 0; l < net.num_links(); ++l) {
    for (LinkId k = 0; k < net.num_links(); ++k) {
      const CMatrix& h = net.channel(l, k);
      out << "channel " << l << ' ' << k << " rows " << h.rows() << " cols " << h.cols() << '\n';
      write_matrix(out, h);
    }
  }
  out << "groups " << net.num_groups() << '\n';
  for (GroupId s = 0; s < net.num_groups(); ++s) {
    const ConstraintGroup& g = net.group(s);
    out << "group " << s << " members " << g.members.size() << '\n';
    for (std::size_t slot = 0; slot < g.members.size(); ++slot) {
      const HermitianMatrix& q = g.shaping[slot];
      out << "member " << g.members[slot] << " dim " << q.dim() << '\n';
      write_matrix(out, q.matrix());
    }
  }
  out << "end\n";
}

Network read_network(std::istream& in) {
  LineReader reader(in);
  auto header = reader.expect("format", 3);
  if (header[1] != kMagic || parse_int(header[2]) != kVersion) {
    throw ConfigError("network file: unsupported format '" + header[1] + " " + header[2] + "'");
  }

  std::optional<std::uint64_t> seed;
  std::optional<Scenario> scenario;
  auto tokens = reader.next();
  if (tokens[0] == "seed" && tokens.size() == 2) {
    seed = std::strtoull(tokens[1].c_str(), nullptr, 10);
    tokens = reader.next();
  }
  if (tokens[0] == "scenario") {
    scenario = parse_scenario(tokens);
    tokens = reader.next();
  }
  if (tokens[0] != "links" || tokens.size() != 2) throw ConfigError("network file: expected 'links' record");
  const long count = parse_int(tokens[1]);
  if (count <= 0) throw ConfigError("network file: link count must be positive");
  const auto n = static_cast<std::size_t>(count);

  std::vector<Link> links(n);
  for (std::size_t l = 0; l < n; ++l) {
    const auto rec = reader.expect("link", 8);
    if (parse_int(rec[1]) != static_cast<long>(l) || rec[2] != "tx" || rec[4] != "rx" || rec[6] != "weight") {
      throw ConfigError("network file: malformed link record");
    }
    links[l].tx_antennas = parse_int(rec[3]);
    links[l].rx_antennas = parse_int(rec[5]);
    links[l].weight = parse_real(rec[7]);
  }

  std::vector<std::vector<CMatrix>> channels(n, std::vector<CMatrix>(n));
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto rec = reader.expect("channel", 7);
      if (parse_int(rec[1]) != static_cast<long>(l) || parse_int(rec[2]) != static_cast<long>(k) ||
          rec[3] != "rows" || rec[5] != "cols") {
        throw ConfigError("network file: channels must be listed in (rx, tx) row-major order");
      }
      channels[l][k] = reader.matrix(parse_int(rec[4]), parse_int(rec[6]));
    }
  }

  const auto grec = reader.expect("groups", 2);
  const long num_groups = parse_int(grec[1]);
  if (num_groups < 0) throw ConfigError("network file: negative group count");
  std::vector<ConstraintGroup> groups(static_cast<std::size_t>(num_groups));
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const auto rec = reader.expect("group", 4);
    if (parse_int(rec[1]) != static_cast<long>(s) || rec[2] != "members") {
      throw ConfigError("network file: malformed group record");
    }
    const long members = parse_int(rec[3]);
    for (long i = 0; i < members; ++i) {
      const auto mrec = reader.expect("member", 4);
      if (mrec[2] != "dim") throw ConfigError("network file: malformed member record");
      const long link = parse_int(mrec[1]);
      const long dim = parse_int(mrec[3]);
      if (link < 0 || dim <= 0) throw ConfigError("network file: malformed member record");
      const CMatrix q = reader.matrix(dim, dim);
      if ((q - q.adjoint()).norm() != 0.0) throw ConfigError("network file: Q matrix is not Hermitian");
      groups[s].members.push_back(static_cast<LinkId>(link));
      groups[s].shaping.push_back(hermitize(q));
    }
  }
  reader.expect("end", 1);

  Network net(std::move(links), std::move(channels), std::move(groups));
  net.seed = seed;
  net.scenario = scenario;
  return net;
}

std::string network_to_string(const Network& net) {
  std::ostringstream out;
  write_network(out, net);
  return out.str();
}

Network network_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_network(in);
}

void save_network(const std::filesystem::path& path, const Network& net) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    write_network(out, net);
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return read_network(in);
}

}  // namespace wsr
