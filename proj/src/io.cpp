#include "esc/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace esc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

RecordTable load_records(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw std::runtime_error(path + ": missing header row");
  int L = static_cast<int>(split_csv(line).size());
  RecordTable t;
  t.L = L;
  t.domain.assign(L, 0);
  std::vector<std::unordered_map<std::string, int>> dict(L);
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      if (in.peek() == EOF) break;
      throw std::runtime_error(path + ": row " + std::to_string(row) + " is empty");
    }
    std::vector<std::string> cells = split_csv(line);
    if (static_cast<int>(cells.size()) != L)
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) +
                               " fields, expected " + std::to_string(L));
    for (int l = 0; l < L; ++l) {
      auto [it, inserted] = dict[l].try_emplace(cells[l], t.domain[l]);
      if (inserted) ++t.domain[l];
      t.codes.push_back(it->second);
    }
    ++t.n;
  }
  if (t.n == 0) throw std::runtime_error(path + ": no data rows");
  return t;
}

std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing header row");
  return split_csv(line);
}

Partition load_truth(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing header row");
  std::vector<std::string> header = split_csv(line);
  if (header.size() != 2 || header[0] != "record" || header[1] != "entity")
    throw std::runtime_error(path + ": expected header 'record,entity'");
  std::vector<std::pair<int, int>> rows;  // (record id, entity code)
  std::unordered_map<std::string, int> entities;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      if (in.peek() == EOF) break;
      throw std::runtime_error(path + ": row " + std::to_string(row) + " is empty");
    }
    std::vector<std::string> cells = split_csv(line);
    if (cells.size() != 2)
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               " needs 2 fields");
    int rec = 0;
    try {
      rec = std::stoi(cells[0]);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": bad record id '" + cells[0] + "'");
    }
    auto [it, inserted] =
        entities.try_emplace(cells[1], static_cast<int>(entities.size()) + 1);
    (void)inserted;
    rows.emplace_back(rec, it->second);
  }
  int n = static_cast<int>(rows.size());
  if (n == 0) throw std::runtime_error(path + ": no data rows");
  std::vector<int> alloc(n, 0);
  for (auto [rec, code] : rows) {
    if (rec < 1 || rec > n)
      throw std::runtime_error(path + ": record id " + std::to_string(rec) +
                               " outside 1.." + std::to_string(n));
    if (alloc[rec - 1] != 0)
      throw std::runtime_error(path + ": record id " + std::to_string(rec) +
                               " appears twice");
    alloc[rec - 1] = code;
  }
  return Partition::from_allocations(alloc);
}

void write_records_csv(const std::string& path, const RecordTable& records) {
  std::ofstream out = open_out(path);
  for (int l = 0; l < records.L; ++l)
    out << (l ? "," : "") << "f" << (l + 1);
  out << "\n";
  for (int i = 0; i < records.n; ++i) {
    for (int l = 0; l < records.L; ++l)
      out << (l ? "," : "") << records.at(i, l);
    out << "\n";
  }
}

void write_truth_csv(const std::string& path, const Partition& truth) {
  std::ofstream out = open_out(path);
  out << "record,entity\n";
  for (int i = 0; i < truth.n(); ++i)
    out << (i + 1) << "," << truth.allocations()[i] << "\n";
}

void write_trace(const std::string& path, const Trace& trace) {
  std::ofstream out = open_out(path);
  out << "# escmc-trace model=" << trace.model << " n=" << trace.n
      << " L=" << trace.L << " samples=" << trace.samples.size() << "\n";
  out << std::setprecision(17);
  for (const TraceSample& s : trace.samples) {
    out << s.iteration << " " << s.k << " " << s.r << " " << s.p;
    for (double b : s.beta) out << " " << b;
    for (int z : s.allocations) out << " " << z;
    out << "\n";
  }
}

Trace read_trace(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty trace file");
  std::istringstream hdr(line);
  std::string hash, tag;
  hdr >> hash >> tag;
  if (hash != "#" || tag != "escmc-trace")
    throw std::runtime_error(path + ": missing trace header");
  Trace trace;
  long declared = -1;
  std::string kv;
  while (hdr >> kv) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": bad header token '" + kv + "'");
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "model")
      trace.model = val;
    else if (key == "n")
      trace.n = std::stoi(val);
    else if (key == "L")
      trace.L = std::stoi(val);
    else if (key == "samples")
      declared = std::stol(val);
    else
      throw std::runtime_error(path + ": unknown header key '" + key + "'");
  }
  if (trace.n < 1 || trace.L < 0)
    throw std::runtime_error(path + ": header lacks n/L");
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      if (in.peek() == EOF) break;
      throw std::runtime_error(path + ": line " + std::to_string(row) + " is empty");
    }
    std::istringstream ls(line);
    TraceSample s;
    ls >> s.iteration >> s.k >> s.r >> s.p;
    s.beta.resize(trace.L);
    for (int l = 0; l < trace.L; ++l) ls >> s.beta[l];
    s.allocations.resize(trace.n);
    for (int i = 0; i < trace.n; ++i) ls >> s.allocations[i];
    int extra;
    if (!ls || (ls >> extra))
      throw std::runtime_error(path + ": line " + std::to_string(row) +
                               " is malformed");
    trace.samples.push_back(std::move(s));
  }
  if (declared >= 0 && declared != static_cast<long>(trace.samples.size()))
    throw std::runtime_error(path + ": header declares " +
                             std::to_string(declared) + " samples, found " +
                             std::to_string(trace.samples.size()));
  return trace;
}

namespace {

bool parse_bool(const std::string& key, const std::string& val) {
  if (val == "1" || val == "true" || val == "yes" || val == "on") return true;
  if (val == "0" || val == "false" || val == "no" || val == "off") return false;
  throw std::runtime_error("config key '" + key + "': bad boolean '" + val + "'");
}

double parse_num(const std::string& key, const std::string& val) {
  try {
    size_t used = 0;
    double x = std::stod(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad number '" + val + "'");
  }
}

long parse_int(const std::string& key, const std::string& val) {
  try {
    size_t used = 0;
    long x = std::stol(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad integer '" + val + "'");
  }
}

}  // namespace

ChainConfig parse_run_config(std::istream& in) {
  ChainConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line without '=': '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "model")
      cfg.model = val;
    else if (key == "iterations")
      cfg.iterations = parse_int(key, val);
    else if (key == "moves_per_iteration")
      cfg.partition_moves_per_iter = static_cast<int>(parse_int(key, val));
    else if (key == "burn_in")
      cfg.burn_in = parse_int(key, val);
    else if (key == "thin")
      cfg.thin = static_cast<int>(parse_int(key, val));
    else if (key == "full_scan_interval")
      cfg.full_scan_interval = static_cast<int>(parse_int(key, val));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, val));
    else if (key == "chains")
      cfg.chains = static_cast<int>(parse_int(key, val));
    else if (key == "beta") {
      cfg.beta_fixed.clear();
      std::istringstream bs(val);
      std::string tok;
      while (std::getline(bs, tok, ','))
        cfg.beta_fixed.push_back(parse_num(key, trim(tok)));
      if (cfg.beta_fixed.empty())
        throw std::runtime_error("config key 'beta': empty list");
    } else if (key == "infer_beta")
      cfg.beta_infer = parse_bool(key, val);
    else if (key == "beta_prior_mean")
      cfg.beta_prior_mean = parse_num(key, val);
    else if (key == "beta_prior_sd")
      cfg.beta_prior_sd = parse_num(key, val);
    else if (key == "chaperone_bias")
      cfg.chaperone_bias = parse_bool(key, val);
    else if (key == "fix_rp")
      cfg.fix_rp = parse_bool(key, val);
    else if (key == "prior_only")
      cfg.prior_only = parse_bool(key, val);
    else if (key == "r_init")
      cfg.r_init = parse_num(key, val);
    else if (key == "p_init")
      cfg.p_init = parse_num(key, val);
    else if (key == "theta_init")
      cfg.theta_init = parse_num(key, val);
    else if (key == "sigma_init")
      cfg.sigma_init = parse_num(key, val);
    else if (key == "py_sigma")
      cfg.py_sigma = parse_num(key, val);
    else if (key == "py_update_sigma")
      cfg.py_update_sigma = parse_bool(key, val);
    else if (key == "alpha")
      cfg.esc.alpha = parse_num(key, val);
    else if (key == "eta_r")
      cfg.esc.eta_r = parse_num(key, val);
    else if (key == "s_r")
      cfg.esc.s_r = parse_num(key, val);
    else if (key == "u_p")
      cfg.esc.u_p = parse_num(key, val);
    else if (key == "v_p")
      cfg.esc.v_p = parse_num(key, val);
    else if (key == "concentration_shape")
      cfg.concentration_shape = parse_num(key, val);
    else if (key == "concentration_rate")
      cfg.concentration_rate = parse_num(key, val);
    else if (key == "mu_truncation_min")
      cfg.mu_truncation_min = static_cast<int>(parse_int(key, val));
    else
      throw std::runtime_error("unknown config key '" + key + "'");
  }
  return cfg;
}

ChainConfig load_run_config(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_run_config(in);
}

}  // namespace esc
