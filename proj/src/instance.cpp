#include "rbll/instance.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rbll {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::string tok;
  std::istringstream is(s);
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<std::string> parse_strings(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream is(s);
  while (std::getline(is, tok, ',')) out.push_back(trim(tok));
  return out;
}

}  // namespace

Instance parse_instance(const std::string& text) {
  Instance inst;
  int m = 0, d = 1;
  std::vector<double> coeffs;
  std::vector<std::string> labels;

  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "name") inst.name = val;
    else if (key == "m") m = std::stoi(val);
    else if (key == "d") d = std::stoi(val);
    else if (key == "coeffs") coeffs = parse_numbers(val);
    else if (key == "e") inst.e = parse_numbers(val);
    else if (key == "labels") labels = parse_strings(val);
    else if (key == "seed") inst.seed = std::stoull(val);
    else throw std::invalid_argument("instance: unknown key '" + key + "'");
  }
  if (m < 2) throw std::invalid_argument("instance: m >= 2 required");
  if (coeffs.empty() || coeffs.size() % m != 0)
    throw std::invalid_argument("instance: coeffs must hold J*m numbers");
  inst.fam.m = m;
  inst.fam.dim_d = d;
  inst.fam.coeffs = coeffs;
  const int J = inst.fam.J();
  if (static_cast<int>(inst.e.size()) != J)
    throw std::invalid_argument("instance: e must hold one measure per row");
  if (labels.empty())
    for (int j = 0; j < J; ++j) labels.push_back(std::to_string(j + 1));
  if (static_cast<int>(labels.size()) != J)
    throw std::invalid_argument("instance: label count mismatch");
  inst.fam.labels = labels;
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open instance file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_instance(ss.str());
}

std::string serialize_instance(const Instance& inst) {
  std::ostringstream os;
  char buf[64];
  os << "name = " << inst.name << "\n";
  os << "m = " << inst.fam.m << "\n";
  os << "d = " << inst.fam.dim_d << "\n";
  os << "coeffs = ";
  for (std::size_t i = 0; i < inst.fam.coeffs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", inst.fam.coeffs[i]);
    os << (i ? "," : "") << buf;
  }
  os << "\ne = ";
  for (std::size_t i = 0; i < inst.e.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", inst.e[i]);
    os << (i ? "," : "") << buf;
  }
  os << "\nlabels = ";
  for (std::size_t i = 0; i < inst.fam.labels.size(); ++i)
    os << (i ? "," : "") << inst.fam.labels[i];
  os << "\nseed = " << inst.seed << "\n";
  return os.str();
}

Instance rs_instance(std::vector<double> e, int d, const std::string& name) {
  Instance inst;
  inst.name = name;
  inst.fam = LinearFamily::riesz_sobolev(d);
  inst.e = std::move(e);
  return inst;
}

}  // namespace rbll
