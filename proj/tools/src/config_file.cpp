#include "locodl/cli/config_file.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "locodl/error.hpp"

namespace locodl::cli {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kMethodPrefix = "method:";

const std::set<std::string> kProblemKeys = {"source", "path", "name", "dim", "samples_per_client", "alpha",
                                             "clients", "kappa", "data_seed", "g_zero"};
const std::set<std::string> kRunKeys = {"seeds", "max_iterations", "stop_lyapunov_ratio", "stop_sqdist_ratio",
                                         "record_every", "record_rounds", "participation"};
const std::set<std::string> kMethodKeys = {"algorithm", "compressor", "k", "gamma", "chi", "rho", "p", "alpha"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

// Strips "key = value  # comment" trailing comments, which the INI reader keeps.
std::string value_of(const pt::ptree& node) {
  std::string v = node.get_value<std::string>();
  if (auto hash = v.find('#'); hash != std::string::npos) v = v.substr(0, hash);
  return trim(v);
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
    throw InputError("config [" + section + "] " + key + ": '" + v + "' is not a number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& section, const std::string& key, const std::string& v) {
  const double d = to_double(section, key, v);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
    throw InputError("config [" + section + "] " + key + ": '" + v + "' is not a nonnegative integer");
  }
  return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw InputError("config [" + section + "] " + key + ": '" + v + "' is not a boolean");
}

std::vector<std::uint64_t> to_seed_list(const std::string& v) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) seeds.push_back(to_uint("run", "seeds", item));
  }
  return seeds;
}

void check_keys(const std::string& section, const pt::ptree& node, const std::set<std::string>& allowed) {
  for (const auto& [key, child] : node) {
    if (!allowed.count(key)) throw InputError("config [" + section + "]: unknown key '" + key + "'");
  }
}

}  // namespace

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw InputError("sha1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

ConfigFile parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), "config: " + e.message());
  }

  ExperimentConfig base;
  std::vector<std::pair<std::string, const pt::ptree*>> method_nodes;
  bool have_problem = false;

  for (const auto& [section, node] : tree) {
    if (node.empty() && !node.data().empty()) {
      throw InputError("config: key '" + section + "' appears outside any section");
    }
    if (section == "problem") {
      have_problem = true;
      check_keys(section, node, kProblemKeys);
      for (const auto& [key, child] : node) {
        const std::string v = value_of(child);
        ProblemSource& src = base.source;
        if (key == "source") src.kind = parse_source_kind(v);
        else if (key == "path") src.path = (base_dir / v).lexically_normal().string();
        else if (key == "name") src.name = v;
        else if (key == "dim") src.dim = to_uint(section, key, v);
        else if (key == "samples_per_client") src.samples_per_client = to_uint(section, key, v);
        else if (key == "alpha") src.alpha = to_double(section, key, v);
        else if (key == "clients") base.clients = to_uint(section, key, v);
        else if (key == "kappa") base.kappa = to_double(section, key, v);
        else if (key == "data_seed") src.data_seed = to_uint(section, key, v);
        else if (key == "g_zero") src.g_zero = to_bool(section, key, v);
      }
    } else if (section == "run") {
      check_keys(section, node, kRunKeys);
      for (const auto& [key, child] : node) {
        const std::string v = value_of(child);
        if (key == "seeds") base.seeds = to_seed_list(v);
        else if (key == "max_iterations") base.stop.max_iterations = to_uint(section, key, v);
        else if (key == "stop_lyapunov_ratio") base.stop.lyapunov_ratio = to_double(section, key, v);
        else if (key == "stop_sqdist_ratio") base.stop.sqdist_ratio = to_double(section, key, v);
        else if (key == "record_every") base.record.every_iterations = to_uint(section, key, v);
        else if (key == "record_rounds") base.record.every_round = to_bool(section, key, v);
        else if (key == "participation") base.participation = to_double(section, key, v);
      }
    } else if (section.rfind(kMethodPrefix, 0) == 0) {
      const std::string label = trim(section.substr(kMethodPrefix.size()));
      if (label.empty()) throw InputError("config: method section needs a label, e.g. [method:locodl]");
      check_keys(section, node, kMethodKeys);
      method_nodes.emplace_back(label, &node);
    } else {
      throw InputError("config: unknown section [" + section + "]");
    }
  }
  if (!have_problem) throw InputError("config: missing [problem] section");
  if (method_nodes.empty()) throw InputError("config: no [method:<label>] section");

  ConfigFile file;
  file.text = text;
  file.content_hash = git_blob_hash(text);
  base.config_hash = file.content_hash;

  for (const auto& [label, node] : method_nodes) {
    MethodBlock block{label, base};
    ExperimentConfig& c = block.config;
    const std::string section = std::string(kMethodPrefix) + label;
    if (!node->count("algorithm")) throw InputError("config [" + section + "]: missing 'algorithm'");
    for (const auto& [key, child] : *node) {
      const std::string v = value_of(child);
      if (key == "algorithm") c.algorithm = parse_algorithm(v);
      else if (key == "compressor") c.compressor = parse_compressor_kind(v);
      else if (key == "k") c.k = v == "auto" ? std::nullopt : std::optional<std::size_t>(to_uint(section, key, v));
      else if (key == "gamma") c.overrides.gamma = to_double(section, key, v);
      else if (key == "chi") c.overrides.chi = to_double(section, key, v);
      else if (key == "rho") c.overrides.rho = to_double(section, key, v);
      else if (key == "p") c.overrides.p = to_double(section, key, v);
      else if (key == "alpha") c.overrides.alpha = to_double(section, key, v);
    }
    c.validate();
    file.methods.push_back(std::move(block));
  }
  return file;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  ConfigFile file = parse_config(buf.str(), path.parent_path());
  file.path = path;
  return file;
}

}  // namespace locodl::cli
