#include "locodl/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "locodl/error.hpp"
#include "locodl/random.hpp"

namespace locodl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
  // strtod handles "+1", "1e-3", "inf"; from_chars rejects a leading '+'.
  std::string buf(token);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return !buf.empty() && end == buf.c_str() + buf.size() && std::isfinite(out);
}

bool parse_index(std::string_view token, std::size_t& out) {
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  Dataset ds;
  std::vector<double> raw_labels;
  std::vector<std::size_t> label_lines;
  std::set<double> alphabet;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;

    SparseRow row;
    std::size_t pos = 0;
    bool first = true;
    while (pos < view.size()) {
      const auto next = view.find_first_of(" \t", pos);
      const auto token = view.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
      pos = next == std::string_view::npos ? view.size() : view.find_first_not_of(" \t", next);
      if (pos == std::string_view::npos) pos = view.size();
      if (token.empty()) continue;

      if (first) {
        double label = 0.0;
        if (!parse_double(token, label)) throw ParseError(line_no, "non-numeric label '" + std::string(token) + "'");
        row.label = label;
        first = false;
        continue;
      }
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "malformed feature '" + std::string(token) + "' (expected index:value)");
      }
      std::size_t index = 0;
      double value = 0.0;
      if (!parse_index(token.substr(0, colon), index) || index < 1) {
        throw ParseError(line_no, "bad feature index in '" + std::string(token) + "'");
      }
      if (!parse_double(token.substr(colon + 1), value)) {
        throw ParseError(line_no, "bad feature value in '" + std::string(token) + "'");
      }
      if (!row.indices.empty() && index - 1 <= row.indices.back()) {
        throw ParseError(line_no, "feature indices must be strictly increasing");
      }
      row.indices.push_back(index - 1);
      row.values.push_back(value);
      ds.dim = std::max(ds.dim, index);
    }
    alphabet.insert(row.label);
    label_lines.push_back(line_no);
    ds.rows.push_back(std::move(row));
  }

  const bool plus_minus = std::all_of(alphabet.begin(), alphabet.end(), [](double b) { return b == 1.0 || b == -1.0; });
  const bool zero_one = std::all_of(alphabet.begin(), alphabet.end(), [](double b) { return b == 0.0 || b == 1.0; });
  if (!plus_minus && !zero_one) {
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
      const double b = ds.rows[r].label;
      if (b != 1.0 && b != -1.0 && b != 0.0) {
        throw ParseError(label_lines[r], "label outside the binary alphabets {-1,+1} / {0,1}");
      }
    }
    throw ParseError(label_lines.empty() ? 0 : label_lines.back(), "labels mix the alphabets {-1,+1} and {0,1}");
  }
  if (!plus_minus) {
    for (auto& row : ds.rows) row.label = row.label == 0.0 ? -1.0 : 1.0;
  }
  return ds;
}

Dataset parse_libsvm_string(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path + "'");
  return parse_libsvm(in);
}

std::string to_libsvm(const Dataset& dataset) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& row : dataset.rows) {
    os << (row.label > 0 ? "+1" : "-1");
    for (std::size_t j = 0; j < row.indices.size(); ++j) os << ' ' << row.indices[j] + 1 << ':' << row.values[j];
    os << '\n';
  }
  return os.str();
}

Shard to_shard(const Dataset& dataset, std::span<const std::size_t> row_ids) {
  Shard shard;
  const auto m = static_cast<Eigen::Index>(row_ids.size());
  shard.features = Matrix::Zero(m, static_cast<Eigen::Index>(dataset.dim));
  shard.labels.resize(m);
  for (Eigen::Index s = 0; s < m; ++s) {
    const SparseRow& row = dataset.rows.at(row_ids[static_cast<std::size_t>(s)]);
    for (std::size_t j = 0; j < row.indices.size(); ++j) {
      shard.features(s, static_cast<Eigen::Index>(row.indices[j])) = row.values[j];
    }
    shard.labels[s] = row.label;
  }
  return shard;
}

std::vector<std::size_t> shuffled_order(std::size_t rows, std::uint64_t seed) {
  std::vector<std::size_t> order(rows);
  for (std::size_t r = 0; r < rows; ++r) order[r] = r;
  RandomStream rng(seed);
  for (std::size_t r = rows; r > 1; --r) {
    const auto j = static_cast<std::size_t>(rng.below(r));
    std::swap(order[r - 1], order[j]);
  }
  return order;
}

std::vector<Shard> partition(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("partition: need at least one client");
  if (n > dataset.rows.size()) {
    throw InputError("partition: " + std::to_string(n) + " clients but only " + std::to_string(dataset.rows.size()) +
                     " rows");
  }
  const auto order = shuffled_order(dataset.rows.size(), seed);
  const std::size_t m = dataset.rows.size() / n;
  std::vector<Shard> shards;
  shards.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    shards.push_back(to_shard(dataset, std::span<const std::size_t>(order).subspan(i * m, m)));
  }
  return shards;
}

Dataset dirichlet_synthetic(std::size_t n, std::size_t dim, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw InputError("dirichlet_synthetic: alpha must be positive");
  if (n < 1) throw InputError("dirichlet_synthetic: need at least one client");
  if (dim < 2) throw InputError("dirichlet_synthetic: dimension must be at least 2");
  RandomStream features(derive_seed(seed, {stream_tag::data, 1}));
  RandomStream labels(derive_seed(seed, {stream_tag::data, 2}));
  Dataset ds;
  ds.dim = dim;
  ds.rows.reserve(n);
  std::vector<double> draws(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (auto& g : draws) {
      g = features.gamma(alpha);
      total += g;
    }
    SparseRow row;
    for (std::size_t j = 0; j < dim; ++j) {
      row.indices.push_back(j);
      row.values.push_back(draws[j] / total);
    }
    row.label = labels.bernoulli(0.5) ? 1.0 : -1.0;
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

Dataset gaussian_logistic_synthetic(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  if (rows < 1 || dim < 1) throw InputError("gaussian_logistic_synthetic: rows and dim must be positive");
  RandomStream rng(derive_seed(seed, {stream_tag::data, 3}));
  Vector w(static_cast<Eigen::Index>(dim));
  for (auto& wj : w) wj = rng.normal() / std::sqrt(static_cast<double>(dim));
  Dataset ds;
  ds.dim = dim;
  ds.rows.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    SparseRow row;
    double margin = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double a = rng.normal();
      row.indices.push_back(j);
      row.values.push_back(a);
      margin += a * w[static_cast<Eigen::Index>(j)];
    }
    row.label = rng.bernoulli(sigmoid(margin)) ? 1.0 : -1.0;
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

}  // namespace locodl
