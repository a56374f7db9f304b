#include "qsm/serialize.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace qsm {

namespace {

using nlohmann::json;

json layout_to_json(const SystemLayout& l) {
  json arr = json::array();
  for (const auto& f : l.factors()) arr.push_back({{"label", f.label}, {"dim", f.dim}});
  return arr;
}

SystemLayout layout_from_json(const json& arr) {
  if (!arr.is_array()) throw ValidationError("state json: 'layout' must be an array");
  std::vector<Factor> fs;
  for (const auto& e : arr) {
    if (!e.contains("label") || !e.contains("dim"))
      throw ValidationError("state json: layout entries need 'label' and 'dim'");
    fs.push_back(Factor{e.at("label").get<std::string>(), e.at("dim").get<int>()});
  }
  return SystemLayout(std::move(fs));
}

json entries_to_json(const cxd* data, long n) {
  json arr = json::array();
  for (long i = 0; i < n; ++i) arr.push_back({data[i].real(), data[i].imag()});
  return arr;
}

std::vector<cxd> entries_from_json(const json& arr) {
  if (!arr.is_array()) throw ValidationError("state json: 'data' must be an array");
  std::vector<cxd> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2)
      throw ValidationError("state json: entries must be [re, im] pairs");
    out.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  }
  return out;
}

}  // namespace

std::string to_json(const PureState& psi) {
  json j;
  j["layout"] = layout_to_json(psi.layout);
  j["type"] = "pure";
  j["data"] = entries_to_json(psi.vector.data(), psi.vector.size());
  return j.dump();
}

std::string to_json(const DensityOperator& rho) {
  json j;
  j["layout"] = layout_to_json(rho.layout);
  j["type"] = "density";
  // row-major
  json arr = json::array();
  for (int r = 0; r < rho.dim(); ++r)
    for (int c = 0; c < rho.dim(); ++c)
      arr.push_back({rho.matrix(r, c).real(), rho.matrix(r, c).imag()});
  j["data"] = arr;
  return j.dump();
}

LoadedState state_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("state json: parse error: ") + e.what());
  }
  if (!j.contains("layout") || !j.contains("type") || !j.contains("data"))
    throw ValidationError("state json: missing 'layout', 'type' or 'data'");
  SystemLayout layout = layout_from_json(j.at("layout"));
  std::string type = j.at("type").get<std::string>();
  std::vector<cxd> data = entries_from_json(j.at("data"));
  const long d = layout.total_dim();
  if (type == "pure") {
    if (static_cast<long>(data.size()) != d)
      throw ValidationError("state json: pure state needs layout-dim entries");
    Vec v(d);
    for (long i = 0; i < d; ++i) v(i) = data[i];
    PureState psi(std::move(layout), std::move(v));
    psi.validate();
    return psi;
  }
  if (type == "density") {
    if (static_cast<long>(data.size()) != d * d)
      throw ValidationError("state json: density operator needs layout-dim^2 entries");
    Mat m(d, d);
    for (long r = 0; r < d; ++r)
      for (long c = 0; c < d; ++c) m(r, c) = data[r * d + c];
    DensityOperator rho(std::move(layout), std::move(m));
    rho.validate();
    return rho;
  }
  throw ValidationError("state json: unknown type '" + type + "'");
}

LoadedState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open state file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return state_from_json(ss.str());
}

void save_state(const LoadedState& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write state file: " + path);
  if (std::holds_alternative<PureState>(s))
    out << to_json(std::get<PureState>(s));
  else
    out << to_json(std::get<DensityOperator>(s));
  out << "\n";
}

std::string matrix_to_json(const Mat& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  json arr = json::array();
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) arr.push_back({m(r, c).real(), m(r, c).imag()});
  j["data"] = arr;
  return j.dump();
}

Mat matrix_from_json(const std::string& text) {
  json j = json::parse(text);
  long rows = j.at("rows").get<long>();
  long cols = j.at("cols").get<long>();
  auto data = entries_from_json(j.at("data"));
  if (static_cast<long>(data.size()) != rows * cols)
    throw ValidationError("matrix json: entry count mismatch");
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  return m;
}

}  // namespace qsm
