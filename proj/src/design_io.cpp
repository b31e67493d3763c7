#include "gtdesign/design_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace gtdesign {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename Vec>
ordered_json array_of(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name))
    throw IoError(std::string("design file is missing field '") + name + "'");
  return j.at(name);
}

template <typename T>
T number(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_number()) throw IoError(std::string("field '") + name + "' must be a number");
  return v.get<T>();
}

template <typename T>
std::vector<T> numbers(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_array()) throw IoError(std::string("field '") + name + "' must be an array");
  std::vector<T> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw IoError(std::string("field '") + name + "' must hold numbers");
    out.push_back(e.get<T>());
  }
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_vector(const std::vector<Scalar>& v) {
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(v.data(),
                                                                   static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ordered_json to_json(const Params& theta) {
  return {{"p0", theta.prevalence()}, {"p1", theta.sensitivity()}, {"p2", theta.specificity()}};
}

ordered_json to_json(const Bounds& bounds) {
  return {{"x_lower", bounds.lower()}, {"x_upper", bounds.upper()}};
}

ordered_json to_json(const Design& design) {
  return {{"sizes", array_of(design.sizes())}, {"weights", array_of(design.weights())}};
}

ordered_json to_json(const ExactDesign& design) {
  return {{"sizes", array_of(design.sizes())},
          {"counts", array_of(design.counts())},
          {"n", design.total_trials()}};
}

ordered_json to_json(const DesignDocument& doc) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["criterion"] = std::string(to_string(doc.criterion));
  j["theta"] = to_json(doc.theta);
  j["bounds"] = to_json(doc.bounds);
  if (doc.approximate) j["approximate"] = to_json(*doc.approximate);
  if (doc.exact) j["exact"] = to_json(*doc.exact);
  return j;
}

DesignDocument design_document_from_json(const json& j) {
  const int version = number<int>(j, "schema_version");
  if (version != kSchemaVersion)
    throw IoError("unsupported design schema_version " + std::to_string(version));

  const auto& t = field(j, "theta");
  const auto& b = field(j, "bounds");
  const auto& c = field(j, "criterion");
  if (!c.is_string()) throw IoError("field 'criterion' must be a string");

  DesignDocument doc{
      Params(number<double>(t, "p0"), number<double>(t, "p1"), number<double>(t, "p2")),
      Bounds(number<double>(b, "x_lower"), number<double>(b, "x_upper")),
      parse_criterion(c.get<std::string>()),
      std::nullopt,
      std::nullopt};

  if (j.contains("approximate") && !j.at("approximate").is_null()) {
    const auto& a = j.at("approximate");
    doc.approximate.emplace(to_vector(numbers<double>(a, "sizes")),
                            to_vector(numbers<double>(a, "weights")));
  }
  if (j.contains("exact") && !j.at("exact").is_null()) {
    const auto& e = j.at("exact");
    doc.exact.emplace(to_vector(numbers<int>(e, "sizes")), to_vector(numbers<int>(e, "counts")));
  }
  if (!doc.approximate && !doc.exact)
    throw IoError("design file holds neither an approximate nor an exact design");
  return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DesignDocument read_design_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return design_document_from_json(j);
}

}  // namespace gtdesign
