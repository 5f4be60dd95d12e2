#include "rwpe/environment_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rwpe {

namespace {

using nlohmann::json;

std::string coord_text(const IntVec& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
  return s + ")";
}

IntVec int_vector(const json& node, std::size_t d, const std::string& what) {
  if (!node.is_array()) throw Error(ErrorCode::schema, what + " must be an array of integers");
  if (node.size() != d)
    throw Error(ErrorCode::dimension_mismatch,
                what + " has " + std::to_string(node.size()) + " entries, expected " + std::to_string(d));
  IntVec v;
  v.reserve(d);
  for (const auto& c : node) {
    if (!c.is_number_integer()) throw Error(ErrorCode::schema, what + " must contain integers");
    v.push_back(c.get<std::int64_t>());
  }
  return v;
}

std::int64_t parse_int(std::string_view s, const std::string& context) {
  std::int64_t v = 0;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::syntax, context + ": malformed rational \"" + std::string(s) + "\"");
  return v;
}

Jump parse_jump(const json& node, std::size_t d, const std::string& where) {
  if (!node.is_object() || !node.contains("step") || !node.contains("prob"))
    throw Error(ErrorCode::schema, where + ": each jump needs \"step\" and \"prob\"");
  Jump j;
  j.step = int_vector(node.at("step"), d, where + " step");
  const json& p = node.at("prob");
  if (p.is_number()) {
    j.prob = p.get<double>();
  } else if (p.is_string()) {
    const auto text = p.get<std::string>();
    const auto slash = text.find('/');
    if (slash == std::string::npos)
      throw Error(ErrorCode::syntax, where + ": probability string must have the form \"p/q\"");
    const auto num = parse_int(std::string_view(text).substr(0, slash), where);
    const auto den = parse_int(std::string_view(text).substr(slash + 1), where);
    if (den <= 0) throw Error(ErrorCode::syntax, where + ": rational denominator must be positive");
    j.prob = static_cast<double>(num) / static_cast<double>(den);
    j.rational = std::make_pair(num, den);
  } else {
    throw Error(ErrorCode::schema, where + ": \"prob\" must be a number or a \"p/q\" string");
  }
  if (!(j.prob > 0.0))
    throw Error(ErrorCode::nonpositive_probability,
                where + " step " + coord_text(j.step) + ": probability must be positive");
  return j;
}

void write_vec(std::ostream& os, const IntVec& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
}

}  // namespace

Environment parse_environment(std::string_view text, const ParseOptions& opts) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::syntax, e.what());
  }
  if (!doc.is_object() || !doc.contains("dims") || !doc.contains("sites"))
    throw Error(ErrorCode::schema, "environment needs top-level \"dims\" and \"sites\"");
  for (const auto& [key, _] : doc.items())
    if (key != "dims" && key != "sites")
      throw Error(ErrorCode::schema, "unexpected top-level field \"" + key + "\"");

  const json& dims_node = doc.at("dims");
  if (!dims_node.is_array() || dims_node.empty())
    throw Error(ErrorCode::schema, "\"dims\" must be a nonempty array");
  std::vector<std::int64_t> extents;
  for (const auto& m : dims_node) {
    if (!m.is_number_integer() || m.get<std::int64_t>() < 1)
      throw Error(ErrorCode::schema, "\"dims\" entries must be positive integers");
    extents.push_back(m.get<std::int64_t>());
  }
  TorusDims dims(std::move(extents));
  const std::size_t d = dims.dimension();

  const json& sites = doc.at("sites");
  if (!sites.is_array()) throw Error(ErrorCode::schema, "\"sites\" must be an array");

  std::vector<std::optional<JumpLaw>> laws(dims.size());
  for (const auto& site : sites) {
    if (!site.is_object() || !site.contains("coord") || !site.contains("jumps"))
      throw Error(ErrorCode::schema, "each site needs \"coord\" and \"jumps\"");
    const IntVec coord = int_vector(site.at("coord"), d, "coord");
    for (std::size_t i = 0; i < d; ++i)
      if (coord[i] < 0 || coord[i] >= dims[i])
        throw Error(ErrorCode::schema, "coord " + coord_text(coord) + " lies outside the torus");
    const std::string where = "site " + coord_text(coord);
    const auto index = dims.index_of(coord);
    if (laws[index]) throw Error(ErrorCode::duplicate_site, "duplicate site " + coord_text(coord));

    const json& jumps = site.at("jumps");
    if (!jumps.is_array() || jumps.empty())
      throw Error(ErrorCode::schema, where + ": \"jumps\" must be a nonempty array");
    std::vector<Jump> parsed;
    for (const auto& j : jumps) parsed.push_back(parse_jump(j, d, where));
    JumpLaw law(std::move(parsed));
    if (opts.renormalize && law.total() != 1.0) law = law.renormalized();
    laws[index] = std::move(law);
  }

  std::vector<JumpLaw> complete;
  complete.reserve(laws.size());
  for (std::size_t s = 0; s < laws.size(); ++s) {
    if (!laws[s]) throw Error(ErrorCode::missing_site, "missing site " + coord_text(dims.coords(s)));
    complete.push_back(std::move(*laws[s]));
  }
  return Environment(std::move(dims), std::move(complete), opts.tolerance);
}

std::string serialize_environment(const Environment& env) {
  std::ostringstream os;
  os << "{\n  \"dims\": ";
  write_vec(os, env.dims().extents());
  os << ",\n  \"sites\": [\n";
  char buf[40];
  for (std::size_t s = 0; s < env.num_sites(); ++s) {
    os << "    {\"coord\": ";
    write_vec(os, env.dims().coords(s));
    os << ", \"jumps\": [";
    const auto& jumps = env.law(s).jumps();
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      os << (k ? ", " : "") << "{\"step\": ";
      write_vec(os, jumps[k].step);
      os << ", \"prob\": ";
      if (jumps[k].rational) {
        os << '"' << jumps[k].rational->first << '/' << jumps[k].rational->second << '"';
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", jumps[k].prob);
        os << buf;
      }
      os << '}';
    }
    os << "]}" << (s + 1 < env.num_sites() ? "," : "") << '\n';
  }
  os << "  ]\n}\n";
  return os.str();
}

Environment load_environment(const std::filesystem::path& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_environment(buf.str(), opts);
}

void save_environment(const Environment& env, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << serialize_environment(env);
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace rwpe
