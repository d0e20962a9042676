#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "d2d/radio.hpp"

namespace d2d {

using nlohmann::json;

namespace {

json point_json(Point p) { return json::array({p.x, p.y}); }
Point point_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json links_json(const std::vector<Link>& links) {
  json a = json::array();
  for (const Link& l : links) a.push_back({{"tx", point_json(l.tx)}, {"rx", point_json(l.rx)}});
  return a;
}

std::vector<Link> links_from(const json& a) {
  std::vector<Link> links;
  for (const auto& l : a) links.push_back({point_from(l.at("tx")), point_from(l.at("rx"))});
  return links;
}

}  // namespace

std::string topology_to_json(const Topology& t) {
  json gains = json::array();
  for (Eigen::Index j = 0; j < t.mean_gain.rows(); ++j) {
    json row = json::array();
    for (Eigen::Index i = 0; i < t.mean_gain.cols(); ++i) row.push_back(t.mean_gain(j, i));
    gains.push_back(std::move(row));
  }
  json doc = {{"format", "d2dcap-topology"},
              {"version", 1},
              {"seed", t.seed},
              {"units", {{"position", "m"}, {"power", "W"}, {"gain", "linear"}}},
              {"bs", point_json(t.bs)},
              {"uec", links_json(t.uec)},
              {"ued", links_json(t.ued)},
              {"tx_power_w", t.tx_power_w},
              {"mean_gain", gains}};
  return doc.dump(2);
}

Topology topology_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "d2dcap-topology") throw std::runtime_error("not a topology document");
    Topology t;
    t.seed = doc.at("seed").get<std::uint64_t>();
    t.bs = point_from(doc.at("bs"));
    t.uec = links_from(doc.at("uec"));
    t.ued = links_from(doc.at("ued"));
    t.tx_power_w = doc.at("tx_power_w").get<std::vector<double>>();
    const auto& gains = doc.at("mean_gain");
    const auto n = static_cast<Eigen::Index>(t.num_links());
    if (static_cast<Eigen::Index>(gains.size()) != n || static_cast<Eigen::Index>(t.tx_power_w.size()) != n)
      throw std::runtime_error("gain matrix / power vector size does not match link count");
    t.mean_gain.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (static_cast<Eigen::Index>(gains[static_cast<std::size_t>(j)].size()) != n)
        throw std::runtime_error("gain matrix is not square");
      for (Eigen::Index i = 0; i < n; ++i)
        t.mean_gain(j, i) = gains[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].get<double>();
    }
    return t;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("topology_from_json: ") + e.what());
  }
}

void save_topology(const Topology& topology, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write topology to " + path.string());
  out << topology_to_json(topology) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read topology from " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return topology_from_json(ss.str());
}

}  // namespace d2d
