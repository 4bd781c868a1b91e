#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mon/mapping.hpp"
#include "mon/pfo.hpp"

namespace mon {

using Json = nlohmann::ordered_json;

/// Parses JSON text; ParseError carries the byte offset of the failure.
Json parse_json(std::string_view text, const std::string& what = "input");
Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

/// Links are undirected edges unless the document sets "directed": true.
Topology topology_from_json(const Json& j);
/// Always written with "directed": true so the link list round-trips exactly.
Json to_json(const Topology& t);

PiecewiseLinearUtility utility_from_json(const Json& j);
Json to_json(const PiecewiseLinearUtility& u);

/// Classes document: utilities, optional explicit flows as node sequences, and a hop limit.
struct ClassSpec {
  TrafficClass traffic;
  std::vector<std::vector<NodeId>> paths;  // empty: enumerate up to max_hops

  bool operator==(const ClassSpec&) const = default;
};

struct ClassesDoc {
  std::vector<ClassSpec> classes;
  int max_hops = 2;

  bool operator==(const ClassesDoc&) const = default;
};

ClassesDoc classes_from_json(const Json& j);
Json to_json(const ClassesDoc& d);

/// Resolves explicit paths or enumerates routes; flows keep class order.
PfoInstance build_instance(const Topology& t, const ClassesDoc& d);
PfoInstance build_instance(const Topology& t, const ClassesDoc& d, int max_hops);

PfoPlan plan_from_json(const Json& j);
Json to_json(const PfoPlan& p);

TransportConfig config_from_json(const Json& j);
Json to_json(const TransportConfig& c);

}  // namespace mon
