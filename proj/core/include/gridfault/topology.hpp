#pragma once

// Network description of a transmission grid and the graph views built from it.
//
// Bus ids are 1-based in files and reports. Every container in this header is
// indexed 0-based: bus id k lives at index k-1.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

namespace gridfault {

enum class BusType : int { PQ = 1, PV = 2, Slack = 3 };

struct Bus {
  int id = 0;
  BusType type = BusType::PQ;
  double load_p = 0.0;  // pu
  double load_q = 0.0;  // pu
  double v_set = 1.0;   // pu, meaningful for PV and slack buses
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;  // series resistance, pu
  double x = 0.0;  // series reactance, pu
  double b = 0.0;  // total shunt susceptance, pu
};

struct Generator {
  int bus = 0;
  double p_set = 0.0;  // scheduled active output, pu (unused at the slack)
  double v_set = 1.0;
  double xd = 0.0;        // direct-axis synchronous reactance
  double xq = 0.0;        // quadrature-axis synchronous reactance
  double xd_prime = 0.0;  // direct-axis transient reactance
  double xq_prime = 0.0;  // quadrature-axis transient reactance
  double td0_prime = 0.0; // direct-axis open-circuit transient time constant, s
  double tq0_prime = 0.0; // quadrature-axis open-circuit transient time constant, s
  double inertia_h = 0.0; // inertia time constant, s
  double ra = 0.0;        // stator resistance
  double xd_sub = 0.0;    // sub-transient reactances (stored, not used by the classical model)
  double xq_sub = 0.0;
};

struct GridCase {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  std::size_t bus_count() const { return buses.size(); }
  std::size_t slack_index() const;
  /// Index into `generators` for the machine at a bus, if any.
  std::optional<std::size_t> generator_at(int bus_id) const;
};

/// Shape a case must have. The default is the 39-bus, 10-machine system.
struct CaseShape {
  std::optional<std::size_t> buses = 39;
  std::optional<std::size_t> generators = 10;

  static CaseShape any() { return {std::nullopt, std::nullopt}; }
};

/// Collects every invariant violation; empty means valid.
std::vector<std::string> check_case(const GridCase& grid, const CaseShape& shape = {});
/// Throws ValidationError listing all violations.
void validate_case(const GridCase& grid, const CaseShape& shape = {});

GridCase parse_case(std::string_view text, std::string_view source = "<case>",
                    const CaseShape& shape = {});
GridCase load_case(const std::filesystem::path& path, const CaseShape& shape = {});
std::string format_case(const GridCase& grid);

/// Dense symmetric 0/1 matrix with zero diagonal.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(std::size_t order);
  Adjacency(std::size_t order, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t order() const noexcept { return order_; }
  bool connected(std::size_t i, std::size_t j) const { return entries_[i * order_ + j] != 0; }
  std::uint8_t operator()(std::size_t i, std::size_t j) const { return entries_[i * order_ + j]; }

  void add_edge(std::size_t i, std::size_t j);
  void remove_edge(std::size_t i, std::size_t j);

  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;
  std::size_t nonzero_count() const { return 2 * edge_count(); }
  std::vector<std::size_t> neighbors(std::size_t i) const;
  /// Distinct unordered pairs (i < j), lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  Eigen::SparseMatrix<double> to_sparse() const;

  bool operator==(const Adjacency&) const = default;

 private:
  std::size_t order_ = 0;
  std::vector<std::uint8_t> entries_;
};

Adjacency build_adjacency(const GridCase& grid);

inline constexpr int kUnreachable = -1;

/// Hop counts from `source` to every node; kUnreachable where no path exists.
std::vector<int> hop_distances(const Adjacency& adj, std::size_t source);
/// Breadth-first shortest path length, nullopt when unreachable. Throws on bad index.
std::optional<int> hop_distance(const Adjacency& adj, std::size_t from, std::size_t to);
bool is_connected(const Adjacency& adj);

/// Graph in which every original edge has become a degree-2 node.
struct EdgeNodeGraph {
  Adjacency adjacency;
  std::size_t original_nodes = 0;
  /// Endpoints (0-based) of the edge each artificial node replaces, in edge order.
  std::vector<std::pair<std::size_t, std::size_t>> replaced_edges;
  /// Per artificial node: series r, series x, shunt b of the replaced branch.
  std::vector<std::array<double, 3>> edge_features;

  std::size_t artificial_index(std::size_t k) const { return original_nodes + k; }
};

EdgeNodeGraph edge_to_node_transform(const GridCase& grid);

}  // namespace gridfault
