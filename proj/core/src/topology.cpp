#include "gridfault/topology.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gridfault/error.hpp"

namespace gridfault {

std::size_t GridCase::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].type == BusType::Slack) return i;
  throw Error("case has no slack bus");
}

std::optional<std::size_t> GridCase::generator_at(int bus_id) const {
  for (std::size_t g = 0; g < generators.size(); ++g)
    if (generators[g].bus == bus_id) return g;
  return std::nullopt;
}

std::vector<std::string> check_case(const GridCase& grid, const CaseShape& shape) {
  std::vector<std::string> out;
  const auto n = grid.buses.size();
  if (shape.buses && n != *shape.buses)
    out.push_back("expected " + std::to_string(*shape.buses) + " buses, found " + std::to_string(n));
  if (shape.generators && grid.generators.size() != *shape.generators)
    out.push_back("expected " + std::to_string(*shape.generators) + " generators, found " +
                  std::to_string(grid.generators.size()));
  if (n == 0) out.push_back("case has no buses");

  std::size_t slack = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& bus = grid.buses[i];
    if (bus.id != static_cast<int>(i) + 1)
      out.push_back("bus ids must be 1..N in order; position " + std::to_string(i + 1) + " has id " +
                    std::to_string(bus.id));
    if (bus.type == BusType::Slack) ++slack;
    if (!(bus.v_set > 0.0)) out.push_back("bus " + std::to_string(bus.id) + ": voltage setpoint must be > 0");
  }
  if (slack != 1) out.push_back("expected exactly one slack bus, found " + std::to_string(slack));

  auto valid_bus = [n](int id) { return id >= 1 && static_cast<std::size_t>(id) <= n; };
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const auto& br = grid.branches[k];
    const std::string tag = "branch " + std::to_string(k + 1) + " (" + std::to_string(br.from) + "-" +
                            std::to_string(br.to) + ")";
    if (!valid_bus(br.from) || !valid_bus(br.to)) out.push_back(tag + ": endpoint is not a valid bus id");
    if (br.from == br.to) out.push_back(tag + ": self-loop");
    if (!(br.x > 0.0)) out.push_back(tag + ": series reactance must be > 0");
    if (br.r < 0.0) out.push_back(tag + ": series resistance must be >= 0");
  }

  std::set<int> gen_buses;
  for (const auto& gen : grid.generators) {
    const std::string tag = "generator at bus " + std::to_string(gen.bus);
    if (!valid_bus(gen.bus)) {
      out.push_back(tag + ": not a valid bus id");
      continue;
    }
    if (!gen_buses.insert(gen.bus).second) out.push_back(tag + ": more than one machine on the bus");
    if (grid.buses[gen.bus - 1].type == BusType::PQ) out.push_back(tag + ": bus is typed PQ");
    for (auto [name, value] : {std::pair{"xd", gen.xd}, {"xq", gen.xq}, {"xd'", gen.xd_prime},
                               {"xq'", gen.xq_prime}, {"xd''", gen.xd_sub}, {"xq''", gen.xq_sub}})
      if (!(value > 0.0)) out.push_back(tag + ": " + name + " must be > 0");
    if (gen.ra < 0.0) out.push_back(tag + ": ra must be >= 0");
    if (!(gen.inertia_h > 0.0)) out.push_back(tag + ": inertia time constant must be > 0");
    if (!(gen.td0_prime > 0.0) || !(gen.tq0_prime > 0.0))
      out.push_back(tag + ": transient time constants must be > 0");
  }
  for (const auto& bus : grid.buses)
    if (bus.type != BusType::PQ && !gen_buses.count(bus.id))
      out.push_back("bus " + std::to_string(bus.id) + " is PV/slack but has no generator");
  return out;
}

void validate_case(const GridCase& grid, const CaseShape& shape) {
  auto violations = check_case(grid, shape);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

namespace {

enum class Section { None, Bus, Branch, Generator };

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

struct LineReader {
  std::string_view source;
  int line;

  double number(std::string_view field, std::string_view name) const {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
      throw ParseError(std::string(source), line, std::string(name),
                       "expected a number, got '" + std::string(field) + "'");
    return value;
  }

  int integer(std::string_view field, std::string_view name) const {
    const double value = number(field, name);
    if (value != std::floor(value))
      throw ParseError(std::string(source), line, std::string(name),
                       "expected an integer, got '" + std::string(field) + "'");
    return static_cast<int>(value);
  }

  void expect_count(const std::vector<std::string_view>& fields, std::size_t count,
                    std::string_view section) const {
    if (fields.size() != count)
      throw ParseError(std::string(source), line, std::string(section),
                       "expected " + std::to_string(count) + " fields, found " + std::to_string(fields.size()));
  }
};

}  // namespace

GridCase parse_case(std::string_view text, std::string_view source, const CaseShape& shape) {
  GridCase grid;
  Section section = Section::None;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;

    const LineReader rd{source, line_no};
    if (fields.size() == 1 && fields[0] == "BUS") { section = Section::Bus; continue; }
    if (fields.size() == 1 && fields[0] == "BRANCH") { section = Section::Branch; continue; }
    if (fields.size() == 1 && fields[0] == "GENERATOR") { section = Section::Generator; continue; }
    if (fields[0] == "BASE_MVA") {
      rd.expect_count(fields, 2, "BASE_MVA");
      grid.base_mva = rd.number(fields[1], "BASE_MVA");
      continue;
    }

    switch (section) {
      case Section::None:
        throw ParseError(std::string(source), line_no, "",
                         "data before any BUS/BRANCH/GENERATOR section header");
      case Section::Bus: {
        rd.expect_count(fields, 5, "BUS");
        Bus bus;
        bus.id = rd.integer(fields[0], "bus.id");
        const int type = rd.integer(fields[1], "bus.type");
        if (type < 1 || type > 3)
          throw ParseError(std::string(source), line_no, "bus.type", "must be 1 (PQ), 2 (PV) or 3 (slack)");
        bus.type = static_cast<BusType>(type);
        bus.load_p = rd.number(fields[2], "bus.Pd");
        bus.load_q = rd.number(fields[3], "bus.Qd");
        bus.v_set = rd.number(fields[4], "bus.Vset");
        grid.buses.push_back(bus);
        break;
      }
      case Section::Branch: {
        rd.expect_count(fields, 5, "BRANCH");
        Branch br;
        br.from = rd.integer(fields[0], "branch.from");
        br.to = rd.integer(fields[1], "branch.to");
        br.r = rd.number(fields[2], "branch.r");
        br.x = rd.number(fields[3], "branch.x");
        br.b = rd.number(fields[4], "branch.b");
        grid.branches.push_back(br);
        break;
      }
      case Section::Generator: {
        rd.expect_count(fields, 13, "GENERATOR");
        Generator g;
        g.bus = rd.integer(fields[0], "generator.bus");
        g.p_set = rd.number(fields[1], "generator.Pg");
        g.v_set = rd.number(fields[2], "generator.Vset");
        g.xd = rd.number(fields[3], "generator.xd");
        g.xq = rd.number(fields[4], "generator.xq");
        g.xd_prime = rd.number(fields[5], "generator.xd'");
        g.xq_prime = rd.number(fields[6], "generator.xq'");
        g.td0_prime = rd.number(fields[7], "generator.Td0'");
        g.tq0_prime = rd.number(fields[8], "generator.Tq0'");
        g.inertia_h = rd.number(fields[9], "generator.H");
        g.ra = rd.number(fields[10], "generator.ra");
        g.xd_sub = rd.number(fields[11], "generator.xd''");
        g.xq_sub = rd.number(fields[12], "generator.xq''");
        grid.generators.push_back(g);
        break;
      }
    }
  }
  validate_case(grid, shape);
  // Generator voltage setpoints drive the PV/slack magnitudes.
  for (const auto& g : grid.generators) grid.buses[g.bus - 1].v_set = g.v_set;
  return grid;
}

GridCase load_case(const std::filesystem::path& path, const CaseShape& shape) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open case file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_case(buffer.str(), path.string(), shape);
}

std::string format_case(const GridCase& grid) {
  std::ostringstream out;
  out.precision(17);
  out << "BASE_MVA " << grid.base_mva << "\n\nBUS\n";
  for (const auto& b : grid.buses)
    out << b.id << ' ' << static_cast<int>(b.type) << ' ' << b.load_p << ' ' << b.load_q << ' ' << b.v_set << '\n';
  out << "\nBRANCH\n";
  for (const auto& br : grid.branches)
    out << br.from << ' ' << br.to << ' ' << br.r << ' ' << br.x << ' ' << br.b << '\n';
  out << "\nGENERATOR\n";
  for (const auto& g : grid.generators)
    out << g.bus << ' ' << g.p_set << ' ' << g.v_set << ' ' << g.xd << ' ' << g.xq << ' ' << g.xd_prime << ' '
        << g.xq_prime << ' ' << g.td0_prime << ' ' << g.tq0_prime << ' ' << g.inertia_h << ' ' << g.ra << ' '
        << g.xd_sub << ' ' << g.xq_sub << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

Adjacency::Adjacency(std::size_t order) : order_(order), entries_(order * order, 0) {}

Adjacency::Adjacency(std::size_t order, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : Adjacency(order) {
  for (auto [i, j] : edges) add_edge(i, j);
}

void Adjacency::add_edge(std::size_t i, std::size_t j) {
  if (i >= order_ || j >= order_) throw Error("adjacency index out of range");
  if (i == j) throw Error("adjacency does not admit self-loops");
  entries_[i * order_ + j] = 1;
  entries_[j * order_ + i] = 1;
}

void Adjacency::remove_edge(std::size_t i, std::size_t j) {
  if (i >= order_ || j >= order_) throw Error("adjacency index out of range");
  entries_[i * order_ + j] = 0;
  entries_[j * order_ + i] = 0;
}

std::size_t Adjacency::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < order_; ++j) d += entries_[i * order_ + j];
  return d;
}

std::size_t Adjacency::edge_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < order_; ++i)
    for (std::size_t j = i + 1; j < order_; ++j) count += entries_[i * order_ + j];
  return count;
}

std::vector<std::size_t> Adjacency::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < order_; ++j)
    if (entries_[i * order_ + j]) out.push_back(j);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Adjacency::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < order_; ++i)
    for (std::size_t j = i + 1; j < order_; ++j)
      if (entries_[i * order_ + j]) out.emplace_back(i, j);
  return out;
}

Eigen::SparseMatrix<double> Adjacency::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < order_; ++i)
    for (std::size_t j = 0; j < order_; ++j)
      if (entries_[i * order_ + j])
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
  Eigen::SparseMatrix<double> m(static_cast<int>(order_), static_cast<int>(order_));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Adjacency build_adjacency(const GridCase& grid) {
  Adjacency adj(grid.bus_count());
  for (const auto& br : grid.branches)
    adj.add_edge(static_cast<std::size_t>(br.from - 1), static_cast<std::size_t>(br.to - 1));
  return adj;
}

std::vector<int> hop_distances(const Adjacency& adj, std::size_t source) {
  if (source >= adj.order()) throw Error("hop_distance: node index " + std::to_string(source) + " out of range");
  std::vector<int> dist(adj.order(), kUnreachable);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < adj.order(); ++v) {
      if (adj.connected(u, v) && dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::optional<int> hop_distance(const Adjacency& adj, std::size_t from, std::size_t to) {
  if (to >= adj.order()) throw Error("hop_distance: node index " + std::to_string(to) + " out of range");
  const int d = hop_distances(adj, from)[to];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

bool is_connected(const Adjacency& adj) {
  if (adj.order() == 0) return true;
  const auto dist = hop_distances(adj, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d == kUnreachable; });
}

EdgeNodeGraph edge_to_node_transform(const GridCase& grid) {
  const auto n = grid.bus_count();
  // Parallel branches collapse onto one artificial node with their combined impedance.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const Branch*>> by_pair;
  for (const auto& br : grid.branches) {
    auto i = static_cast<std::size_t>(br.from - 1), j = static_cast<std::size_t>(br.to - 1);
    if (i > j) std::swap(i, j);
    by_pair[{i, j}].push_back(&br);
  }

  EdgeNodeGraph out;
  out.original_nodes = n;
  out.adjacency = Adjacency(n + by_pair.size());
  std::size_t k = 0;
  for (const auto& [pair, group] : by_pair) {
    std::complex<double> y_series{0.0, 0.0};
    double b_total = 0.0;
    for (const auto* br : group) {
      y_series += 1.0 / std::complex<double>(br->r, br->x);
      b_total += br->b;
    }
    const auto z = 1.0 / y_series;
    out.replaced_edges.push_back(pair);
    out.edge_features.push_back({z.real(), z.imag(), b_total});
    out.adjacency.add_edge(pair.first, n + k);
    out.adjacency.add_edge(pair.second, n + k);
    ++k;
  }
  return out;
}

}  // namespace gridfault
