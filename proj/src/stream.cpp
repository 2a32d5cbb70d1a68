#include "incflow/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace incflow {

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::pnorm: return "pnorm";
    case ProblemKind::maxflow: return "maxflow";
    case ProblemKind::effres: return "effres";
  }
  return "?";
}

EdgeWeights StreamEdge::weights() const {
  return {gradient.value_or(0.0), resistance.value_or(1.0), weight.value_or(1.0)};
}

std::vector<double> UpdateStream::dense_demand() const {
  std::vector<double> d(vertex_count, 0.0);
  if (kind == ProblemKind::pnorm) {
    for (const auto& [v, x] : demand) d[v] += x;
  } else {
    d[s] = -1.0;
    d[t] = 1.0;
  }
  return d;
}

PNormInstance UpdateStream::pnorm_instance() const {
  if (kind != ProblemKind::pnorm) throw InputError("stream: not a pnorm stream");
  PNormInstance instance(vertex_count, dense_demand(), p, threshold, eps);
  for (const auto& e : initial) instance.add_edge(e.tail, e.head, e.weights());
  return instance;
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

class LineError {
 public:
  explicit LineError(std::size_t line) : line_(line) {}
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("line " + std::to_string(line_) + ": " + what);
  }

 private:
  std::size_t line_;
};

double parse_real(std::string_view s, const LineError& at) {
  double x = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(x)) {
    at.fail("bad number '" + std::string(s) + "'");
  }
  return x;
}

std::int64_t parse_int(std::string_view s, const LineError& at) {
  std::int64_t x = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) {
    at.fail("bad integer '" + std::string(s) + "'");
  }
  return x;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::map<std::string, std::string_view> key_values(
    const std::vector<std::string_view>& tokens, std::size_t from,
    const LineError& at) {
  std::map<std::string, std::string_view> out;
  for (auto i = from; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos || eq == 0) {
      at.fail("expected key=value, got '" + std::string(tokens[i]) + "'");
    }
    std::string key(tokens[i].substr(0, eq));
    if (!out.emplace(key, tokens[i].substr(eq + 1)).second) at.fail("duplicate key " + key);
  }
  return out;
}

}  // namespace

UpdateStream parse_stream(std::string_view text) {
  UpdateStream out;
  bool have_header = false;
  bool started = false;
  std::size_t line_no = 0;

  auto vertex = [&](std::string_view s, const LineError& at) {
    const auto v = parse_int(s, at);
    if (v < 1 || static_cast<std::size_t>(v) > out.vertex_count) {
      at.fail("vertex " + std::string(s) + " out of range 1.." + std::to_string(out.vertex_count));
    }
    return static_cast<VertexId>(v - 1);
  };

  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    const LineError at(line_no);
    const auto& word = tokens[0];

    if (word == "problem") {
      if (have_header) at.fail("second problem line");
      if (tokens.size() < 2) at.fail("missing problem kind");
      std::vector<std::string> expected;
      if (tokens[1] == "pnorm") {
        out.kind = ProblemKind::pnorm;
        expected = {"n", "mmax", "p", "F", "eps"};
      } else if (tokens[1] == "maxflow") {
        out.kind = ProblemKind::maxflow;
        expected = {"n", "mmax", "s", "t", "eps"};
      } else if (tokens[1] == "effres") {
        out.kind = ProblemKind::effres;
        expected = {"n", "mmax", "s", "t", "theta", "eps"};
      } else {
        at.fail("unknown problem kind '" + std::string(tokens[1]) + "'");
      }
      auto kv = key_values(tokens, 2, at);
      for (const auto& [key, value] : kv) {
        if (std::find(expected.begin(), expected.end(), key) == expected.end()) {
          at.fail("unknown key " + key);
        }
      }
      for (const auto& key : expected) {
        if (!kv.count(key)) at.fail("missing key " + key);
      }
      const auto n = parse_int(kv["n"], at);
      if (n < 1) at.fail("n must be positive");
      out.vertex_count = static_cast<std::size_t>(n);
      const auto m = parse_int(kv["mmax"], at);
      if (m < 1) at.fail("mmax must be positive");
      out.m_hat = static_cast<std::size_t>(m);
      out.eps = parse_real(kv["eps"], at);
      if (!(out.eps > 0.0)) at.fail("eps must be positive");
      if (out.kind == ProblemKind::pnorm) {
        const auto p = parse_int(kv["p"], at);
        if (p < 2 || p > 1000) at.fail("p must be an integer >= 2");
        out.p = static_cast<int>(p);
        out.threshold = parse_real(kv["F"], at);
      } else {
        out.s = vertex(kv["s"], at);
        out.t = vertex(kv["t"], at);
        if (out.s == out.t) at.fail("s equals t");
        if (out.kind == ProblemKind::maxflow && out.eps > 0.5) at.fail("maxflow eps must be <= 0.5");
        if (out.kind == ProblemKind::effres) {
          out.theta = parse_real(kv["theta"], at);
          if (!(out.theta > 0.0)) at.fail("theta must be positive");
        }
      }
      have_header = true;
      continue;
    }
    if (!have_header) at.fail("expected the problem line first");

    if (word == "demand") {
      if (out.kind != ProblemKind::pnorm) at.fail("demand lines are only for pnorm streams");
      if (started) at.fail("demand after start");
      if (tokens.size() != 3) at.fail("expected: demand <vertex> <value>");
      out.demand.push_back({vertex(tokens[1], at), parse_real(tokens[2], at)});
    } else if (word == "start") {
      if (tokens.size() != 1) at.fail("start takes no arguments");
      if (started) at.fail("second start");
      started = true;
    } else if (word == "edge" || word == "add") {
      if ((word == "edge") == started) {
        at.fail(word == "edge" ? "edge after start (use add)" : "add before start (use edge)");
      }
      if (tokens.size() < 3) at.fail("expected: " + std::string(word) + " <u> <v> [attrs]");
      StreamEdge e;
      e.tail = vertex(tokens[1], at);
      e.head = vertex(tokens[2], at);
      if (e.tail == e.head) at.fail("self-loop");
      for (const auto& [key, value] : key_values(tokens, 3, at)) {
        const bool allowed =
            (out.kind == ProblemKind::pnorm && (key == "g" || key == "r" || key == "w")) ||
            (out.kind == ProblemKind::maxflow && key == "cap") ||
            (out.kind == ProblemKind::effres && key == "r");
        if (!allowed) at.fail("unknown key " + key + " for a " + to_string(out.kind) + " stream");
        if (key == "g") e.gradient = parse_real(value, at);
        if (key == "r") e.resistance = parse_real(value, at);
        if (key == "w") e.weight = parse_real(value, at);
        if (key == "cap") e.capacity = parse_int(value, at);
      }
      if (e.resistance && !(*e.resistance > 0.0)) at.fail("r must be positive");
      if (e.weight && !(*e.weight > 0.0)) at.fail("w must be positive");
      if (out.kind == ProblemKind::maxflow && !(e.capacity && *e.capacity >= 1)) {
        at.fail("maxflow edges need an integer cap >= 1");
      }
      if (out.kind == ProblemKind::effres && !e.resistance) at.fail("effres edges need r");
      (started ? out.events : out.initial).push_back(e);
      if (out.initial.size() + out.events.size() > out.m_hat) at.fail("more edges than mmax");
    } else {
      at.fail("unknown directive '" + std::string(word) + "'");
    }
  }
  if (!have_header) throw InputError("stream has no problem line");
  if (out.kind == ProblemKind::pnorm && !sums_to_zero(out.dense_demand())) {
    throw InputError("demand does not sum to zero");
  }
  return out;
}

UpdateStream read_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_stream(buf.str());
}

std::string print_stream(const UpdateStream& stream) {
  std::ostringstream out;
  out << "problem " << to_string(stream.kind) << " n=" << stream.vertex_count
      << " mmax=" << stream.m_hat;
  switch (stream.kind) {
    case ProblemKind::pnorm:
      out << " p=" << stream.p << " F=" << format_double(stream.threshold);
      break;
    case ProblemKind::maxflow:
      out << " s=" << stream.s + 1 << " t=" << stream.t + 1;
      break;
    case ProblemKind::effres:
      out << " s=" << stream.s + 1 << " t=" << stream.t + 1
          << " theta=" << format_double(stream.theta);
      break;
  }
  out << " eps=" << format_double(stream.eps) << '\n';
  for (const auto& [v, x] : stream.demand) out << "demand " << v + 1 << ' ' << format_double(x) << '\n';
  auto edge = [&](const char* word, const StreamEdge& e) {
    out << word << ' ' << e.tail + 1 << ' ' << e.head + 1;
    if (e.gradient) out << " g=" << format_double(*e.gradient);
    if (e.resistance) out << " r=" << format_double(*e.resistance);
    if (e.weight) out << " w=" << format_double(*e.weight);
    if (e.capacity) out << " cap=" << *e.capacity;
    out << '\n';
  };
  for (const auto& e : stream.initial) edge("edge", e);
  out << "start\n";
  for (const auto& e : stream.events) edge("add", e);
  return out.str();
}

}  // namespace incflow
