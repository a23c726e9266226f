#include "fltorrent/audit.hpp"

#include <charconv>

#include <openssl/evp.h>

#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "fltorrent/config.hpp"
#include "fltorrent/overlay.hpp"

namespace fltorrent {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string commit_seed(std::uint64_t seed) {
  std::string b(8, '\0');
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  return sha256_hex(b);
}

std::string config_digest(const RoundConfig& cfg) { return sha256_hex(to_json(cfg)); }

RoundLog make_round_log(const RoundConfig& cfg, const ChunkUniverse& u, const std::vector<TransferDirective>& log) {
  RoundLog r;
  r.commit = commit_seed(cfg.seed);
  r.seed = cfg.seed;
  r.n = cfg.n;
  r.m = cfg.m;
  r.config_digest = config_digest(cfg);
  r.directives.reserve(log.size());
  for (const auto& d : log) {
    const auto id = u.id_of(d.chunk);
    r.directives.push_back({d.stage, d.sender, d.receiver, id.owner, id.index, d.flags});
  }
  return r;
}

std::string serialize(const RoundLog& log) {
  std::ostringstream os;
  os << "hash=" << log.hash << '\n'
     << "commit=" << log.commit << '\n'
     << "seed=" << log.seed << '\n'
     << "n=" << log.n << '\n'
     << "m=" << log.m << '\n'
     << "config=" << log.config_digest << '\n'
     << "stage,sender,receiver,chunk_owner,chunk_index,flags\n";
  std::string out = os.str();
  out.reserve(out.size() + log.directives.size() * 24);
  char buf[16];
  for (const auto& d : log.directives) {
    for (int v : {d.stage, d.sender, d.receiver, d.chunk_owner, d.chunk_index}) {
      out.append(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
      out += ',';
    }
    out += flags_to_string(d.flags);
    out += '\n';
  }
  return out;
}

RoundLog parse_round_log(const std::string& text) {
  RoundLog r;
  std::istringstream is(text);
  std::string line;
  bool body = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!body) {
      if (line == "stage,sender,receiver,chunk_owner,chunk_index,flags") {
        body = true;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw std::runtime_error("line " + std::to_string(lineno) + ": bad header");
      const auto k = line.substr(0, eq), v = line.substr(eq + 1);
      if (k == "hash") r.hash = v;
      else if (k == "commit") r.commit = v;
      else if (k == "seed") r.seed = std::stoull(v);
      else if (k == "n") r.n = std::stoi(v);
      else if (k == "m") r.m = std::stoi(v);
      else if (k == "config") r.config_digest = v;
      else throw std::runtime_error("line " + std::to_string(lineno) + ": unknown header '" + k + "'");
      continue;
    }
    LogEntry e;
    std::istringstream ls(line);
    std::string f[6];
    for (int i = 0; i < 6; ++i)
      if (!std::getline(ls, f[i], i < 5 ? ',' : '\n'))
        throw std::runtime_error("line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      e.stage = std::stoi(f[0]);
      e.sender = std::stoi(f[1]);
      e.receiver = std::stoi(f[2]);
      e.chunk_owner = std::stoi(f[3]);
      e.chunk_index = std::stoi(f[4]);
      e.flags = flags_from_string(f[5]);
    } catch (const std::exception& ex) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + ex.what());
    }
    r.directives.push_back(e);
  }
  if (!body) throw std::runtime_error("missing directive header");
  return r;
}

namespace {

Verdict reject(std::string reason, std::string detail) { return {false, std::move(reason), std::move(detail)}; }

std::string where(std::size_t i, const LogEntry& d) {
  std::ostringstream os;
  os << "directive " << i << " (stage " << d.stage << ", " << d.sender << "->" << d.receiver << ", chunk " << d.chunk_owner
     << ":" << d.chunk_index << ")";
  return os.str();
}

}  // namespace

Verdict verify_round_log(const std::string& commit, std::uint64_t seed, const RoundLog& log, const RoundConfig& cfg_in) {
  if (commit_seed(seed) != commit) return reject("hash", "seed does not match commit");
  if (log.commit != commit || log.seed != seed) return reject("hash", "log header disagrees with commit or seed");

  RoundConfig cfg = cfg_in;
  cfg.seed = seed;
  if (log.hash != "sha256") return reject("config", "unsupported digest " + log.hash);
  if (log.n != cfg.n || log.m != cfg.m) return reject("config", "n or m differs from config");
  if (log.config_digest != config_digest(cfg)) return reject("config", "config digest mismatch");

  const ChunkUniverse u(chunk_counts(cfg), cfg.round);
  for (std::size_t i = 0; i < log.directives.size(); ++i) {
    const auto& d = log.directives[i];
    const bool ok = d.sender >= 0 && d.sender < cfg.n && d.receiver >= 0 && d.receiver < cfg.n && d.sender != d.receiver &&
                    d.chunk_owner >= 0 && d.chunk_owner < cfg.n && d.chunk_index >= 1 && d.chunk_index <= u.K(d.chunk_owner) &&
                    d.stage >= -1;
    if (!ok) return reject("malformed", where(i, d));
    if (i > 0 && d.stage < log.directives[i - 1].stage) return reject("malformed", where(i, d) + " out of stage order");
  }

  const Overlay g = generate_overlay(cfg.n, cfg.m, seed);
  for (std::size_t i = 0; i < log.directives.size(); ++i) {
    const auto& d = log.directives[i];
    if (d.flags & kSpray) continue;
    if (!g.adjacent(d.sender, d.receiver)) return reject("adjacency", where(i, d));
  }

  const auto caps = sample_capacities(cfg);
  std::vector<int> sends(cfg.n, 0), recvs(cfg.n, 0);
  std::vector<NodeId> touched;
  int cur = -2;
  for (std::size_t i = 0; i < log.directives.size(); ++i) {
    const auto& d = log.directives[i];
    if (d.stage < 0) continue;
    if (d.stage != cur) {
      for (NodeId v : touched) sends[v] = recvs[v] = 0;
      touched.clear();
      cur = d.stage;
    }
    touched.push_back(d.sender);
    touched.push_back(d.receiver);
    if (++sends[d.sender] > caps[d.sender].up_chunks) return reject("cap", where(i, d) + " exceeds sender uplink");
    if (++recvs[d.receiver] > caps[d.receiver].down_chunks) return reject("cap", where(i, d) + " exceeds receiver downlink");
  }

  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < log.directives.size(); ++i) {
    const auto& d = log.directives[i];
    const std::uint64_t key = (static_cast<std::uint64_t>(d.receiver) << 32) |
                              static_cast<std::uint32_t>(u.index_of({d.chunk_owner, cfg.round, d.chunk_index}));
    if (!seen.insert(key).second && !(d.flags & kRetry)) return reject("duplicate", where(i, d));
  }
  return {};
}

}  // namespace fltorrent
