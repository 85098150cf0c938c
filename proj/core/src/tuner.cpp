#include "ttune/tuner.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ttune {

double bandwidth_gibs(const TransposeProblem& p, double seconds) {
  if (!(seconds > 0.0)) throw std::invalid_argument("bandwidth: time must be positive");
  const double n = static_cast<double>(p.total_elements());
  double bytes = n * static_cast<double>(element_bytes(p.kind_a)) +
                 n * static_cast<double>(element_bytes(p.kind_b));
  if (p.beta != 0.0) bytes += n * static_cast<double>(element_bytes(p.kind_b));
  return bytes / (1024.0 * 1024.0 * 1024.0) / seconds;
}

MeasurementRecord measure_candidate(const TransposeProblem& p, const CandidatePlan& plan,
                                    const TensorBuffer& a, TensorBuffer& b,
                                    const TimingProtocol& protocol) {
  if (protocol.warmups < 0 || protocol.repetitions < 1)
    throw std::invalid_argument("protocol: need warmups >= 0 and repetitions >= 1");
  MeasurementRecord rec;
  rec.plan = plan;
  for (int i = 0; i < protocol.warmups; ++i) execute_plan(p, plan, a, b, protocol.threads);
  rec.trial_seconds.reserve(static_cast<std::size_t>(protocol.repetitions));
  for (int i = 0; i < protocol.repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    execute_plan(p, plan, a, b, protocol.threads);
    const auto t1 = std::chrono::steady_clock::now();
    rec.trial_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  rec.best_seconds = *std::min_element(rec.trial_seconds.begin(), rec.trial_seconds.end());
  rec.best_seconds = std::max(rec.best_seconds, 1e-9);
  rec.bandwidth_gibs = bandwidth_gibs(p, rec.best_seconds);
  return rec;
}

std::size_t select_solution(const std::vector<MeasurementRecord>& records) {
  if (records.empty()) throw std::invalid_argument("select: no measurements");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const MeasurementRecord& r = records[i];
    const MeasurementRecord&
        s = records[best];
    if (r.bandwidth_gibs > s.bandwidth_gibs) {
      best = i;
    } else if (r.bandwidth_gibs == s.bandwidth_gibs) {
      if (r.heuristic_cost < s.heuristic_cost ||
          (r.heuristic_cost == s.heuristic_cost && r.plan.serialize() < s.plan.serialize()))
        best = i;
    }
  }
  return best;
}

double efficiency(int d, const std::vector<MeasurementRecord>& records) {
  double best_at_d = -1.0, best = -1.0;
  for (const auto& r : records) {
    best = std::max(best, r.bandwidth_gibs);
    if (r.plan.prefetch_distance == d) best_at_d = std::max(best_at_d, r.bandwidth_gibs);
  }
  if (best <= 0.0) throw std::invalid_argument("efficiency: no measurements");
  if (best_at_d < 0.0) {
    std::ostringstream os;
    os << "efficiency: no candidate measured at prefetch distance " << d;
    throw std::invalid_argument(os.str());
  }
  return best_at_d / best;
}

namespace {

constexpr char kFieldSep = '\t';

bool clean_field(const std::string& s) {
  return s.find('\t') == std::string::npos && s.find('\n') == std::string::npos &&
         s.find('\r') == std::string::npos;
}

std::string format_entry(const SolutionEntry& e) {
  char bw[64];
  std::snprintf(bw, sizeof bw, "%.17g", e.bandwidth_gibs);
  std::ostringstream os;
  os << e.problem_key << kFieldSep << e.hardware_key << kFieldSep << e.plan.serialize()
     << kFieldSep << bw << kFieldSep << e.timestamp << '\n';
  return os.str();
}

bool parse_entry(const std::string& line, SolutionEntry& out) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (fields.size() < 5) {
    const std::size_t pos = line.find(kFieldSep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (fields.size() != 5) return false;
  for (const auto& f : fields)
    if (f.empty()) return false;
  try {
    out.plan = CandidatePlan::parse(fields[2]);
  } catch (const std::exception&) {
    return false;
  }
  errno = 0;
  char* end = nullptr;
  out.bandwidth_gibs = std::strtod(fields[3].c_str(), &end);
  if (end != fields[3].c_str() + fields[3].size() || errno != 0) return false;
  out.problem_key = fields[0];
  out.hardware_key = fields[1];
  out.timestamp = fields[4];
  return true;
}

struct LockedFd {
  int fd = -1;
  ~LockedFd() {
    if (fd >= 0) ::close(fd);  // close releases the flock
  }
};

}  // namespace

std::optional<SolutionEntry> SolutionCache::lookup(const std::string& problem_key,
                                                   const std::string& hardware_key) const {
  LockedFd f;
  f.fd = ::open(file_.c_str(), O_RDONLY | O_CLOEXEC);
  if (f.fd < 0) return std::nullopt;
  if (::flock(f.fd, LOCK_SH) != 0) throw std::runtime_error("cache: lock failed");
  std::string content;
  char buf[1 << 16];
  ssize_t got;
  while ((got = ::read(f.fd, buf, sizeof buf)) > 0) content.append(buf, static_cast<std::size_t>(got));
  if (got < 0) throw std::runtime_error("cache: read failed");

  std::optional<SolutionEntry> found;
  int malformed = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t pos = content.find('\n', start);
    if (pos == std::string::npos) pos = content.size();
    const std::string line = content.substr(start, pos - start);
    start = pos + 1;
    if (line.empty()) continue;
    SolutionEntry e;
    if (!parse_entry(line, e)) {
      ++malformed;
      continue;
    }
    if (e.problem_key == problem_key && e.hardware_key == hardware_key) found = std::move(e);
  }
  if (malformed > 0)
    std::fprintf(stderr, "warning: cache %s: skipped %d malformed line(s)\n", file_.c_str(),
                 malformed);
  return found;
}

void SolutionCache::store(const SolutionEntry& entry) {
  if (entry.problem_key.empty() || entry.hardware_key.empty() || entry.timestamp.empty() ||
      !clean_field(entry.problem_key) || !clean_field(entry.hardware_key) ||
      !clean_field(entry.timestamp))
    throw std::invalid_argument("cache: entry fields must be non-empty single-line text");
  const std::string line = format_entry(entry);
  LockedFd f;
  f.fd = ::open(file_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (f.fd < 0) throw std::runtime_error("cache: cannot open " + file_.string());
  if (::flock(f.fd, LOCK_EX) != 0) throw std::runtime_error("cache: lock failed");
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t put = ::write(f.fd, line.data() + off, line.size() - off);
    if (put < 0) throw std::runtime_error("cache: write failed");
    off += static_cast<std::size_t>(put);
  }
}

std::string default_hardware_key(int threads, int micro_width) {
  char host[256] = {0};
  if (::gethostname(host, sizeof host - 1) != 0) std::strcpy(host, "unknown-host");
  std::ostringstream os;
  os << host << ":t" << threads << ":w" << micro_width;
  return os.str();
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void fill_buffer(TensorBuffer& buffer, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  const std::int64_t n = buffer.scalars();
  if (buffer.kind() == ElementKind::real32 || buffer.kind() == ElementKind::complex64) {
    float* p = buffer.as<float>();
    for (std::int64_t i = 0; i < n; ++i)
      p[i] = 1.0f + static_cast<float>(eng() >> 40) * 0x1.0p-24f;
  } else {
    double* p = buffer.as<double>();
    for (std::int64_t i = 0; i < n; ++i)
      p[i] = 1.0 + static_cast<double>(eng() >> 11) * 0x1.0p-53;
  }
}

TuneResult tune(const NormalizedProblem& problem, const CandidateQueue& queue,
                const TimingProtocol& protocol, std::uint64_t seed) {
  const TransposeProblem& p = problem.problem;
  if (queue.entries.empty()) throw std::invalid_argument("tune: empty candidate queue");
  TensorBuffer a = make_buffer_a(p);
  TensorBuffer b = make_buffer_b(p);
  fill_buffer(a, seed);
  fill_buffer(b, seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<double> pristine;
  if (p.beta != 0.0)
    pristine.assign(static_cast<const double*>(b.data()),
                    static_cast<const double*>(b.data()) + (b.bytes() + 7) / 8);

  TuneResult result;
  result.records.reserve(queue.entries.size());
  for (const ScoredPlan& cand : queue.entries) {
    if (p.beta != 0.0) std::memcpy(b.data(), pristine.data(), b.bytes());
    MeasurementRecord rec = measure_candidate(p, cand.plan, a, b, protocol);
    rec.heuristic_cost = cand.cost;
    result.records.push_back(std::move(rec));
  }
  result.best = select_solution(result.records);
  return result;
}

}  // namespace ttune
