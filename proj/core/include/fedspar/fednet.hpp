#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedspar/model.hpp"
#include "fedspar/privacy.hpp"
#include "fedspar/rng.hpp"

namespace fedspar {

// A protocol rule was broken (unprivatized traffic, bad payload, ...).
struct protocol_fault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterate went non-finite mid-run.
struct numerical_fault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The closed set of things allowed on a channel. Raw samples are not a
// member: a dataset cannot be logged, let alone shipped.
enum class PayloadKind {
  kGradient,        // machine -> server local gradient
  kQuadraticForm,   // machine -> server list of quadratic-form scalars
  kBootstrapVector, // machine -> server multiplier-bootstrap vector
  kScalar,          // machine -> server single summary scalar
  kIterate,         // server -> machines privatized iterate
  kSignBits,        // machine -> server randomized-response sign bits
};

const char* to_string(PayloadKind kind);

// Hex SHA-256 of the raw little-endian double bytes; the same digest the
// message log stores.
std::string payload_sha256(const Eigen::VectorXd& payload);

enum class Direction { kToServer, kToMachines };

struct GradientMessage {
  int machine_id = 0;
  int round = 0;
  Eigen::VectorXd payload;
  PayloadKind kind = PayloadKind::kGradient;
  bool privatized = false;
};

struct BroadcastMessage {
  int round = 0;
  Eigen::VectorXd payload;
};

struct LogEntry {
  Direction direction;
  int round;
  int machine_id;  // -1 for broadcasts
  PayloadKind kind;
  std::string payload_sha256;
};

// Append-only record of everything that crossed a channel.
class MessageLog {
 public:
  void append(Direction direction, int round, int machine_id, PayloadKind kind,
              const Eigen::VectorXd& payload);
  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // One JSON object per line: direction, round, machine_id, kind, sha256.
  void dump_jsonl(std::ostream& os) const;

 private:
  std::vector<LogEntry> entries_;
};

enum class ServerTrust { kTrusted, kUntrusted };

// One protocol execution: m machines, a central server, synchronous rounds.
// Machine datasets are only reachable through the machine-local callbacks
// passed to round_gather; everything that crosses a channel is logged.
class FederatedRun {
 public:
  FederatedRun(std::vector<MachineDataset> machines, Rng rng,
               ServerTrust trust = ServerTrust::kTrusted);

  int machine_count() const { return static_cast<int>(machines_.size()); }
  int dimension() const { return machines_.empty() ? 0 : machines_.front().d(); }
  int samples_per_machine() const { return machines_.empty() ? 0 : machines_.front().n(); }
  ServerTrust trust() const { return trust_; }

  const MessageLog& log() const { return log_; }
  Rng& server_rng() { return server_rng_; }
  // Stream owned by one machine, stable across rounds.
  Rng machine_rng(int machine_id) const;

  const Eigen::VectorXd& last_broadcast() const;
  bool has_broadcast() const { return last_broadcast_.has_value(); }
  int round() const { return round_; }
  void advance_round() { ++round_; }

  // Machine-local Gram matrix X_i^T X_i / n, computed on first use and
  // cached on the machine. Never crosses a channel.
  const Eigen::MatrixXd& gram(int machine_id) const;

  // Run one machine-local computation per machine and log the resulting
  // messages in machine order. In the untrusted setting machine->server
  // traffic must be privatized, so only the PrivatizedVector form is legal
  // there. Non-finite payloads raise a protocol_fault naming the machine.
  using LocalFn =
      std::function<Eigen::VectorXd(const MachineDataset&, const Eigen::VectorXd* broadcast)>;
  using LocalPrivateFn =
      std::function<PrivatizedVector(const MachineDataset&, Rng& machine_rng)>;

  std::vector<GradientMessage> round_gather(PayloadKind kind, const LocalFn& fn);
  std::vector<GradientMessage> round_gather_private(PayloadKind kind, const LocalPrivateFn& fn);

  // Server -> machines. Trusted mode only accepts values that went through
  // a privatization step (the tag on PrivatizedVector). Optional structural
  // limits let callers enforce the sparsity/clamp contract of iterates.
  void round_broadcast(const PrivatizedVector& payload, int sparsity_limit = -1,
                       double clamp_radius = -1.0);
  // Raw broadcast; faults in trusted mode.
  void round_broadcast_raw(const Eigen::VectorXd& payload);

  // Read-only access for machine-local computations driven externally
  // (single-machine algorithms of the heterogeneous path).
  const MachineDataset& machine_data(int machine_id) const;

 private:
  void check_payload(const Eigen::VectorXd& payload, int machine_id) const;

  std::vector<MachineDataset> machines_;
  mutable std::vector<std::unique_ptr<Eigen::MatrixXd>> gram_cache_;
  Rng base_rng_;
  Rng server_rng_;
  ServerTrust trust_;
  MessageLog log_;
  std::optional<Eigen::VectorXd> last_broadcast_;
  int round_ = 0;
};

// Deterministic aggregate of gathered payloads: pairwise sum in machine order.
Eigen::VectorXd aggregate(const std::vector<GradientMessage>& messages);

}  // namespace fedspar
