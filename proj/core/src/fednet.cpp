#include "fedspar/fednet.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <ostream>

#include "fedspar/stats.hpp"

namespace fedspar {

const char* to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::kGradient: return "gradient";
    case PayloadKind::kQuadraticForm: return "quadratic_form";
    case PayloadKind::kBootstrapVector: return "bootstrap_vector";
    case PayloadKind::kScalar: return "scalar";
    case PayloadKind::kIterate: return "iterate";
    case PayloadKind::kSignBits: return "sign_bits";
  }
  return "unknown";
}

std::string payload_sha256(const Eigen::VectorXd& payload) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(payload.data(), static_cast<std::size_t>(payload.size()) * sizeof(double),
             digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(len) * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xf];
  }
  return out;
}

void MessageLog::append(Direction direction, int round, int machine_id, PayloadKind kind,
                        const Eigen::VectorXd& payload) {
  entries_.push_back({direction, round, machine_id, kind, payload_sha256(payload)});
}

void MessageLog::dump_jsonl(std::ostream& os) const {
  for (const auto& e : entries_) {
    os << "{\"direction\":\""
       << (e.direction == Direction::kToServer ? "to_server" : "to_machines")
       << "\",\"round\":" << e.round << ",\"machine_id\":" << e.machine_id
       << ",\"kind\":\"" << to_string(e.kind) << "\",\"sha256\":\"" << e.payload_sha256
       << "\"}\n";
  }
}

FederatedRun::FederatedRun(std::vector<MachineDataset> machines, Rng rng, ServerTrust trust)
    : machines_(std::move(machines)),
      gram_cache_(machines_.size()),
      base_rng_(rng),
      server_rng_(rng.substream(0xfed5)),
      trust_(trust) {
  if (machines_.empty()) throw std::invalid_argument("FederatedRun: no machines");
  for (const auto& m : machines_) m.validate();
}

Rng FederatedRun::machine_rng(int machine_id) const {
  return base_rng_.substream(0x10000u + static_cast<std::uint64_t>(machine_id));
}

const Eigen::VectorXd& FederatedRun::last_broadcast() const {
  if (!last_broadcast_) throw protocol_fault("no broadcast has happened yet");
  return *last_broadcast_;
}

const Eigen::MatrixXd& FederatedRun::gram(int machine_id) const {
  const auto idx = static_cast<std::size_t>(machine_id);
  if (idx >= machines_.size()) throw std::invalid_argument("gram: bad machine id");
  if (!gram_cache_[idx]) {
    const auto& X = machines_[idx].X;
    gram_cache_[idx] = std::make_unique<Eigen::MatrixXd>(
        (X.transpose() * X) / static_cast<double>(X.rows()));
  }
  return *gram_cache_[idx];
}

void FederatedRun::check_payload(const Eigen::VectorXd& payload, int machine_id) const {
  if (!payload.allFinite()) {
    throw protocol_fault("non-finite payload from machine " + std::to_string(machine_id) +
                         " in round " + std::to_string(round_));
  }
}

std::vector<GradientMessage> FederatedRun::round_gather(PayloadKind kind, const LocalFn& fn) {
  if (trust_ == ServerTrust::kUntrusted) {
    throw protocol_fault("raw machine->server traffic is illegal with an untrusted server");
  }
  std::vector<GradientMessage> out;
  out.reserve(machines_.size());
  const Eigen::VectorXd* broadcast = last_broadcast_ ? &*last_broadcast_ : nullptr;
  for (std::size_t i = 0; i < machines_.size(); ++i) {
    GradientMessage msg;
    msg.machine_id = static_cast<int>(i);
    msg.round = round_;
    msg.kind = kind;
    msg.payload = fn(machines_[i], broadcast);
    check_payload(msg.payload, msg.machine_id);
    log_.append(Direction::kToServer, round_, msg.machine_id, kind, msg.payload);
    out.push_back(std::move(msg));
  }
  return out;
}

std::vector<GradientMessage> FederatedRun::round_gather_private(PayloadKind kind,
                                                                const LocalPrivateFn& fn) {
  std::vector<GradientMessage> out;
  out.reserve(machines_.size());
  for (std::size_t i = 0; i < machines_.size(); ++i) {
    Rng machine_stream = machine_rng(static_cast<int>(i));
    PrivatizedVector value = fn(machines_[i], machine_stream);
    if (trust_ == ServerTrust::kUntrusted && value.noise_free) {
      throw protocol_fault("machine " + std::to_string(i) +
                           " sent a noise-free payload to an untrusted server");
    }
    GradientMessage msg;
    msg.machine_id = static_cast<int>(i);
    msg.round = round_;
    msg.kind = kind;
    msg.payload = std::move(value.value);
    msg.privatized = true;
    check_payload(msg.payload, msg.machine_id);
    log_.append(Direction::kToServer, round_, msg.machine_id, kind, msg.payload);
    out.push_back(std::move(msg));
  }
  return out;
}

void FederatedRun::round_broadcast(const PrivatizedVector& payload, int sparsity_limit,
                                   double clamp_radius) {
  check_payload(payload.value, -1);
  if (sparsity_limit >= 0) {
    int nnz = 0;
    for (Eigen::Index j = 0; j < payload.value.size(); ++j) nnz += (payload.value[j] != 0.0);
    if (nnz > sparsity_limit) {
      throw protocol_fault("broadcast violates the sparsity contract");
    }
  }
  if (clamp_radius >= 0.0 && payload.value.size() > 0 &&
      payload.value.lpNorm<Eigen::Infinity>() > clamp_radius * (1.0 + 1e-12)) {
    throw protocol_fault("broadcast violates the clamp contract");
  }
  log_.append(Direction::kToMachines, round_, -1, PayloadKind::kIterate, payload.value);
  last_broadcast_ = payload.value;
}

void FederatedRun::round_broadcast_raw(const Eigen::VectorXd& payload) {
  if (trust_ == ServerTrust::kTrusted) {
    throw protocol_fault("trusted mode requires privatized broadcasts");
  }
  check_payload(payload, -1);
  log_.append(Direction::kToMachines, round_, -1, PayloadKind::kIterate, payload);
  last_broadcast_ = payload;
}

const MachineDataset& FederatedRun::machine_data(int machine_id) const {
  const auto idx = static_cast<std::size_t>(machine_id);
  if (idx >= machines_.size()) throw std::invalid_argument("machine_data: bad machine id");
  return machines_[idx];
}

Eigen::VectorXd aggregate(const std::vector<GradientMessage>& messages) {
  if (messages.empty()) throw std::invalid_argument("aggregate: no messages");
  std::vector<Eigen::VectorXd> payloads;
  payloads.reserve(messages.size());
  for (const auto& m : messages) payloads.push_back(m.payload);
  return pairwise_sum(payloads);
}

}  // namespace fedspar
