#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "fedspar/fednet.hpp"
#include "fedspar/model.hpp"

using namespace fedspar;

namespace {

std::vector<MachineDataset> tiny_federation(int m, int n, int d, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<MachineDataset> data(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    auto& ds = data[static_cast<std::size_t>(i)];
    ds.machine_id = i;
    ds.X.resize(n, d);
    ds.y.resize(n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < d; ++c) ds.X(r, c) = rng.gaussian();
      ds.y[r] = rng.gaussian();
    }
  }
  return data;
}

}  // namespace

TEST_CASE("single machine gathers exactly one message and aggregates to it") {
  FederatedRun run(tiny_federation(1, 4, 3, 1), Rng(1, 1));
  const auto msgs = run.round_gather(
      PayloadKind::kGradient,
      [](const MachineDataset& ds, const Eigen::VectorXd*) {
        return Eigen::VectorXd(ds.X.colwise().sum());
      });
  REQUIRE(msgs.size() == 1);
  CHECK((aggregate(msgs) - msgs[0].payload).norm() == 0.0);
}

TEST_CASE("all-zero local payloads aggregate to zero") {
  FederatedRun run(tiny_federation(4, 3, 5, 2), Rng(2, 2));
  const auto msgs = run.round_gather(
      PayloadKind::kGradient,
      [](const MachineDataset&, const Eigen::VectorXd*) {
        return Eigen::VectorXd(Eigen::VectorXd::Zero(5));
      });
  CHECK(aggregate(msgs).norm() == 0.0);
}

TEST_CASE("log grows by m per gather and one per broadcast") {
  FederatedRun run(tiny_federation(3, 2, 4, 3), Rng(3, 3));
  CHECK(run.log().size() == 0);
  run.round_gather(PayloadKind::kGradient,
                   [](const MachineDataset&, const Eigen::VectorXd*) {
                     return Eigen::VectorXd(Eigen::VectorXd::Ones(4));
                   });
  CHECK(run.log().size() == 3);
  run.round_broadcast({Eigen::VectorXd::Zero(4), PrivacyBudget{}, true});
  CHECK(run.log().size() == 4);
}

TEST_CASE("broadcast read-back and latest-wins semantics") {
  FederatedRun run(tiny_federation(2, 2, 3, 4), Rng(4, 4));
  Eigen::VectorXd first(3), second(3);
  first << 1.0, 2.0, 3.0;
  second << -1.0, 0.0, 1.0;
  run.round_broadcast({first, PrivacyBudget{}, true});
  const auto seen = run.round_gather(
      PayloadKind::kGradient,
      [](const MachineDataset&, const Eigen::VectorXd* b) { return *b; });
  for (const auto& msg : seen) CHECK((msg.payload - first).norm() == 0.0);

  run.round_broadcast({second, PrivacyBudget{}, true});
  const auto seen2 = run.round_gather(
      PayloadKind::kGradient,
      [](const MachineDataset&, const Eigen::VectorXd* b) { return *b; });
  for (const auto& msg : seen2) CHECK((msg.payload - second).norm() == 0.0);
}

TEST_CASE("raw broadcast faults in trusted mode but passes untrusted") {
  FederatedRun trusted(tiny_federation(2, 2, 3, 5), Rng(5, 5), ServerTrust::kTrusted);
  CHECK_THROWS_AS(trusted.round_broadcast_raw(Eigen::VectorXd::Zero(3)), protocol_fault);

  FederatedRun open(tiny_federation(2, 2, 3, 5), Rng(5, 6), ServerTrust::kUntrusted);
  CHECK_NOTHROW(open.round_broadcast_raw(Eigen::VectorXd::Zero(3)));
}

TEST_CASE("untrusted mode rejects raw and noise-free machine traffic") {
  FederatedRun open(tiny_federation(2, 2, 3, 6), Rng(6, 6), ServerTrust::kUntrusted);
  CHECK_THROWS_AS(open.round_gather(PayloadKind::kGradient,
                                    [](const MachineDataset&, const Eigen::VectorXd*) {
                                      return Eigen::VectorXd(Eigen::VectorXd::Zero(3));
                                    }),
                  protocol_fault);
  CHECK_THROWS_AS(
      open.round_gather_private(PayloadKind::kSignBits,
                                [](const MachineDataset&, Rng&) {
                                  return PrivatizedVector{Eigen::VectorXd::Zero(3),
                                                          PrivacyBudget{}, true};
                                }),
      protocol_fault);
  CHECK_NOTHROW(open.round_gather_private(
      PayloadKind::kSignBits, [](const MachineDataset&, Rng&) {
        return PrivatizedVector{Eigen::VectorXd::Zero(3), PrivacyBudget(1.0, 0.0), false};
      }));
}

TEST_CASE("non-finite payloads raise a protocol fault naming the machine") {
  FederatedRun run(tiny_federation(3, 2, 2, 7), Rng(7, 7));
  try {
    run.round_gather(PayloadKind::kGradient,
                     [](const MachineDataset& ds, const Eigen::VectorXd*) {
                       Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
                       if (ds.machine_id == 1) v[0] = std::nan("");
                       return v;
                     });
    FAIL("expected protocol_fault");
  } catch (const protocol_fault& e) {
    CHECK(std::string(e.what()).find("machine 1") != std::string::npos);
  }
}

TEST_CASE("broadcast contract checks") {
  FederatedRun run(tiny_federation(2, 2, 4, 8), Rng(8, 8));
  Eigen::VectorXd dense(4);
  dense << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(run.round_broadcast({dense, PrivacyBudget{}, true}, 2, 10.0),
                  protocol_fault);
  Eigen::VectorXd tall(4);
  tall << 9.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(run.round_broadcast({tall, PrivacyBudget{}, true}, 2, 5.0), protocol_fault);
  CHECK_NOTHROW(run.round_broadcast({tall, PrivacyBudget{}, true}, 2, 9.0));
}

TEST_CASE("log hash sequence is deterministic for a fixed seed") {
  auto run_once = [] {
    FederatedRun run(tiny_federation(3, 4, 5, 9), Rng(9, 9));
    run.round_broadcast({Eigen::VectorXd::Zero(5), PrivacyBudget{}, true});
    run.round_gather(PayloadKind::kGradient,
                     [](const MachineDataset& ds, const Eigen::VectorXd* b) {
                       return Eigen::VectorXd(ds.X.transpose() * ds.y + *b);
                     });
    std::vector<std::string> hashes;
    for (const auto& e : run.log().entries()) hashes.push_back(e.payload_sha256);
    return hashes;
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("jsonl dump parses and carries only allowed kinds") {
  FederatedRun run(tiny_federation(2, 3, 3, 10), Rng(10, 10));
  run.round_broadcast({Eigen::VectorXd::Zero(3), PrivacyBudget{}, true});
  run.round_gather(PayloadKind::kQuadraticForm,
                   [](const MachineDataset&, const Eigen::VectorXd*) {
                     return Eigen::VectorXd(Eigen::VectorXd::Ones(2));
                   });
  std::stringstream ss;
  run.log().dump_jsonl(ss);
  const std::set<std::string> allowed = {"gradient",         "quadratic_form", "bootstrap_vector",
                                         "scalar",           "iterate",        "sign_bits"};
  std::string line;
  int lines = 0;
  while (std::getline(ss, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(allowed.count(j.at("kind").get<std::string>()) == 1);
    CHECK(j.at("sha256").get<std::string>().size() == 64);
    ++lines;
  }
  CHECK(lines == 3);
}

TEST_CASE("machine rng streams are stable and distinct") {
  FederatedRun run(tiny_federation(3, 2, 2, 11), Rng(11, 11));
  Rng a0 = run.machine_rng(0);
  Rng a0_again = run.machine_rng(0);
  Rng a1 = run.machine_rng(1);
  CHECK(a0.next_u64() == a0_again.next_u64());
  Rng b0 = run.machine_rng(0);
  CHECK(b0.next_u64() != a1.next_u64());
}
