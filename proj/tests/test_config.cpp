#include "gachaos/config.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace gachaos;

namespace {

const std::string kMinimal =
    "[fitness]\nkind = constant\n[model]\ndim = 1\ntau = 0.1\nT = 1\n[experiment]\nn_list = 16, 32\n";

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("defaults are filled and listed") {
  const auto c = parse_config_text(kMinimal);
  CHECK(c.config.replicas == 10);
  CHECK(c.config.reference == ReferenceKind::kGrid);
  CHECK(c.config.n_list == std::vector<std::size_t>{16, 32});
  CHECK(c.config.tau == 0.1);
  CHECK(c.values.at("experiment.replicas") == "10");
  CHECK(std::count(c.defaulted.begin(), c.defaulted.end(), "experiment.replicas") == 1);
  CHECK(std::count(c.defaulted.begin(), c.defaulted.end(), "model.tau") == 0);
  CHECK(c.hash.size() == 64);

  auto d2 = kMinimal;
  d2.replace(d2.find("dim = 1"), 7, "dim = 2");
  CHECK(parse_config_text(d2).config.reference == ReferenceKind::kEnsemble);
}

TEST_CASE("space separated lists") {
  auto text = kMinimal;
  text.replace(text.find("16, 32"), 6, "8 16 32");
  CHECK(parse_config_text(text).config.n_list == std::vector<std::size_t>{8, 16, 32});
}

TEST_CASE("errors name the field") {
  auto bad_tau = kMinimal;
  bad_tau.replace(bad_tau.find("tau = 0.1"), 9, "tau = 1.5");
  CHECK(contains(message_of(bad_tau), "model.tau"));

  auto dup = kMinimal;
  dup.replace(dup.find("16, 32"), 6, "16, 32, 16");
  CHECK(contains(message_of(dup), "experiment.n_list"));

  CHECK(contains(message_of(kMinimal + "bogus = 3\n"), "experiment.bogus"));

  auto missing = kMinimal;
  missing.erase(missing.find("T = 1\n"), 6);
  CHECK(contains(message_of(missing), "model.T"));

  auto word = kMinimal;
  word.replace(word.find("dim = 1"), 7, "dim = one");
  CHECK(contains(message_of(word), "model.dim"));
}

TEST_CASE("hash ignores key order and comments") {
  const std::string shuffled =
      "# same keys\n[experiment]\nn_list = 16, 32\n[model]\nT = 1\ntau = 0.1\ndim = 1\n[fitness]\nkind = constant\n";
  CHECK(parse_config_text(shuffled).hash == parse_config_text(kMinimal).hash);
  CHECK(parse_config_text(kMinimal + "replicas = 11\n").hash != parse_config_text(kMinimal).hash);
}

TEST_CASE("SHA-256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest fields") {
  const auto c = parse_config_text(kMinimal);
  const auto m = make_manifest(&c, 9, "rate-n", {"rate_n.csv"});
  CHECK(m.at("artifact_version") == kArtifactVersion);
  CHECK(m.at("seed") == 9);
  CHECK(m.at("config_hash") == c.hash);
  CHECK(m.at("command") == "rate-n");
  CHECK(m.contains("timestamp"));
  CHECK(m.at("files").size() == 1);
}
