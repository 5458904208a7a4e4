#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sccount/binary_io.hpp"
#include "sccount/nn.hpp"

using namespace sccount;

namespace {

std::vector<std::vector<float>> random_sequence(std::size_t T, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<std::vector<float>> x(T, std::vector<float>(dim));
  for (auto& f : x)
    for (auto& v : f) v = u(rng);
  return x;
}

std::string serialize(const CountModel& m) {
  std::ostringstream os;
  save_weights(os, m);
  return os.str();
}

CountModel zero_model(const ModelSpec& spec) {
  std::map<std::string, Tensor> t;
  for (const auto& s : canonical_layout(spec)) {
    Tensor x{s.dims, {}};
    x.data.assign(x.numel(), 0.0f);
    t.emplace(s.name, std::move(x));
  }
  return CountModel(spec, std::move(t));
}

}  // namespace

TEST(ModelSpec, ShapesAndReceptiveField) {
  const auto gru = ModelSpec::defaults(ModelKind::gru, 802);
  EXPECT_EQ(gru.gru_hidden, 401u);
  EXPECT_EQ(ModelSpec::defaults(ModelKind::gru, 401).gru_hidden, 200u);
  const auto layout = canonical_layout(gru);
  ASSERT_FALSE(layout.empty());
  EXPECT_EQ(layout[0].name, "gru.l0.W_z");
  EXPECT_EQ(layout[0].dims, (std::vector<std::uint32_t>{401, 802}));
  EXPECT_EQ(layout.back().name, "head.bias");
  EXPECT_EQ(layout.size(), 3u * 9u + 2u);

  const auto tcn = ModelSpec::defaults(ModelKind::tcn, 802);
  EXPECT_EQ(tcn.receptive_field(), 43u);
  std::size_t dw = 0;
  for (const auto& s : canonical_layout(tcn))
    if (s.name.ends_with(".dw.weight")) {
      ++dw;
      EXPECT_EQ(s.dims, (std::vector<std::uint32_t>{256, 3}));
    }
  EXPECT_EQ(dw, 9u);
  EXPECT_EQ(canonical_layout(tcn).size(), 2u + 9u * 12u + 2u);
}

TEST(Weights, RoundTripIsBitExactAndIdempotent) {
  for (ModelKind kind : {ModelKind::gru, ModelKind::tcn}) {
    const CountModel m = CountModel::random(ModelSpec::defaults(kind, 40), 3);
    const std::string a = serialize(m);
    std::istringstream is(a);
    const CountModel back = load_weights(is);
    EXPECT_EQ(serialize(back), a);
    EXPECT_EQ(serialize(m), a);
    for (const auto& [name, t] : m.tensors()) EXPECT_EQ(back.tensor(name).data, t.data) << name;
  }
}

TEST(Weights, LoaderIgnoresTensorOrder) {
  const CountModel m = CountModel::random(ModelSpec::defaults(ModelKind::gru, 6), 4);
  std::ostringstream os;
  os.write("SCW1", 4);
  detail::write_pod<std::uint32_t>(os, 1);
  detail::write_pod<std::uint8_t>(os, 0);
  detail::write_pod<std::uint32_t>(os, 6);
  detail::write_pod<std::uint32_t>(os, 5);
  auto layout = canonical_layout(m.spec());
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layout.size()));
  for (auto it = layout.rbegin(); it != layout.rend(); ++it) {
    const auto& t = m.tensor(it->name);
    detail::write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(it->name.size()));
    os.write(it->name.data(), static_cast<std::streamsize>(it->name.size()));
    detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) detail::write_pod<std::uint32_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 4));
  }
  std::istringstream is(os.str());
  const CountModel back = load_weights(is);
  EXPECT_EQ(serialize(back), serialize(m));
}

TEST(Weights, Errors) {
  const CountModel m = CountModel::random(ModelSpec::defaults(ModelKind::gru, 6), 5);
  std::string good = serialize(m);

  std::string bad = good;
  bad.replace(0, 4, "XXXX");
  std::istringstream b1(bad);
  try {
    load_weights(b1);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }

  bad = good;
  bad[4] = 2;  // version
  std::istringstream b2(bad);
  EXPECT_THROW(load_weights(b2), FormatError);

  std::istringstream b3(good.substr(0, good.size() - 3));
  EXPECT_THROW(load_weights(b3), FormatError);

  // Non-finite value in the last tensor.
  bad = good;
  const float nan = std::nanf("");
  std::memcpy(bad.data() + bad.size() - 4, &nan, 4);
  std::istringstream b4(bad);
  EXPECT_THROW(load_weights(b4), FormatError);

  // Shape mismatch names the tensor.
  auto tensors = m.tensors();
  tensors["gru.l1.U_r"].dims = {3, 2};
  tensors["gru.l1.U_r"].data.resize(6);
  try {
    CountModel(m.spec(), tensors);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("gru.l1.U_r"), std::string::npos);
  }
  tensors = m.tensors();
  tensors.erase("head.weight");
  EXPECT_THROW(CountModel(m.spec(), tensors), FormatError);
}

TEST(Gru, ZeroNetworkIsUniform) {
  const CountModel m = zero_model(ModelSpec::defaults(ModelKind::gru, 10));
  GruStream g(m);
  const auto x = random_sequence(20, 10, 1);
  for (const auto& f : x) {
    const auto p = g.step(f);
    for (float v : p) EXPECT_FLOAT_EQ(v, 0.2f);
  }
  for (const auto& h : g.hidden())
    for (float v : h) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(argmax_count(g.step(x[0])), 0);
}

TEST(Gru, HandComputedSingleLayer) {
  ModelSpec s = ModelSpec::defaults(ModelKind::gru, 2, 2);
  s.gru_layers = 1;
  ASSERT_EQ(s.gru_hidden, 1u);
  std::map<std::string, Tensor> t;
  auto put = [&](const std::string& n, std::vector<std::uint32_t> dims, std::vector<float> v) {
    t[n] = Tensor{std::move(dims), std::move(v)};
  };
  put("gru.l0.W_z", {1, 2}, {0.5f, -0.25f});
  put("gru.l0.U_z", {1, 1}, {0.75f});
  put("gru.l0.b_z", {1}, {0.125f});
  put("gru.l0.W_r", {1, 2}, {-1.0f, 0.5f});
  put("gru.l0.U_r", {1, 1}, {0.25f});
  put("gru.l0.b_r", {1}, {0.0f});
  put("gru.l0.W_h", {1, 2}, {1.5f, 1.0f});
  put("gru.l0.U_h", {1, 1}, {-0.5f});
  put("gru.l0.b_h", {1}, {-0.25f});
  put("head.weight", {2, 1}, {2.0f, -1.0f});
  put("head.bias", {2}, {0.0f, 0.5f});
  const CountModel m(s, t);
  GruStream g(m);

  // Recurrence written out by hand.
  const float xs[3][2] = {{1.0f, 0.0f}, {0.5f, -1.0f}, {-0.25f, 2.0f}};
  double h = 0.0;
  for (const auto& x : xs) {
    const double z = 1.0 / (1.0 + std::exp(-(0.5 * x[0] - 0.25 * x[1] + 0.75 * h + 0.125)));
    const double r = 1.0 / (1.0 + std::exp(-(-1.0 * x[0] + 0.5 * x[1] + 0.25 * h)));
    const double c = std::tanh(1.5 * x[0] + 1.0 * x[1] - 0.5 * (r * h) - 0.25);
    h = (1.0 - z) * h + z * c;
    const double l0 = 2.0 * h, l1 = -h + 0.5;
    const double p0 = 1.0 / (1.0 + std::exp(l1 - l0));
    const auto p = g.step(std::vector<float>{x[0], x[1]});
    EXPECT_NEAR(g.hidden()[0][0], h, 1e-6);
    EXPECT_NEAR(p[0], p0, 1e-6);
    EXPECT_NEAR(p[1], 1.0 - p0, 1e-6);
  }
}

TEST(Gru, HiddenBoundedAndProbabilitiesNormalised) {
  const CountModel m = CountModel::random(ModelSpec::defaults(ModelKind::gru, 64), 7);
  GruStream g(m);
  const auto x = random_sequence(300, 64, 2);
  for (const auto& f : x) {
    const auto p = g.step(f);
    double sum = 0.0;
    for (float v : p) {
      EXPECT_GT(v, 0.0f);
      EXPECT_LT(v, 1.0f);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
    for (const auto& h : g.hidden())
      for (float v : h) {
        ASSERT_GT(v, -1.0f);
        ASSERT_LT(v, 1.0f);
      }
  }
  EXPECT_THROW(g.step(std::vector<float>(63)), UsageError);
}

TEST(Gru, FullSizeModelRunsAndIsDeterministic) {
  const CountModel m = CountModel::random(ModelSpec::defaults(ModelKind::gru, 802), 8);
  const auto x = random_sequence(5, 802, 3);
  CountEstimator a(m), b(m);
  for (const auto& f : x) {
    const auto pa = a.step(f);
    EXPECT_EQ(pa, b.step(f));
    const int k = argmax_count(pa);
    EXPECT_GE(k, 0);
    EXPECT_LE(k, 4);
  }
}

TEST(Tcn, StreamingMatchesWholeSequence) {
  const CountModel m = CountModel::random(ModelSpec::defaults(ModelKind::tcn, 24), 9);
  const auto x = random_sequence(120, 24, 4);
  const auto offline = tcn_forward_sequence(m, x);
  TcnStream s(m);
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_EQ(s.step(x[t]), offline[t]) << "t " << t;
  s.reset();
  EXPECT_EQ(s.step(x[0]), offline[0]);
}

TEST(Tcn, CausalAndExactReceptiveField) {
  const CountModel m = CountModel::random(ModelSpec::defaults(ModelKind::tcn, 16), 10);
  const auto x = random_sequence(100, 16, 5);
  const auto base = tcn_forward_sequence(m, x);
  const std::size_t t = 80;
  for (std::size_t s = 0; s < x.size(); ++s) {
    auto y = x;
    for (auto& v : y[s]) v += 0.5f;
    const auto out = tcn_forward_sequence(m, y);
    const bool changed = out[t] != base[t];
    if (s > t || s + 43 <= t) EXPECT_FALSE(changed) << "frame " << s;
    else EXPECT_TRUE(changed) << "frame " << s;
  }
}

TEST(Softmax, NormalisedAndArgmaxRules) {
  std::mt19937_64 rng(11);
  std::normal_distribution<float> g(0.0f, 5.0f);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<float> l(5);
    for (auto& v : l) v = g(rng);
    const auto p = softmax(l);
    double sum = 0.0;
    for (float v : p) sum += v;
    ASSERT_NEAR(sum, 1.0, 1e-6);
    const int k = argmax_count(p);
    ASSERT_GE(k, 0);
    ASSERT_LE(k, 4);
  }
  EXPECT_EQ(argmax_count(std::vector<float>{0.1f, 0.7f, 0.1f, 0.05f, 0.05f}), 1);
  EXPECT_EQ(argmax_count(std::vector<float>(5, 0.2f)), 0);
  EXPECT_EQ(argmax_count(std::vector<float>{0.1f, 0.4f, 0.1f, 0.4f}), 1);
  EXPECT_THROW(argmax_count(std::vector<float>{}), UsageError);
  EXPECT_THROW(softmax(std::vector<float>{}), UsageError);
  const auto big = softmax(std::vector<float>{1000.0f, 1000.0f, -1000.0f});
  EXPECT_FLOAT_EQ(big[0], 0.5f);
  EXPECT_EQ(argmax_count(big), 0);
}

TEST(Estimator, KindMismatch) {
  const CountModel gru = CountModel::random(ModelSpec::defaults(ModelKind::gru, 4), 1);
  EXPECT_THROW(TcnStream{gru}, UsageError);
  const CountModel tcn = CountModel::random(ModelSpec::defaults(ModelKind::tcn, 4), 1);
  EXPECT_THROW(GruStream{tcn}, UsageError);
  EXPECT_THROW(tcn_forward_sequence(gru, {}), UsageError);
}
