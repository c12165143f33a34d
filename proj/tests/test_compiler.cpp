#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "lutkan/compiler.hpp"
#include "lutkan/float16.hpp"
#include "lutkan/model_gen.hpp"
#include "lutkan/rng.hpp"

using namespace lutkan;

namespace {

KanLayerSpec tiny_layer(std::vector<double> coeffs, std::vector<double> breakpoints, int degree) {
  KnotGrid g(std::move(breakpoints), degree);
  EdgeParams e;
  e.coeffs = std::move(coeffs);
  e.base_scale = 0.9;
  e.spline_scale = 1.2;
  e.out_scale = 0.7;
  return KanLayerSpec(1, 1, g, "silu", {e});
}

double dequant_code(const SegmentQuant& sq, std::size_t i) {
  return sq.y_min + sq.scale * sq.q[i];
}

}  // namespace

TEST_CASE("quant config validation") {
  QuantConfig c;
  c.samples_per_segment = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.samples_per_segment = 2;
  CHECK_NOTHROW(c.validate());
  c.scheme = Scheme::Symmetric;
  c.dtype = Dtype::Uint8;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.scheme = Scheme::Asymmetric;
  CHECK_NOTHROW(c.validate());
  c.dtype = Dtype::Int8;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("segment sample points exclude the right endpoint") {
  auto p = sample_segment_points({0.0, 1.0, 2.0}, 0, 4);
  REQUIRE_EQ(p.size(), 4);
  CHECK_EQ(p[0], 0.0);
  CHECK_EQ(p[1], doctest::Approx(0.25));
  CHECK_EQ(p[2], doctest::Approx(0.5));
  CHECK_EQ(p[3], doctest::Approx(0.75));
  p = sample_segment_points({0.0, 1.0, 2.0}, 1, 4);
  CHECK_EQ(p[0], 1.0);
  CHECK_EQ(p[3], doctest::Approx(1.75));
  p = sample_segment_points({0.0, 0.5, 2.0}, 1, 3);
  CHECK_EQ(p[0], 0.5);
  CHECK_EQ(p[1], doctest::Approx(1.0));
  CHECK_EQ(p[2], doctest::Approx(1.5));
}

TEST_CASE("float table holds spline or full edge values") {
  auto layer = tiny_layer({0.4, -0.3, 0.8, 0.1, -0.6}, {-1.0, 0.0, 1.0}, 3);
  QuantConfig cfg;
  cfg.samples_per_segment = 8;

  cfg.value_repr = ValueRepr::SplineComponent;
  auto lut = build_float_lut(layer, cfg);
  CHECK_EQ(lut.edges, 1);
  CHECK_EQ(lut.segments, 2);
  REQUIRE_EQ(lut.values.size(), 16);
  REQUIRE_EQ(lut.sample_points.size(), 16);
  const auto& e = layer.edges()[0];
  for (int k = 0; k < 2; ++k) {
    const auto pts = sample_segment_points(layer.grid().breakpoints(), k, 8);
    for (int l = 0; l < 8; ++l) {
      CHECK_EQ(lut.sample_points[k * 8 + l], pts[l]);
      const double want = eval_spline(layer.grid(), e.coeffs, pts[l]);
      CHECK_EQ(lut.values[k * 8 + l], doctest::Approx(want).epsilon(1e-15));
    }
  }

  cfg.value_repr = ValueRepr::Phi;
  lut = build_float_lut(layer, cfg);
  for (std::size_t i = 0; i < lut.values.size(); ++i) {
    const double x = lut.sample_points[i];
    const double want = eval_edge_phi(layer.grid(), e, "silu", x);
    CHECK_EQ(lut.values[i], doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("symmetric quantization worked example") {
  const auto sq = quantize_segment_symmetric({-2.54, 0.0, 1.27, 2.54});
  CHECK_EQ(sq.y_min, 0.0);
  CHECK_EQ(sq.scale, doctest::Approx(0.02).epsilon(1e-12));
  REQUIRE_EQ(sq.q.size(), 4);
  CHECK_EQ(sq.q[0], -127);
  CHECK_EQ(sq.q[1], 0);
  CHECK_EQ(sq.q[2], 64);  // 63.5 rounds away from zero
  CHECK_EQ(sq.q[3], 127);
  CHECK_EQ(dequant_code(sq, 2), doctest::Approx(1.28).epsilon(1e-12));
}

TEST_CASE("asymmetric quantization worked example") {
  const auto sq = quantize_segment_asymmetric({1.0, 2.275, 3.55});
  CHECK_EQ(sq.y_min, 1.0);
  CHECK_EQ(sq.scale, doctest::Approx(0.01).epsilon(1e-12));
  REQUIRE_EQ(sq.q.size(), 3);
  CHECK_EQ(sq.q[0], 0);
  CHECK_EQ(sq.q[1], 128);  // 127.5 rounds up
  CHECK_EQ(sq.q[2], 255);
  CHECK_EQ(dequant_code(sq, 1), doctest::Approx(2.28).epsilon(1e-12));
}

TEST_CASE("degenerate segments quantize to code zero") {
  auto sq = quantize_segment_asymmetric({5.0, 5.0, 5.0});
  CHECK_EQ(sq.scale, 0.0);
  CHECK_EQ(sq.y_min, 5.0);
  for (int q : sq.q) CHECK_EQ(q, 0);
  CHECK_EQ(dequant_code(sq, 0), 5.0);

  sq = quantize_segment_symmetric({0.0, 0.0});
  CHECK_EQ(sq.scale, 0.0);
  for (int q : sq.q) CHECK_EQ(q, 0);

  // a nonzero constant is not degenerate under the symmetric scheme
  sq = quantize_segment_symmetric({5.0, 5.0});
  CHECK_GT(sq.scale, 0.0);
  for (int q : sq.q) CHECK_EQ(q, 127);
  CHECK_EQ(dequant_code(sq, 0), doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("quantization rejects bad segments") {
  CHECK_THROWS_AS(quantize_segment_symmetric({}), ConfigError);
  CHECK_THROWS_AS(quantize_segment_symmetric({0.0, std::nan("")}), NonFiniteError);
  CHECK_THROWS_AS(quantize_segment_asymmetric({1.0, INFINITY}), NonFiniteError);
}

TEST_CASE("half-step bound over random, constant, and zero segments") {
  Rng rng(101);
  std::size_t checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 15);
    std::vector<double> v(n);
    const int kind = trial % 4;
    if (kind == 0) {
      const double mag = std::pow(10.0, rng.uniform(-4.0, 3.0));
      for (auto& x : v) x = rng.normal(0.0, mag);
    } else if (kind == 1) {
      const double base = rng.normal(0.0, 10.0);
      for (auto& x : v) x = base + rng.normal(0.0, 1e-6);  // near-constant
    } else if (kind == 2) {
      std::fill(v.begin(), v.end(), rng.normal(0.0, 5.0));  // exactly constant
    } else {
      std::fill(v.begin(), v.end(), 0.0);
    }
    for (bool sym : {true, false}) {
      const auto sq = sym ? quantize_segment_symmetric(v) : quantize_segment_asymmetric(v);
      for (int i = 0; i < n; ++i) {
        const double err = std::abs(dequant_code(sq, i) - v[i]);
        CHECK_LE(err, sq.scale / 2 + 1e-9);
        ++checked;
      }
      const int lo = sym ? -127 : 0, hi = sym ? 127 : 255;
      for (int q : sq.q) {
        CHECK_GE(q, lo);
        CHECK_LE(q, hi);
      }
    }
  }
  CHECK_GT(checked, 10000);
}

TEST_CASE("symmetric codes never reach -128") {
  // adversarial: exact negatives of the segment max, plus near-tie ratios
  Rng rng(103);
  for (int trial = 0; trial < 2000; ++trial) {
    const double m = std::pow(10.0, rng.uniform(-3.0, 3.0));
    std::vector<double> v = {-m, m, -m * (126.5 / 127.0), -m * (1.0 - 1e-16)};
    const auto sq = quantize_segment_symmetric(v);
    for (int q : sq.q) CHECK_GE(q, -127);
    CHECK_EQ(sq.q[0], -127);
  }
}

TEST_CASE("compiled artifact shapes and conventions") {
  const auto layer = gen_sanity_layer(0);
  QuantConfig cfg;
  cfg.samples_per_segment = 32;
  const auto a = compile_layer(layer, cfg, OobConfig{});
  CHECK_EQ(a.in_dim, 10);
  CHECK_EQ(a.out_dim, 8);
  CHECK_EQ(a.L, 32);
  CHECK_EQ(a.segment_count(), 8);
  CHECK_EQ(a.q_table.size(), 80u * 8u * 32u);
  CHECK_EQ(a.scale.size(), 640u);
  CHECK_EQ(a.y_min.size(), 640u);
  CHECK_EQ(a.knots.size(), 9u);
  CHECK_EQ(a.edge_base_scale.size(), 80u);
  CHECK_EQ(a.base_kind, "silu");
  for (float ym : a.y_min) CHECK_EQ(ym, 0.0f);  // symmetric pins the offset

  QuantConfig phi = cfg;
  phi.value_repr = ValueRepr::Phi;
  phi.scheme = Scheme::Asymmetric;
  phi.dtype = Dtype::Uint8;
  const auto b = compile_layer(layer, phi, OobConfig{});
  CHECK(b.edge_base_scale.empty());
  CHECK(b.edge_spline_scale.empty());
  CHECK(b.edge_out_scale.empty());
  CHECK_EQ(b.base_kind, "");
}

TEST_CASE("artifact dequantization stays within half a step of the float table") {
  const auto layer = gen_sanity_layer(1);
  QuantConfig cfg;
  cfg.samples_per_segment = 64;
  for (auto scheme : {Scheme::Symmetric, Scheme::Asymmetric}) {
    cfg.scheme = scheme;
    cfg.dtype = scheme == Scheme::Symmetric ? Dtype::Int8 : Dtype::Uint8;
    const auto a = compile_layer(layer, cfg, OobConfig{});
    const auto lut = build_float_lut(layer, cfg);
    const std::size_t cells = a.scale.size();
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const double scale = a.scale[cell];
      const double y_min = a.y_min[cell];
      for (int l = 0; l < 64; ++l) {
        const std::size_t i = cell * 64 + l;
        const double code = scheme == Scheme::Symmetric
                                ? static_cast<double>(static_cast<std::int8_t>(a.q_table[i]))
                                : static_cast<double>(a.q_table[i]);
        const double err = std::abs(y_min + scale * code - lut.values[i]);
        CHECK_LE(err, scale / 2 + 1e-9);
      }
    }
  }
}

TEST_CASE("f16 parameter storage is exactly representable") {
  const auto layer = gen_sanity_layer(2);
  QuantConfig cfg;
  cfg.samples_per_segment = 16;
  cfg.scheme = Scheme::Asymmetric;
  cfg.dtype = Dtype::Uint8;
  cfg.param_dtype = ParamDtype::F16;
  const auto a = compile_layer(layer, cfg, OobConfig{});
  CHECK_EQ(a.param_dtype, ParamDtype::F16);
  for (float s : a.scale) CHECK_EQ(s, round_through_f16(s));
  for (float y : a.y_min) CHECK_EQ(y, round_through_f16(y));
}

TEST_CASE("multi-layer compilation checks the chain") {
  std::vector<KanLayerSpec> layers = {
      gen_layer(7, 78, 32, 4, 3), gen_layer(8, 32, 16, 4, 3), gen_layer(9, 16, 1, 4, 3)};
  QuantConfig cfg;
  cfg.samples_per_segment = 8;
  const auto arts = compile_model(layers, cfg, OobConfig{});
  REQUIRE_EQ(arts.size(), 3);
  CHECK_EQ(arts[0].edge_count(), 2496);
  CHECK_EQ(arts[1].edge_count(), 512);
  CHECK_EQ(arts[2].edge_count(), 16);

  std::vector<KanLayerSpec> broken = {gen_layer(7, 4, 3, 4, 3), gen_layer(8, 5, 2, 4, 3)};
  CHECK_THROWS_AS(compile_model(broken, cfg, OobConfig{}), DimensionError);
  CHECK_THROWS_AS(compile_model({}, cfg, OobConfig{}), ConfigError);
}

TEST_CASE("compilation is deterministic") {
  QuantConfig cfg;
  cfg.samples_per_segment = 32;
  cfg.scheme = Scheme::Asymmetric;
  cfg.dtype = Dtype::Uint8;
  const auto a = compile_layer(gen_sanity_layer(11), cfg, OobConfig{});
  const auto b = compile_layer(gen_sanity_layer(11), cfg, OobConfig{});
  CHECK(a.q_table == b.q_table);
  CHECK(a.scale == b.scale);
  CHECK(a.y_min == b.y_min);
  CHECK(a.knots == b.knots);
  CHECK(a.edge_out_scale == b.edge_out_scale);
}

TEST_CASE("debug float copy mirrors the table it was quantized from") {
  const auto layer = gen_layer(13, 2, 3, 4, 2);
  QuantConfig cfg;
  cfg.samples_per_segment = 8;
  const auto dbg = compile_layer_debug_float(layer, cfg, OobConfig{});
  const auto lut = build_float_lut(layer, cfg);
  CHECK(dbg.float_table == lut.values);
  const auto plain = compile_layer(layer, cfg, OobConfig{});
  CHECK(plain.float_table.empty());
  CHECK(dbg.q_table == plain.q_table);
}
