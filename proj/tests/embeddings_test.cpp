#include <gtest/gtest.h>

#include <cmath>

#include "vtt/embeddings.hpp"
#include "vtt/synth.hpp"

namespace vtt {
namespace {

double norm(const Embedding& e) {
  double s = 0;
  for (double x : e) s += x * x;
  return std::sqrt(s);
}

GrayFrame test_texture() {
  GrayFrame f(40, 16, 128);
  render_box(f, RotatedRect{20, 8, 40, 16, 0.0}, 4242);
  return f;
}

TEST(Embeddings, PatchDescriptorExamples) {
  const GrayFrame f = test_texture();
  const Embedding e = patch_descriptor(f);
  ASSERT_EQ(e.size(), 256u);
  EXPECT_NEAR(norm(e), 1.0, 1e-12);
  EXPECT_EQ(embedding_distance(e, patch_descriptor(f)), 0.0);

  GrayFrame shifted(40, 16);
  GrayFrame dim(40, 16);
  for (std::size_t k = 0; k < f.values().size(); ++k) {
    dim.values()[k] = static_cast<std::uint8_t>(f.values()[k] / 2);
    shifted.values()[k] = static_cast<std::uint8_t>(dim.values()[k] + 30);
  }
  EXPECT_NEAR(embedding_distance(patch_descriptor(dim), patch_descriptor(shifted)), 0.0, 1e-6);

  GrayFrame mirror(40, 16);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 40; ++c) mirror.at(r, c) = f.at(r, 39 - c);
  }
  const double d = embedding_distance(e, patch_descriptor(mirror));
  EXPECT_GT(d, 0.1);
  EXPECT_NEAR(d, 1.3619144507792695, 1e-9);

  const Embedding flat = patch_descriptor(GrayFrame(9, 5, 200));
  EXPECT_EQ(flat, Embedding(256, 0.0));
  EXPECT_THROW(patch_descriptor(GrayFrame{}), ContractError);
}

TEST(Embeddings, TranscriptionDescriptorExamples) {
  const Embedding s = transcription_descriptor("STOP");
  ASSERT_EQ(s.size(), 256u);
  EXPECT_NEAR(norm(s), 1.0, 1e-12);
  EXPECT_EQ(embedding_distance(s, transcription_descriptor("STOP")), 0.0);
  EXPECT_EQ(transcription_descriptor(""), Embedding(256, 0.0));
  EXPECT_NEAR(embedding_distance(s, transcription_descriptor("POTS")), 1.4142135623730949, 1e-9);
  EXPECT_NE(transcription_descriptor("ab"), transcription_descriptor("ba"));
}

TEST(Embeddings, DescriptorsAreUnitOrZero) {
  Rng rng = make_stream(401, "descriptor-norms");
  for (int i = 0; i < 100; ++i) {
    GrayFrame p(1 + static_cast<int>(rng.below(40)), 1 + static_cast<int>(rng.below(20)));
    const bool flat = rng.bernoulli(0.2);
    for (auto& v : p.values()) v = static_cast<std::uint8_t>(flat ? 50 : rng.integer(0, 255));
    const double n = norm(patch_descriptor(p));
    EXPECT_TRUE(n == 0.0 || std::abs(n - 1.0) < 1e-12) << n;

    std::string text;
    for (std::uint64_t k = rng.below(12); k > 0; --k) text.push_back(static_cast<char>(rng.integer(32, 126)));
    const double t = norm(transcription_descriptor(text));
    EXPECT_TRUE(text.empty() ? t == 0.0 : std::abs(t - 1.0) < 1e-12);
  }
}

TEST(Embeddings, ConcatenationShapeAndPythagoras) {
  const Embedding z = concat_embedding(Embedding(256, 0.0), Embedding(256, 0.0), 256, 256);
  EXPECT_EQ(z, Embedding(512, 0.0));
  EXPECT_THROW(concat_embedding(Embedding(255, 0.0), Embedding(256, 0.0), 256, 256), ContractError);

  Rng rng = make_stream(403, "concat");
  for (int i = 0; i < 50; ++i) {
    Embedding v1(256), v2(256), s1(256), s2(256);
    for (auto* e : {&v1, &v2, &s1, &s2}) {
      for (double& x : *e) x = rng.normal();
    }
    const double dv = embedding_distance(v1, v2), ds = embedding_distance(s1, s2);
    const double d = embedding_distance(concat_embedding(v1, s1, 256, 256),
                                        concat_embedding(v2, s2, 256, 256));
    EXPECT_NEAR(d, std::sqrt(dv * dv + ds * ds), 1e-9);
    const Embedding c = concat_embedding(v1, s1, 256, 256);
    EXPECT_EQ(c[0], v1[0]);
    EXPECT_EQ(c[256], s1[0]);
  }
}

TEST(Embeddings, TripletLossExamples) {
  const Embedding a{0.0, 0.0}, n2{2.0, 0.0};
  EXPECT_NEAR(triplet_loss(a, a, n2, 1.0), 0.0, 1e-9);
  const Embedding p{0.2, 0.0}, n{0.0, 0.5};
  EXPECT_NEAR(triplet_loss(a, p, n, 1.0), 0.7, 1e-9);
  EXPECT_NEAR(triplet_loss(a, a, a, 1.0), 1.0, 1e-9);
  EXPECT_THROW(triplet_loss(a, p, Embedding{1.0}, 1.0), ContractError);
  EXPECT_THROW(triplet_loss(a, p, n, -0.1), ContractError);
}

TEST(Embeddings, TripletLossZeroIffMarginSatisfied) {
  Rng rng = make_stream(405, "triplet-props");
  for (int i = 0; i < 500; ++i) {
    Embedding a(4), p(4), n(4);
    for (auto* e : {&a, &p, &n}) {
      for (double& x : *e) x = rng.uniform(-1, 1);
    }
    const double m = rng.uniform(0, 1);
    const double l = triplet_loss(a, p, n, m);
    EXPECT_GE(l, 0.0);
    const double an = embedding_distance(a, n), ap = embedding_distance(a, p);
    EXPECT_EQ(l == 0.0, an >= ap + m);
  }
}

TEST(Embeddings, HardMineSeparatedClusters) {
  const std::vector<LabeledEmbedding> batch{
      {{0.0, 0.0}, 1}, {{0.1, 0.0}, 1}, {{10.0, 0.0}, 2}, {{10.0, 0.1}, 2}};
  const auto t = hard_mine(batch);
  ASSERT_EQ(t.size(), 4u);
  for (const Triplet& x : t) {
    EXPECT_EQ(x.anchor_id, x.positive_id);
    EXPECT_NE(x.anchor_id, x.negative_id);
    EXPECT_EQ(triplet_loss(x.anchor, x.positive, x.negative, 5.0), 0.0);
  }
  EXPECT_TRUE(hard_mine(std::vector<LabeledEmbedding>{{{0.0}, 1}, {{1.0}, 1}}).empty());
}

TEST(Embeddings, HardMineMatchesPairwiseScan) {
  Rng rng = make_stream(407, "hard-mine");
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(63);
    std::vector<LabeledEmbedding> batch(n);
    for (auto& b : batch) {
      b.embedding.resize(3);
      // Coarse grid coordinates so distance ties occur.
      for (double& x : b.embedding) x = static_cast<double>(rng.integer(0, 3));
      b.id = rng.integer(0, 3);
    }
    const auto t = hard_mine(batch);
    std::size_t k = 0;
    for (std::size_t a = 0; a < n; ++a) {
      auto dist = [&](std::size_t j) {
        double s = 0;
        for (int d = 0; d < 3; ++d) {
          const double v = batch[a].embedding[d] - batch[j].embedding[d];
          s += v * v;
        }
        return std::sqrt(s);
      };
      long pos = -1, neg = -1;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == a) continue;
        if (batch[j].id == batch[a].id) {
          if (pos < 0 || dist(j) > dist(pos)) pos = static_cast<long>(j);
        } else if (neg < 0 || dist(j) < dist(neg)) {
          neg = static_cast<long>(j);
        }
      }
      if (pos < 0 || neg < 0) continue;
      ASSERT_LT(k, t.size());
      EXPECT_EQ(t[k].anchor_index, a);
      EXPECT_EQ(t[k].positive_index, static_cast<std::size_t>(pos));
      EXPECT_EQ(t[k].negative_index, static_cast<std::size_t>(neg));
      ++k;
    }
    EXPECT_EQ(k, t.size());
  }
}

TEST(Embeddings, ProviderDimensionsAndDeterminism) {
  GrayFrame frame(64, 32, 90);
  render_box(frame, RotatedRect{30, 15, 40, 12, 0.0}, 77);
  const Detection d{Quad::axis_aligned(10, 9, 50, 21), 0.9, {}, std::string("HELLO"), -1};

  EmbeddingProvider p;
  EXPECT_EQ(p.dimension(), 512u);
  const Embedding e = p.embed(d, &frame);
  ASSERT_EQ(e.size(), 512u);
  EXPECT_EQ(e, p.embed(d, &frame));
  EXPECT_THROW(p.embed(d, nullptr), ContractError);

  p.kind = EmbeddingKind::kTranscription;
  EXPECT_EQ(p.embed(d, nullptr), transcription_descriptor("HELLO"));
  p.kind = EmbeddingKind::kPatch;
  EXPECT_EQ(p.embed(d, &frame).size(), 256u);

  p.kind = EmbeddingKind::kSynthetic;
  p.seed = 5;
  const Embedding s = p.embed(d, nullptr);
  EXPECT_EQ(s.size(), 512u);
  EXPECT_NEAR(norm(s), 1.0, 1e-12);
  EXPECT_EQ(s, p.embed(d, nullptr));

  p.kind = EmbeddingKind::kFromFile;
  EXPECT_THROW(p.embed(d, nullptr), ValidationError);
  Detection with = d;
  with.embedding = Embedding{1.0, 2.0};
  EXPECT_EQ(p.embed(with, nullptr), (Embedding{1.0, 2.0}));
}

}  // namespace
}  // namespace vtt
