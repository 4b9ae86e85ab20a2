import math

import numpy as np
import pytest
from scipy import stats

from noma_lab.channel import (UNIFORMS_PER_REALIZATION, SeededStream, sample_block,
                              sample_realization, uniforms)

from conftest import fig2_params

_MASK = (1 << 64) - 1


def philox4x64(counter, key, rounds=10):
    """Reference Philox4x64-10 block function on Python integers."""
    ctr, key = list(counter), list(key)
    for _ in range(rounds):
        p0 = 0xD2E7470EE14C6C93 * ctr[0]
        p1 = 0xCA5A826395121157 * ctr[2]
        ctr = [(p1 >> 64) ^ ctr[1] ^ key[0], p1 & _MASK, (p0 >> 64) ^ ctr[3] ^ key[1], p0 & _MASK]
        key = [(key[0] + 0x9E3779B97F4A7C15) & _MASK, (key[1] + 0xBB67AE8584CAA73B) & _MASK]
    return ctr


def oracle_uniform(seed, stream_id, k):
    word = philox4x64([k // 4 + 1, 0, 0, 0], [seed, stream_id])[k % 4]
    return 1.0 - (word >> 11) * 2.0**-53


# Frozen vectors: first raw words of (seed=2019, stream_id=0) and the first
# realization of that stream at the Fig. 2 channel powers.
FROZEN_RAW = [0x0144F6B51D541F27, 0x07A110FD861618C8, 0xBC071CCD3C8AFC58, 0x0781E3035ABA0F5F]


class TestUniforms:
    def test_frozen_words(self):
        for k, w in enumerate(FROZEN_RAW):
            assert philox4x64([1, 0, 0, 0], [2019, 0])[k] == w
            assert uniforms(SeededStream(2019), k, 1)[0] == 1.0 - (w >> 11) * 2.0**-53

    @pytest.mark.parametrize("seed,stream_id", [(0, 0), (2019, 0), (2019, 7), (_MASK, _MASK),
                                                (123456789, 1 << 40)])
    def test_matches_reference(self, seed, stream_id):
        got = uniforms(SeededStream(seed, stream_id), 0, 23)
        assert list(got) == [oracle_uniform(seed, stream_id, k) for k in range(23)]

    @pytest.mark.parametrize("start", [0, 1, 3, 4, 5, 17, 4095 * 5])
    def test_random_access(self, start):
        s = SeededStream(42, 3)
        full = uniforms(s, 0, start + 9)
        assert np.array_equal(uniforms(s, start, 9), full[start:])

    def test_range(self):
        u = uniforms(SeededStream(1), 0, 200_000)
        assert np.all(u > 0.0) and np.all(u <= 1.0)

    def test_streams_differ(self):
        assert not np.array_equal(uniforms(SeededStream(1, 0), 0, 8), uniforms(SeededStream(1, 1), 0, 8))

    @pytest.mark.parametrize("seed", [-1, 1 << 64, 1.5])
    def test_rejects_seed(self, seed):
        with pytest.raises(ValueError):
            SeededStream(seed)

    def test_rejects_negative_range(self):
        with pytest.raises(ValueError):
            uniforms(SeededStream(0), -1, 2)


class TestSampling:
    def test_realization_field_order(self):
        p = fig2_params(10)
        ch = sample_realization(p, SeededStream(2019), index=2)
        alphas = [p.alpha_su1, p.alpha_su2, p.alpha_su3, p.alpha_ru2, p.alpha_ru3]
        fields = [ch.beta_su1, ch.beta_su2, ch.beta_su3, ch.beta_ru2, ch.beta_ru3]
        for j, (a, b) in enumerate(zip(alphas, fields)):
            u = oracle_uniform(2019, 0, UNIFORMS_PER_REALIZATION * 2 + j)
            assert b == pytest.approx(-a * math.log(u), rel=1e-15, abs=0.0)

    def test_block_matches_single_draws(self):
        p = fig2_params(10)
        blk = sample_block(p, SeededStream(5, 2), 10, start=7)
        for i in range(10):
            ch = sample_realization(p, SeededStream(5, 2), index=7 + i)
            assert ch.beta_ru3 == blk.beta_ru3[i] and ch.beta_su1 == blk.beta_su1[i]

    def test_deterministic(self):
        p = fig2_params(10)
        a = sample_block(p, SeededStream(9), 1000)
        b = sample_block(p, SeededStream(9), 1000)
        assert np.array_equal(a.beta_su2, b.beta_su2)

    def test_mean_and_ccdf(self):
        p = fig2_params(10)
        blk = sample_block(p, SeededStream(2019), 1_000_000)
        assert abs(blk.beta_su1.mean() - 5.0) <= 4 * 5.0 / 1e3
        for field, alpha in [("beta_su1", 5.0), ("beta_ru3", 10.0), ("beta_su2", 1.0)]:
            frac = np.mean(getattr(blk, field) > alpha)
            assert frac == pytest.approx(math.exp(-1), abs=0.002)
        corr = np.corrcoef(blk.beta_su2, blk.beta_ru2)[0, 1]
        assert abs(corr) <= 0.004

    def test_ks(self):
        p = fig2_params(10)
        blk = sample_block(p, SeededStream(77), 100_000)
        for field, alpha in [("beta_su1", 5.0), ("beta_su2", 1.0), ("beta_su3", 1.0),
                             ("beta_ru2", 2.0), ("beta_ru3", 10.0)]:
            res = stats.kstest(getattr(blk, field), stats.expon(scale=alpha).cdf)
            assert res.pvalue > 0.01


class TestFrozenVectors:
    """Values quoted in the README; any change here breaks reproducibility."""

    def test_uniforms(self):
        got = uniforms(SeededStream(2019, 0), 0, 5)
        assert list(got) == [0.9950414474321146, 0.9701985722585175, 0.26551647176116344,
                             0.9706743351755661, 0.8723241546691819]
        assert list(uniforms(SeededStream(2019, 1), 0, 2)) == [0.5028163217724624, 0.9461061758805973]

    def test_first_realization(self):
        ch = sample_realization(fig2_params(20), SeededStream(2019, 0), 0)
        # uniforms are exact integer arithmetic; log may differ by an ulp across libms
        assert (ch.beta_su1, ch.beta_su2, ch.beta_su3, ch.beta_ru2, ch.beta_ru3) == pytest.approx((
            0.024854434902256597, 0.030254514767117636, 1.3260783996928887,
            0.059528516230647914, 1.3659418714429719), rel=1e-15)
