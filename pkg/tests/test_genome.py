import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dotsnet.genome import (
    GENOME_BITS,
    GENOME_BYTES,
    STEP,
    USED_BITS,
    Genome,
    crossover,
    crossover_at,
    decode,
    encode,
    mutate,
    quant_index,
    quant_value,
)
from dotsnet.network import Network, build_level1_network, forward
from dotsnet.rng import RngStream


def _zeroed_random(rng):
    bits = rng.gen.integers(0, 2, GENOME_BITS, dtype=np.uint8)
    bits[USED_BITS:] = 0
    return Genome.from_bits(bits)


def test_layout_constants():
    assert GENOME_BYTES == 582 and GENOME_BITS == 4656 and USED_BITS == 4650


def test_quant_value_endpoints():
    assert quant_value(0) == -64.0
    assert quant_value(1023) == 64.0
    assert quant_value(512) == pytest.approx(64 / 1023, abs=1e-15)
    vals = quant_value(np.arange(1024))
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(ValueError):
        quant_value(1024)
    with pytest.raises(ValueError):
        quant_value(-1)


def test_zero_maps_to_nearest_index():
    # |value(511)| == |value(512)| == 64/1023; the tie goes to the even index
    assert abs(quant_value(511)) == pytest.approx(abs(quant_value(512)))
    assert quant_index(0.0) == 512


def test_wrong_length_rejected():
    with pytest.raises(ValueError):
        Genome(bytes(581))
    with pytest.raises(ValueError):
        Genome(bytes(583))


def test_decode_extremes():
    assert np.all(decode(Genome(bytes(582))).to_vector() == -64.0)
    assert np.all(decode(Genome(b"\xff" * 582)).to_vector() == 64.0)
    bits = np.zeros(GENOME_BITS, dtype=np.uint8)
    bits[:10] = 1
    net = decode(Genome.from_bits(bits))
    assert net.hidden_w[0, 0] == 64.0
    v = net.to_vector()
    assert np.all(v[1:] == -64.0)


def test_field_order():
    # the 26th field (bits 250..259) is hidden unit 1's weight from edge 0
    bits = np.zeros(GENOME_BITS, dtype=np.uint8)
    bits[250:260] = 1
    net = decode(Genome.from_bits(bits))
    assert net.hidden_w[1, 0] == 64.0
    # first output field starts at bit 2250
    bits = np.zeros(GENOME_BITS, dtype=np.uint8)
    bits[2259] = 1  # least significant bit of k
    net = decode(Genome.from_bits(bits))
    assert net.output_w[0, 0] == quant_value(1)


def test_unused_bits_are_inert():
    g = _zeroed_random(RngStream(1))
    bits = g.bits()
    bits[USED_BITS:] = 1
    assert np.array_equal(decode(Genome.from_bits(bits)).to_vector(), decode(g).to_vector())


def test_encode_all_low():
    net = Network.from_vector(np.full(465, -64.0))
    assert encode(net).data == bytes(582)


def test_roundtrip_on_random_genomes():
    rng = RngStream(2)
    for _ in range(1000):
        g = _zeroed_random(rng)
        assert encode(decode(g)) == g


def test_quantization_error_bound():
    net = Network.random(RngStream(3), 64.0)
    err = np.abs(decode(encode(net)).to_vector() - net.to_vector())
    assert err.max() <= STEP / 2 + 1e-12
    assert STEP / 2 == pytest.approx(64 / 1023)


def test_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        encode(Network.from_vector(np.full(465, 64.5)))


def test_level1_network_survives_encoding():
    net = build_level1_network()
    back = decode(encode(net))
    assert np.abs(back.to_vector() - net.to_vector()).max() <= 64 / 1023 + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.binary(min_size=582, max_size=582))
def test_decode_closure(data):
    net = decode(Genome(data))
    v = net.to_vector()
    assert np.all(np.isfinite(v)) and v.min() >= -64 and v.max() <= 64


def test_hex_serialization():
    g = Genome.random(RngStream(4))
    text = g.hex()
    assert len(text) == 1164 and text == text.lower()
    assert Genome.from_hex(text) == g


def test_crossover_identical_parents(rng):
    g = Genome.random(rng)
    assert crossover(g, g, rng) == (g, g)


def test_crossover_conserves_xor():
    rng = RngStream(5)
    for _ in range(1000):
        a, b = Genome.random(rng), Genome.random(rng)
        c, d = crossover(a, b, rng)
        assert np.array_equal(c.bits() ^ d.bits(), a.bits() ^ b.bits())


def test_crossover_cut_semantics():
    a, b = Genome(bytes(582)), Genome(b"\xff" * 582)
    c, d = crossover_at(a, b, 1)
    assert c.bits()[0] == 0 and c.bits()[1:].all()
    assert d.bits()[0] == 1 and not d.bits()[1:].any()
    c, d = crossover_at(a, b, GENOME_BITS - 1)
    assert c.bits().sum() == 1 and c.bits()[-1] == 1
    with pytest.raises(ValueError):
        crossover_at(a, b, GENOME_BITS)
    with pytest.raises(ValueError):
        crossover_at(a, b, 0)


def test_crossover_cut_range():
    rng = RngStream(6)
    a, b = Genome(bytes(582)), Genome(b"\xff" * 582)
    cuts = set()
    for _ in range(3000):
        c, _ = crossover(a, b, rng)
        cuts.add(int(np.argmax(c.bits())))
    assert min(cuts) >= 1 and max(cuts) <= GENOME_BITS - 1


def test_mutation_extremes(rng):
    g = Genome.random(rng)
    assert mutate(g, 0.0, rng) == g
    assert np.array_equal(mutate(g, 1.0, rng).bits(), 1 - g.bits())
    with pytest.raises(ValueError):
        mutate(g, 1.5, rng)


def test_mutation_rate():
    rng = RngStream(7)
    g = Genome(bytes(582))
    flips = [mutate(g, 0.005, rng).bits().sum() for _ in range(1000)]
    # binomial mean 23.28; 3 sigma of the mean of 1000 trials is 0.457
    assert abs(np.mean(flips) - 23.28) <= 0.457
