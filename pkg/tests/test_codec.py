"""Codebook, run configuration, and encode-pipeline tests."""

import numpy as np
import pytest

from qtelarray.codec import (
    Codebook,
    ConfigError,
    EncodeError,
    MemoryLayout,
    ResourceLedger,
    RunConfig,
    encode_bin,
    encode_run_full,
    encode_single_photon,
    new_run,
    parallel_frequency_compress,
)
from qtelarray.qcore import SupportState


def basis_mask(labels, bits_by_label):
    """Bitmask of a basis string given as {label: bit}."""
    state = SupportState.basis(labels, bits_by_label)
    return next(iter(state.amps))


def assert_support_equal(sup, expected, tol=1e-12):
    assert sup.labels == expected.labels
    assert set(sup.amps) == set(expected.amps)
    for mask, amp in expected.amps.items():
        assert sup.amps[mask] == pytest.approx(amp, abs=tol)


class TestCodebook:
    def test_worked_example_codewords(self):
        book = Codebook(M=5, R=2)
        assert (book.t_bits, book.f_bits, book.length) == (3, 1, 4)
        assert book.codeword(5, 1) == "1010"
        assert book.codeword(5, 2) == "1011"
        assert book.codeword(1, 1) == "0010"
        assert book.vacuum == "0000"

    def test_injective_and_decodable(self):
        book = Codebook(M=16, R=4)
        assert (book.t_bits, book.f_bits) == (5, 2)
        seen = {}
        for m in range(1, 17):
            for r in range(1, 5):
                word = book.codeword(m, r)
                assert word not in seen
                seen[word] = (m, r)
                assert book.decode(word) == (m, r)
        assert len(seen) == 64
        assert book.decode(book.vacuum) == (0, None)

    def test_single_band_drops_frequency_field(self):
        book = Codebook(M=5, R=1)
        assert book.f_bits == 0
        assert book.codeword(3, 1) == "011"
        assert book.decode("011") == (3, 1)

    def test_range_and_format_checks(self):
        book = Codebook(M=5, R=2)
        with pytest.raises(ConfigError):
            book.codeword(0, 1)
        with pytest.raises(ConfigError):
            book.codeword(6, 1)
        with pytest.raises(ConfigError):
            book.codeword(5, 3)
        with pytest.raises(ConfigError):
            book.decode("101")
        with pytest.raises(ConfigError):
            book.decode("1x01")
        # m = 6 field value lies outside the codebook
        with pytest.raises(ConfigError):
            book.decode("1100")


class TestRunConfig:
    def test_defaults_and_validation(self):
        cfg = RunConfig()
        assert (cfg.M, cfg.R, cfg.N, cfg.layout) == (5, 2, 2, "sequential")
        RunConfig(eps=0.0)  # vacuum-only runs are allowed
        for bad in (
            dict(M=0),
            dict(R=0),
            dict(N=1),
            dict(eps=1.0),
            dict(eps=-0.1),
            dict(layout="ring"),
        ):
            with pytest.raises(ConfigError):
                RunConfig(**bad)

    def test_text_parsing(self):
        cfg = RunConfig.from_text(
            "# run\nM = 16\nR=4\nN = 2\neps = 0.01\nlayout = parallel\nseed = 7\n"
        )
        assert cfg == RunConfig(M=16, R=4, N=2, eps=0.01, layout="parallel", seed=7)

    @pytest.mark.parametrize(
        "text",
        [
            "M = 5\nQ = 3\n",            # unknown key
            "M = 5\nM = 6\n",            # duplicate
            "M five\n",                  # no equals sign
            "eps = small\n",             # uncoercible value
        ],
    )
    def test_bad_text_rejected(self, text):
        with pytest.raises(ConfigError):
            RunConfig.from_text(text)


class TestResourceLedger:
    def test_counters(self):
        led = ResourceLedger()
        led.add("bell_pairs", 3)
        led.add("bell_pairs")
        before = led.copy()
        led.add("w_states", 2)
        assert led.bell_pairs == 4
        assert led.delta(before) == {
            "memory_qubits_per_site": 0,
            "bell_pairs": 0,
            "ghz_states": 0,
            "w_states": 2,
            "ancilla_qubits": 0,
        }
        with pytest.raises(ValueError):
            led.add("w_states", -1)
        with pytest.raises(KeyError):
            led.add("qubits", 1)


class TestMemoryLayout:
    def test_sequential_footprint(self):
        layout = MemoryLayout(RunConfig(M=5, R=2, layout="sequential"))
        assert layout.qubits_per_site == 4
        labels, bits = layout.write_pattern(0, 5, 2)
        assert labels == ("s0_c0", "s0_c1", "s0_c2", "s0_c3")
        assert bits == (1, 0, 1, 1)

    def test_parallel_footprint(self):
        layout = MemoryLayout(RunConfig(M=16, R=4, layout="parallel"))
        # 4 time registers of 5, 4 flags, 3 compressed
        assert layout.qubits_per_site == 27
        assert len(layout.site_labels(1)) == 27
        labels, bits = layout.write_pattern(1, 3, 2)
        assert labels == ("s1_r2_t0", "s1_r2_t1", "s1_r2_t2", "s1_r2_t3",
                          "s1_r2_t4", "s1_f2")
        assert bits == (0, 0, 0, 1, 1, 1)

    @pytest.mark.parametrize(
        "R, r, code",
        [(2, 1, "01"), (2, 2, "10"), (3, 3, "11"), (4, 4, "100"), (7, 5, "101")],
    )
    def test_band_codes(self, R, r, code):
        layout = MemoryLayout(RunConfig(M=2, R=R, layout="parallel"))
        assert layout.band_code(r) == code

    def test_new_run_ledger(self):
        run = new_run(RunConfig(M=5, R=2, N=3))
        assert run.ledger.memory_qubits_per_site == 4
        assert run.ledger.ancilla_qubits == 6
        assert run.weights_total() == pytest.approx(1.0)


class TestEncodeBin:
    def test_single_photon_writes_codeword_superposition(self):
        cfg = RunConfig(M=5, R=2, N=2, layout="sequential", seed=3)
        run = encode_single_photon(cfg, m=5, r=2)
        assert len(run.components) == 1
        _, sup, meta = run.components[0]
        assert meta == {"m": 5, "r": 2}
        labels = run.layout.all_labels()
        word = run.book.codeword(5, 2)
        m0 = basis_mask(labels, {f"s0_c{p}": int(b) for p, b in enumerate(word)})
        m1 = basis_mask(labels, {f"s1_c{p}": int(b) for p, b in enumerate(word)})
        expected = SupportState(labels, {m0: 2 ** -0.5, m1: 2 ** -0.5})
        assert_support_equal(sup, expected)

    def test_measurement_outcomes_leave_no_trace(self):
        cfg = RunConfig(M=5, R=2, N=3, layout="sequential")
        amps = np.array([0.6, -0.64j, 0.48])
        states = []
        for seed in range(4):
            run = encode_single_photon(cfg, 4, 1, amps=amps,
                                       rng=np.random.default_rng(seed))
            states.append(run.components[0][1])
        for sup in states[1:]:
            assert_support_equal(sup, states[0])

    @pytest.mark.parametrize("layout", ["sequential", "parallel"])
    def test_verify_mode_checks_every_branch(self, layout):
        cfg = RunConfig(M=4, R=2, N=3, layout=layout)
        rng = np.random.default_rng(11)
        amps = rng.normal(size=3) + 1j * rng.normal(size=3)
        run = encode_single_photon(cfg, 2, 2, amps=amps, verify=True)
        assert run.components[0][1].norm2() == pytest.approx(1.0)

    def test_superposed_photon_keeps_coherence(self):
        # one time bin, one band: each site holds a single memory qubit
        cfg = RunConfig(M=1, R=1, N=2, layout="sequential")
        phi = 0.7
        amps = np.array([1.0, np.exp(1j * phi)]) / np.sqrt(2)
        run = encode_single_photon(cfg, 1, 1, amps=amps)
        rho = run.dense_state().density_matrix()
        # registry order (s0_c0, s1_c0): |10> -> index 2, |01> -> index 1
        assert rho[2, 1] == pytest.approx(np.exp(-1j * phi) / 2, abs=1e-12)
        assert rho[2, 2] == pytest.approx(0.5, abs=1e-12)
        assert rho[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_vacuum_bin_is_identity(self):
        run = new_run(RunConfig(M=3, R=1, N=2))
        assert encode_bin(run, 2, None) is run

    def test_second_photon_rejected(self):
        cfg = RunConfig(M=3, R=1, N=2)
        run = encode_single_photon(cfg, 1, 1)
        with pytest.raises(EncodeError):
            encode_bin(run, 2, (1, np.array([1.0, 0.0])))


class TestEncodeRunFull:
    def test_two_band_mixture_matches_hand_built_density(self):
        eps = 0.05
        cfg = RunConfig(M=3, R=2, N=2, eps=eps, layout="sequential", seed=1)
        run = encode_run_full(cfg, band_g=[1.0, 0.0])
        # vacuum + 3 bins x (rank-1 band + rank-2 band)
        assert len(run.components) == 1 + 3 * (1 + 2)
        assert run.weights_total() == pytest.approx(1.0, abs=1e-12)
        rho = run.dense_state().density_matrix()
        labels = run.layout.all_labels()
        vac = basis_mask(labels, {})

        def dense_index(mask, n=len(labels)):
            return int(
                sum(1 << (n - 1 - q) for q in range(n) if mask & (1 << q))
            )

        assert rho[dense_index(vac), dense_index(vac)] == pytest.approx(
            (1 - eps) ** 3, abs=1e-12
        )
        word = run.book.codeword(1, 1)
        a = dense_index(
            basis_mask(labels, {f"s0_c{p}": int(b) for p, b in enumerate(word)})
        )
        b = dense_index(
            basis_mask(labels, {f"s1_c{p}": int(b) for p, b in enumerate(word)})
        )
        # band 1 carries g = 1: coherence eps/2 * 1/2 between the two sites
        assert rho[a, b] == pytest.approx(eps / 4, abs=1e-12)
        assert rho[a, a] == pytest.approx(eps / 4, abs=1e-12)
        word2 = run.book.codeword(1, 2)
        a2 = dense_index(
            basis_mask(labels, {f"s0_c{p}": int(b) for p, b in enumerate(word2)})
        )
        b2 = dense_index(
            basis_mask(labels, {f"s1_c{p}": int(b) for p, b in enumerate(word2)})
        )
        # band 2 carries g = 0: populations but no coherence
        assert rho[a2, b2] == pytest.approx(0.0, abs=1e-12)
        assert rho[a2, a2] == pytest.approx(eps / 4, abs=1e-12)

    def test_bin_weights_follow_geometric_law(self):
        eps = 0.2
        cfg = RunConfig(M=4, R=2, N=2, eps=eps, seed=5)
        run = encode_run_full(cfg, band_g=0.3)
        by_bin = {}
        for w, _, meta in run.components:
            by_bin[meta["m"]] = by_bin.get(meta["m"], 0.0) + w
        assert by_bin[0] == pytest.approx((1 - eps) ** 4, abs=1e-12)
        for m in range(1, 5):
            assert by_bin[m] == pytest.approx(
                eps * (1 - eps) ** (m - 1), abs=1e-12
            )

    def test_eps_zero_is_pure_vacuum(self):
        run = encode_run_full(RunConfig(M=4, R=2, N=2, eps=0.0))
        assert len(run.components) == 1
        assert run.components[0][2] == {"m": 0}

    def test_full_scale_parallel_run(self):
        cfg = RunConfig(M=16, R=4, N=2, eps=0.01, layout="parallel", seed=9)
        run = encode_run_full(cfg, band_g=0.3)
        assert len(run.components) == 1 + 16 * 4 * 2
        assert run.weights_total() == pytest.approx(1.0, abs=1e-12)
        assert run.ledger.memory_qubits_per_site == 27

    def test_bad_band_g_rejected(self):
        cfg = RunConfig(M=2, R=2, N=2, eps=0.1)
        with pytest.raises(ConfigError):
            encode_run_full(cfg, band_g=[0.3])  # one band short
        with pytest.raises(ConfigError):
            encode_run_full(cfg, band_g=[np.ones((3, 3)), 0.1])
        skew = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ConfigError):
            encode_run_full(cfg, band_g=[skew, 0.1])


class TestParallelCompress:
    def test_compress_folds_flags_into_band_code(self):
        cfg = RunConfig(M=2, R=2, N=2, layout="parallel", seed=2)
        run = encode_single_photon(cfg, m=2, r=2, verify=True)
        packed = parallel_frequency_compress(run, verify=True)
        assert packed.compressed
        _, sup, _ = packed.components[0]
        # flags are measured away: 2 time registers of 2 + 2 compressed per site
        assert sup.n == 12
        bits0 = {"s0_r2_t0": 1, "s0_r2_t1": 0, "s0_k0": 1, "s0_k1": 0}
        bits1 = {"s1_r2_t0": 1, "s1_r2_t1": 0, "s1_k0": 1, "s1_k1": 0}
        expected = SupportState(
            sup.labels,
            {
                basis_mask(sup.labels, bits0): 2 ** -0.5,
                basis_mask(sup.labels, bits1): 2 ** -0.5,
            },
        )
        assert_support_equal(sup, expected)

    def test_compress_preserves_mixture_weights_and_states(self):
        cfg = RunConfig(M=2, R=2, N=2, eps=0.1, layout="parallel", seed=4)
        run = encode_run_full(cfg, band_g=[0.6, 0.2], verify=True)
        packed = parallel_frequency_compress(run, verify=True)
        assert [w for w, _, _ in packed.components] == [
            w for w, _, _ in run.components
        ]
        for (_, sup, meta), (_, orig, _) in zip(
            packed.components, run.components
        ):
            assert sup.norm2() == pytest.approx(1.0, abs=1e-12)
            if meta["m"] == 0:
                assert sup.amps == pytest.approx({0: 1.0})
            else:
                r = meta["r"]
                code = packed.layout.band_code(r)
                for i in (0, 1):
                    comp = packed.layout.comp_register(i)
                    for mask in sup.amps:
                        has_photon = any(
                            mask & (1 << sup.bit(t))
                            for t in packed.layout.time_register(i, r)
                        )
                        want = code if has_photon else "0" * len(code)
                        got = "".join(
                            "1" if mask & (1 << sup.bit(c)) else "0"
                            for c in comp
                        )
                        assert got == want

    def test_compress_requires_parallel_layout(self):
        run = new_run(RunConfig(M=2, R=2, N=2, layout="sequential"))
        with pytest.raises(EncodeError):
            parallel_frequency_compress(run)

    def test_double_compress_rejected(self):
        run = new_run(RunConfig(M=2, R=2, N=2, layout="parallel"))
        packed = parallel_frequency_compress(run)
        with pytest.raises(EncodeError):
            parallel_frequency_compress(packed)
