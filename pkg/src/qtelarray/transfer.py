"""Photon-to-memory state transfer through ancilla interference.

At every site the incoming mode (vacuum or the shared photon) interferes
with a local ancilla field on a balanced splitter (or a (P+1)-port Fourier
interferometer) and all output ports are photon counted. An outcome o at a
site has amplitude c0(o) if the site held vacuum and c1(o) if it held the
photon, so a joint record leaves the memory register in

    sum_s c_s [c1(o_s) / c0(o_s)] |site s>

up to a global factor. Branches where every ratio is finite, nonzero, and
of equal modulus are repaired exactly by local phase corrections
phi_s = -arg(c1/c0) (for a real coherent ancilla this is a Z precisely when
the second port saw more photons than the first); that is the heralded
acceptance rule. Keeping every branch instead gives the deterministic
fidelity, which for coherent ancillas of amplitude alpha aggregates in
closed form over count-difference classes distributed as the difference of
two Poisson(alpha^2/2) variables.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import skellam

from .qcore import (
    QuantumState,
    beam_splitter,
    build_state,
    enumerate_measure,
    fock,
    linear_optics_matrix,
    lossy_detector,
    pauli_z,
    qft_matrix,
    qubit,
    ModeRegistry,
)
from .util import make_rng

BRANCH_PRUNE = 1e-12
RATIO_TOL = 1e-9


class TransferError(RuntimeError):
    """Inconsistent transfer configuration or protocol state."""


@dataclass(frozen=True)
class Branch:
    """One detection record: probability, corrected fidelity, herald flag."""

    record: tuple
    probability: float
    fidelity: float
    accepted: bool


@dataclass
class TransferOutcome:
    """Aggregated result of a transfer protocol run."""

    kind: str
    fidelity: float
    probability: float
    branches: list = field(default_factory=list)
    mass: float = 1.0
    extra: dict = field(default_factory=dict)


def _norm_amps(amps) -> np.ndarray:
    amps = np.asarray(amps, dtype=complex)
    if amps.ndim != 1 or amps.size < 2:
        raise TransferError("need which-site amplitudes for at least 2 sites")
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise TransferError("which-site amplitudes cannot all vanish")
    return amps / norm


# ---- per-site amplitude tables ---------------------------------------------------


@dataclass(frozen=True)
class AmplitudeTable:
    """Outcome amplitudes of one site for vacuum (c0) and photon (c1) input."""

    c0: dict
    c1: dict
    kind: str

    def outcomes(self):
        return sorted(set(self.c0) | set(self.c1))


def _coherent_raw(alpha: float, i: int, j: int) -> float:
    """e^{-a^2/2} (a/sqrt2)^i (-a/sqrt2)^j / sqrt(i! j!) for real alpha."""
    log_mag = (
        -alpha ** 2 / 2.0
        + (i + j) * (np.log(alpha) - 0.5 * np.log(2.0))
        - 0.5 * gammaln(i + 1)
        - 0.5 * gammaln(j + 1)
    )
    return (-1.0) ** j * float(np.exp(log_mag))


def coherent_amplitude_table(alpha: float, cutoff: int) -> AmplitudeTable:
    """Truncated splitter amplitudes for a real coherent ancilla.

    The vacuum table lives on total counts i + j <= cutoff (the photon
    budget of the truncated ancilla); the photon table gains one photon,
    i, j <= cutoff with i + j <= cutoff + 1. Each table is renormalized to
    unit mass, matching a cutoff Fock simulation that conditions away its
    truncation leakage.
    """
    if alpha < 0:
        raise TransferError("ancilla amplitude must be >= 0")
    if cutoff < 1:
        raise TransferError("cutoff must be >= 1")
    if alpha == 0.0:
        return AmplitudeTable(
            c0={(0, 0): 1.0},
            c1={(1, 0): 2 ** -0.5, (0, 1): 2 ** -0.5},
            kind="coherent(0)",
        )
    c0 = {}
    for i in range(cutoff + 1):
        for j in range(cutoff + 1 - i):
            c0[(i, j)] = _coherent_raw(alpha, i, j)
    c1 = {}
    for i in range(cutoff + 1):
        for j in range(min(cutoff, cutoff + 1 - i) + 1):
            d = i - j
            if d == 0:
                continue
            c1[(i, j)] = _coherent_raw(alpha, i, j) * d / alpha
    for table in (c0, c1):
        mass = np.sqrt(sum(abs(a) ** 2 for a in table.values()))
        for key in table:
            table[key] /= mass
    return AmplitudeTable(c0=c0, c1=c1, kind=f"coherent({alpha})")


def multiport_amplitude_table(ports: int) -> AmplitudeTable:
    """Exact amplitudes for P single-photon plus-state ancillas.

    The site mixes its input mode with P ancilla modes, each prepared in
    (|0> + |1>)/sqrt(2), on the (P+1)-port Fourier interferometer; outcomes
    are count tuples over the P + 1 detectors. P = 1 is the balanced
    splitter with a single plus ancilla.
    """
    if ports < 1:
        raise TransferError("need at least one ancilla port")
    k = ports + 1
    S = qft_matrix(k)
    in_cutoffs = (1,) * k
    out_cutoffs = (k,) * k
    matrix, leak = linear_optics_matrix(S, in_cutoffs, out_cutoffs)
    if leak.max() > 1e-12:
        raise TransferError("multiport enumeration unexpectedly truncated")
    plus = np.array([2 ** -0.5, 2 ** -0.5])
    vac_in = np.array([1.0, 0.0])
    pho_in = np.array([0.0, 1.0])
    tables = []
    for head in (vac_in, pho_in):
        vec = head
        for _ in range(ports):
            vec = np.kron(vec, plus)
        out = matrix @ vec.astype(complex)
        table = {}
        dims = (k + 1,) * k
        for flat in np.nonzero(np.abs(out) > 1e-14)[0]:
            table[tuple(int(x) for x in np.unravel_index(flat, dims))] = complex(
                out[flat]
            )
        tables.append(table)
    return AmplitudeTable(c0=tables[0], c1=tables[1], kind=f"multiport({ports})")


def plus_amplitude_table() -> AmplitudeTable:
    """Balanced splitter with one plus-state ancilla (two detectors)."""
    return multiport_amplitude_table(1)


# ---- joint branch enumeration ----------------------------------------------------


def transfer_branches(table: AmplitudeTable, amps, prune: float = BRANCH_PRUNE):
    """Enumerate joint detection records for one shared photon over sites.

    Every site uses the same ancilla table. Branch fidelities are taken
    after the local phase corrections; a branch is accepted (heralded)
    when all ratio moduli are finite, nonzero, and equal.
    """
    amps = _norm_amps(amps)
    n = len(amps)
    outs = table.outcomes()
    branches = []
    mass = 0.0
    for record in itertools.product(outs, repeat=n):
        c0s = np.array([table.c0.get(o, 0.0) for o in record], dtype=complex)
        c1s = np.array([table.c1.get(o, 0.0) for o in record], dtype=complex)
        site_amp = np.zeros(n, dtype=complex)
        for s in range(n):
            others = np.prod(np.delete(c0s, s)) if n > 1 else 1.0
            site_amp[s] = amps[s] * c1s[s] * others
        p = float(np.vdot(site_amp, site_amp).real)
        if p <= prune:
            mass += p
            continue
        mass += p
        phases = np.ones(n, dtype=complex)
        moduli = np.full(n, np.nan)
        for s in range(n):
            if c0s[s] != 0 and c1s[s] != 0:
                ratio = c1s[s] / c0s[s]
                phases[s] = np.exp(-1j * np.angle(ratio))
                moduli[s] = abs(ratio)
        overlap = np.sum(np.conj(amps) * site_amp * phases)
        fid = float(abs(overlap) ** 2 / p)
        finite = np.isfinite(moduli) & (moduli > 0)
        accepted = bool(
            finite.all() and moduli.max() - moduli.min() <= RATIO_TOL * moduli.max()
        )
        branches.append(Branch(record, p, fid, accepted))
    return branches, mass


def deterministic_transfer(alpha=None, amps=(2 ** -0.5, 2 ** -0.5),
                           table: AmplitudeTable | None = None,
                           cutoff: int | None = None) -> TransferOutcome:
    """Keep every branch; the fidelity averages the corrected branches.

    Pass either a coherent amplitude ``alpha`` (with an optional ``cutoff``
    for the enumeration route; omit it for the closed-form route) or an
    explicit table.
    """
    amps = _norm_amps(amps)
    if table is None:
        if alpha is None:
            raise TransferError("need alpha or an amplitude table")
        if cutoff is None:
            f = deterministic_fidelity_closed(alpha, amps)
            return TransferOutcome(
                kind="deterministic", fidelity=f, probability=1.0,
                extra={"route": "closed_form", "alpha": alpha},
            )
        table = coherent_amplitude_table(alpha, cutoff)
    branches, mass = transfer_branches(table, amps)
    f = sum(b.probability * b.fidelity for b in branches) / mass
    return TransferOutcome(
        kind="deterministic", fidelity=f, probability=1.0,
        branches=branches, mass=mass,
        extra={"route": "enumerate", "table": table.kind},
    )


def heralded_transfer(alpha=None, amps=(2 ** -0.5, 2 ** -0.5),
                      table: AmplitudeTable | None = None,
                      cutoff: int | None = None) -> TransferOutcome:
    """Accept only equal-ratio records; accepted branches have unit fidelity.

    Without a table or cutoff the coherent acceptance rate comes from the
    count-difference classes in closed form.
    """
    amps = _norm_amps(amps)
    if table is None:
        if alpha is None:
            raise TransferError("need alpha or an amplitude table")
        if cutoff is None:
            p = heralded_rate_closed(alpha)
            return TransferOutcome(
                kind="heralded", fidelity=1.0 if p > 0 else 0.0, probability=p,
                extra={"route": "closed_form", "alpha": alpha},
            )
        table = coherent_amplitude_table(alpha, cutoff)
    branches, mass = transfer_branches(table, amps)
    kept = [b for b in branches if b.accepted]
    p = sum(b.probability for b in kept)
    f = (
        sum(b.probability * b.fidelity for b in kept) / p if p > 0 else 0.0
    )
    return TransferOutcome(
        kind="heralded", fidelity=f, probability=p,
        branches=branches, mass=mass,
        extra={"route": "enumerate", "table": table.kind},
    )


# ---- closed forms over count-difference classes -----------------------------------


def _skellam_support(alpha: float):
    """Count differences carrying all but < 1e-13 of the Skellam mass."""
    width = int(np.ceil(alpha ** 2 + 12.0 * alpha + 30.0))
    d = np.arange(-width, width + 1)
    p0 = skellam.pmf(d, alpha ** 2 / 2.0, alpha ** 2 / 2.0)
    if abs(p0.sum() - 1.0) > 1e-13:
        raise TransferError("count-difference support too narrow")
    return d, p0


def deterministic_fidelity_closed(alpha: float, amps=(2 ** -0.5, 2 ** -0.5)) -> float:
    """Deterministic two-site fidelity for a real coherent ancilla.

    Averages the corrected branch fidelity over the two sites' independent
    count-difference classes d ~ Skellam(alpha^2/2, alpha^2/2):

        f = sum_{dA,dB} P(dA) P(dB) (wA |dA| + wB |dB|)^2 / alpha^2

    with w the site weights |c_s|^2. The photon reaches the memory in every
    branch; only the superposition phase is at stake.
    """
    amps = _norm_amps(amps)
    if len(amps) != 2:
        raise TransferError("the closed form covers two sites")
    wa, wb = float(abs(amps[0]) ** 2), float(abs(amps[1]) ** 2)
    if alpha == 0.0:
        return wa ** 2 + wb ** 2
    d, p0 = _skellam_support(alpha)
    absd = np.abs(d)
    num = (wa * absd[:, None] + wb * absd[None, :]) ** 2
    return float((np.outer(p0, p0) * num).sum() / alpha ** 2)


def heralded_rate_closed(alpha: float) -> float:
    """Acceptance rate of equal-magnitude count differences, both nonzero."""
    if alpha == 0.0:
        return 0.0
    d, p0 = _skellam_support(alpha)
    pos = d > 0
    return float(4.0 * (p0[pos] ** 2 * d[pos] ** 2).sum() / alpha ** 2)


def deterministic_fidelity_sweep(alphas, amps=(2 ** -0.5, 2 ** -0.5)) -> np.ndarray:
    return np.array([deterministic_fidelity_closed(a, amps) for a in alphas])


def heralded_rate_sweep(alphas) -> np.ndarray:
    return np.array([heralded_rate_closed(a) for a in alphas])


def find_heralded_optimum(lo: float = 0.0, hi: float = 2.0,
                          step: float = 0.005):
    """Grid search of the heralded acceptance rate: (best alpha, best rate)."""
    alphas = np.arange(lo, hi + step / 2, step)
    rates = heralded_rate_sweep(alphas)
    best = int(np.argmax(rates))
    return float(alphas[best]), float(rates[best])


# ---- single-site teleport with a memory-paired plus ancilla ------------------------


def _teleport_registry() -> ModeRegistry:
    return ModeRegistry([fock("a", 2), fock("b", 2), qubit("m")])


def _teleport_input(theta: float) -> QuantumState:
    """(|0>_a + e^{i theta} |1>_a)/sqrt2 with the memory-ancilla pair."""
    reg = _teleport_registry()
    z = np.exp(1j * theta)
    return build_state(
        reg,
        {
            "0,1,0": 0.5,
            "0,0,1": 0.5,
            "1,1,0": 0.5 * z,
            "1,0,1": 0.5 * z,
        },
    )


def plus_ancilla_transfer(theta: float = 0.0) -> TransferOutcome:
    """Teleport one vacuum/photon qubit onto a memory via a plus ancilla.

    The memory starts entangled with the ancilla mode, the input interferes
    with the ancilla on a balanced splitter, and both ports are counted.
    Single counts are accepted, with a Z on the (0, 1) record; the accepted
    fidelity is exactly 1 at exactly half the total probability, for every
    input phase theta.
    """
    state = beam_splitter(_teleport_input(theta), "a", "b")
    target = np.array([1.0, np.exp(1j * theta)]) / np.sqrt(2.0)
    branches = []
    p_acc = 0.0
    f_acc = 0.0
    for counts, p, post in enumerate_measure(state, ("a", "b"), basis="number",
                                             remove=True):
        i, j = counts
        if (i, j) == (0, 1):
            post = pauli_z(post, "m")
        accepted = i + j == 1
        fid = float(post.fidelity(target))
        if accepted:
            p_acc += p
            f_acc += p * fid
        branches.append(Branch((i, j), float(p), fid, accepted))
    return TransferOutcome(
        kind="plus_teleport", fidelity=f_acc / p_acc, probability=p_acc,
        branches=branches, mass=float(sum(b.probability for b in branches)),
        extra={"theta": theta},
    )


def lossy_transfer(eta: float, theta: float = 0.0) -> TransferOutcome:
    """Plus-ancilla teleport with lossy detectors of amplitude transmission eta.

    Both output ports pass through a beam-splitter loss channel before
    counting; records with exactly one observed photon are accepted (Z on
    the (0, 1) record). Loss admits two-photon events disguised as single
    counts, trading acceptance for fidelity.
    """
    if not 0.0 <= eta <= 1.0:
        raise TransferError("transmission must lie in [0, 1]")
    state = beam_splitter(_teleport_input(theta), "a", "b")
    target = np.array([1.0, np.exp(1j * theta)]) / np.sqrt(2.0)
    branches = []
    p_acc = 0.0
    f_acc = 0.0
    for i, p_i, post_i in lossy_detector(state, "a", eta):
        for j, p_j, post in lossy_detector(post_i, "b", eta):
            p = p_i * p_j
            if p <= BRANCH_PRUNE:
                continue
            if (i, j) == (0, 1):
                post = pauli_z(post, "m")
            accepted = i + j == 1
            fid = float(post.fidelity(target))
            if accepted:
                p_acc += p
                f_acc += p * fid
            branches.append(Branch((i, j), float(p), fid, accepted))
    return TransferOutcome(
        kind="lossy_teleport",
        fidelity=f_acc / p_acc if p_acc > 0 else 0.0,
        probability=p_acc,
        branches=branches,
        mass=float(sum(b.probability for b in branches)),
        extra={"eta": eta, "theta": theta},
    )


# ---- network scaling ----------------------------------------------------------------


def network_fidelity(N: int, f2: float) -> float:
    """W-state fidelity over N sites from the pairwise fidelity f2."""
    if N < 2:
        raise TransferError("a network needs at least 2 sites")
    return (1.0 + (N - 1) * (2.0 * f2 - 1.0)) / N


def network_failure_probability(N: int, p1: float) -> float:
    """Probability that no usable pair survives one network attempt.

    Each site's transfer succeeds independently with probability p1; the
    attempt fails when the photon's site failed or fewer than two sites
    succeeded. Equals (1-p1) (1 + p1 (1-p1)^(N-2)).
    """
    if N < 2:
        raise TransferError("a network needs at least 2 sites")
    if not 0.0 <= p1 <= 1.0:
        raise TransferError("per-site success must lie in [0, 1]")
    q = 1.0 - p1
    return q * (1.0 + p1 * q ** (N - 2))


def network_pair_distribution(N: int, p1: float) -> dict:
    """P(k sites survive | attempt succeeded) for k = 2..N.

    p(N, k) = C(N, k) p1^k q^(N-k) * k / (N (1 - p_fail)); the factor k/N
    is the chance the photon sits among the k survivors.
    """
    p_fail = network_failure_probability(N, p1)
    if p_fail >= 1.0:
        raise TransferError("the network never succeeds at p1 = 0")
    q = 1.0 - p1
    return {
        k: math.comb(N, k) * p1 ** k * q ** (N - k) * k / (N * (1.0 - p_fail))
        for k in range(2, N + 1)
    }


def network_monte_carlo(N: int, p1: float, trials: int, rng=None) -> dict:
    """Empirical failure rate and survivor-count distribution."""
    rng = make_rng(rng)
    trials = int(trials)
    succ = rng.random((trials, N)) < p1
    photon = rng.integers(0, N, size=trials)
    photon_ok = succ[np.arange(trials), photon]
    k = succ.sum(axis=1)
    fail = (~photon_ok) | (k <= 1)
    kept = k[~fail]
    counts = np.bincount(kept, minlength=N + 1)
    return {
        "trials": trials,
        "p_fail": float(fail.mean()),
        "k_counts": {kk: int(counts[kk]) for kk in range(2, N + 1)},
        "successes": int((~fail).sum()),
    }
