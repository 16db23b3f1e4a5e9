"""Brute-force Fock-space engine for the two-crystal selection set-up.

States are sparse maps from occupation vectors to complex amplitudes over
eight modes, ordered

    1x, 1y, 1'x, 1'y, 2x, 2y, 2'x, 2'y

(spatial mode major, polarization minor).  Every probability is obtained by
applying creation/annihilation operators directly; nothing here uses the
closed-form expressions in :mod:`fourphoton.analytic`, which is what makes
this module usable as an oracle for them.

An optional internal *label* degree of freedom marks photons from different
pair emissions as distinguishable.  A state with ``n_labels = L`` carries
``8 * L`` occupation entries; entry ``label * 8 + mode`` is the occupation
of ``mode`` for photons carrying ``label``.  Detectors do not resolve labels.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .apparatus import AnalyzerSettings, BeamSplitter, DetectorModel, InterferenceModel

MAX_OCCUPATION = 2
N_MODES = 8


@dataclass(frozen=True, order=True)
class ModeIndex:
    spatial: str
    polarization: str

    def __post_init__(self) -> None:
        if self.spatial not in SPATIAL_MODES:
            raise ValueError(f"unknown spatial mode {self.spatial!r}")
        if self.polarization not in POLARIZATIONS:
            raise ValueError(f"unknown polarization {self.polarization!r}")

    @property
    def index(self) -> int:
        return 2 * SPATIAL_MODES.index(self.spatial) + POLARIZATIONS.index(self.polarization)


SPATIAL_MODES = ("1", "1'", "2", "2'")
POLARIZATIONS = ("x", "y")
MODES = tuple(ModeIndex(s, p) for s in SPATIAL_MODES for p in POLARIZATIONS)

# Detector-side modes produced by :func:`detector_transform`.  The primed
# "perp" ports are the blocked outputs of the selector polarizers; nobody
# watches them.
DETECTOR_MODES = ("D1", "D1perp", "D1'", "D1'perp", "D2", "D2perp", "D2'", "D2'perp")
D1, D1P, D1S, D1SP, D2, D2P, D2S, D2SP = range(8)

_IDX = {f"{m.spatial}{m.polarization}": m.index for m in MODES}


class Kind(str, Enum):
    BOTH_CRYSTALS = "both-crystals"
    CRYSTAL1_DOUBLE = "crystal1-double"
    CRYSTAL2_DOUBLE = "crystal2-double"


Occupation = tuple[int, ...]


@dataclass(frozen=True)
class FockState:
    amplitudes: Mapping[Occupation, complex]
    n_labels: int = 1
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        width = N_MODES * self.n_labels
        for occ in self.amplitudes:
            if len(occ) != width:
                raise ValueError(f"occupation vector {occ} does not have {width} entries")
            if any(n < 0 for n in occ):
                raise ValueError(f"negative occupation in {occ}")
            if any(n > MAX_OCCUPATION for n in occ):
                raise ValueError(
                    f"occupation {occ} exceeds the cap of {MAX_OCCUPATION} photons per mode"
                )

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def normalized(self) -> "FockState":
        n = math.sqrt(self.norm_sq())
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockState({k: a / n for k, a in self.amplitudes.items()}, self.n_labels)

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ, a in self.amplitudes.items() if a != 0}

    def amplitude(self, occupation: Mapping[str, int] | Occupation) -> complex:
        if isinstance(occupation, Mapping):
            occ = [0] * (N_MODES * self.n_labels)
            for name, n in occupation.items():
                occ[_IDX[name]] = n
            occupation = tuple(occ)
        return complex(self.amplitudes.get(tuple(occupation), 0.0))

    def label_summed(self, occ: Occupation) -> Occupation:
        return tuple(
            sum(occ[lab * N_MODES + m] for lab in range(self.n_labels)) for m in range(N_MODES)
        )


# --- elementary ladder operations on sparse dicts -------------------------------

def _create(vec: Mapping[Occupation, complex], mode: int, coeff: complex = 1.0):
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in vec.items():
        n = occ[mode]
        new = occ[:mode] + (n + 1,) + occ[mode + 1:]
        out[new] += amp * coeff * math.sqrt(n + 1)
    return out


def _annihilate(vec: Mapping[Occupation, complex], mode: int, coeff: complex = 1.0):
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in vec.items():
        n = occ[mode]
        if n == 0:
            continue
        new = occ[:mode] + (n - 1,) + occ[mode + 1:]
        out[new] += amp * coeff * math.sqrt(n)
    return out


def _apply_field(vec, field_terms: Iterable[tuple[int, complex]], dagger: bool = False):
    out: dict[Occupation, complex] = defaultdict(complex)
    for mode, c in field_terms:
        if c == 0:
            continue
        part = _create(vec, mode, c.conjugate()) if dagger else _annihilate(vec, mode, c)
        for k, a in part.items():
            out[k] += a
    return out


def _pair_operator(bell: str, selector: str, label: int) -> list[tuple[complex, tuple[int, int]]]:
    """(|1_x>_B |1_y>_S - |1_y>_B |1_x>_S)/sqrt(2) as a creation polynomial."""
    off = label * N_MODES
    h = 1.0 / math.sqrt(2.0)
    return [
        (h, (off + _IDX[bell + "x"], off + _IDX[selector + "y"])),
        (-h, (off + _IDX[bell + "y"], off + _IDX[selector + "x"])),
    ]


def _apply_pair(vec, bell: str, selector: str, label: int):
    out: dict[Occupation, complex] = defaultdict(complex)
    for c, (m1, m2) in _pair_operator(bell, selector, label):
        part = _create(_create(vec, m1, c), m2)
        for k, a in part.items():
            out[k] += a
    return out


_CRYSTALS = {1: ("1", "1'"), 2: ("2", "2'")}
_PAIRS = {
    Kind.BOTH_CRYSTALS: (1, 2),
    Kind.CRYSTAL1_DOUBLE: (1, 1),
    Kind.CRYSTAL2_DOUBLE: (2, 2),
}


def raw_input_state(kind: Kind | str, distinguishable: bool = False) -> FockState:
    """The input ket exactly as the pair-creation operators produce it.

    For the same-crystal kinds the result is not normalized: two identical
    pairs in the same modes carry squared norm 3 (bosonic enhancement).  With
    ``distinguishable=True`` each emitted pair gets its own label.
    """
    kind = Kind(kind)
    n_labels = 2 if distinguishable else 1
    vec: dict[Occupation, complex] = {(0,) * (N_MODES * n_labels): 1.0 + 0j}
    for i, crystal in enumerate(_PAIRS[kind]):
        bell, sel = _CRYSTALS[crystal]
        vec = _apply_pair(vec, bell, sel, i if distinguishable else 0)
    return FockState({k: a for k, a in vec.items() if a != 0}, n_labels)


def build_input_state(kind: Kind | str, distinguishable: bool = False) -> FockState:
    """Normalized four-photon input state of the requested emission kind."""
    return raw_input_state(kind, distinguishable).normalized()


# --- mode transformations ---------------------------------------------------------

def _transform(state: FockState, columns: Sequence[Sequence[tuple[int, complex]]]) -> FockState:
    """Substitute a^dag_k -> sum_j U[j, k] b^dag_j in every basis vector.

    ``columns[k]`` lists the nonzero (j, U[j, k]) of one 8x8 block; the block
    is applied to every label independently.
    """
    L = state.n_labels
    width = N_MODES * L
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in state.amplitudes.items():
        norm = 1.0
        for n in occ:
            norm *= math.factorial(n)
        partial: dict[Occupation, complex] = {(0,) * width: amp / math.sqrt(norm)}
        for k, n in enumerate(occ):
            lab, base = divmod(k, N_MODES)
            col = [(lab * N_MODES + j, u) for j, u in columns[base] if u != 0]
            for _ in range(n):
                nxt: dict[Occupation, complex] = defaultdict(complex)
                for o, c in partial.items():
                    for j, u in col:
                        m = o[j]
                        nxt[o[:j] + (m + 1,) + o[j + 1:]] += c * u * math.sqrt(m + 1)
                partial = nxt
        for o, c in partial.items():
            out[o] += c
    return FockState({k: a for k, a in out.items() if abs(a) > 1e-300}, L)


def _require_zero_phase(phase: InterferenceModel) -> None:
    # A lossless two-port unitary cannot carry a relative fringe phase between
    # the transmitted and reflected histories: it comes from the detector
    # positions sampling different plane waves.  Only the field-operator route
    # (fourfold_probability) represents it.
    if phase.phi != 0.0:
        raise ValueError("state-transform route supports phi = 0 only; use fourfold_probability")


def apply_beam_splitter(state: FockState, bs: BeamSplitter, phase: InterferenceModel) -> FockState:
    """Mix spatial modes 1' and 2' per polarization.

    ``out_1' = t in_1' + i r in_2'`` and ``out_2' = t in_2' + i r in_1'``;
    modes 1 and 2 pass untouched.  Output modes reuse the input labels 1', 2'
    for the two exit ports.
    """
    _require_zero_phase(phase)
    cols: list[list[tuple[int, complex]]] = [[(k, 1.0)] for k in range(N_MODES)]
    for q, t, r in (("x", bs.t_x, bs.r_x), ("y", bs.t_y, bs.r_y)):
        i1, i2 = _IDX["1'" + q], _IDX["2'" + q]
        cols[i1] = [(i1, t), (i2, 1j * r)]
        cols[i2] = [(i2, t), (i1, 1j * r)]
    return _transform(state, cols)


def detector_transform(bs: BeamSplitter, a: float, b: float, alpha: float, beta: float):
    """Columns of the map from input modes to the eight detector-side modes."""
    ca, sa, cb, sb = math.cos(a), math.sin(a), math.cos(b), math.sin(b)
    cal, sal, cbe, sbe = math.cos(alpha), math.sin(alpha), math.cos(beta), math.sin(beta)
    tx, ty, rx, ry = bs.t_x, bs.t_y, bs.r_x, bs.r_y
    i = 1j
    cols: list[list[tuple[int, complex]]] = [[] for _ in range(N_MODES)]
    cols[_IDX["1x"]] = [(D1, ca), (D1P, -sa)]
    cols[_IDX["1y"]] = [(D1, sa), (D1P, ca)]
    cols[_IDX["2x"]] = [(D2, cb), (D2P, -sb)]
    cols[_IDX["2y"]] = [(D2, sb), (D2P, cb)]
    cols[_IDX["1'x"]] = [(D1S, tx * cal), (D1SP, -tx * sal), (D2S, i * rx * cbe), (D2SP, -i * rx * sbe)]
    cols[_IDX["1'y"]] = [(D1S, ty * sal), (D1SP, ty * cal), (D2S, i * ry * sbe), (D2SP, i * ry * cbe)]
    cols[_IDX["2'x"]] = [(D2S, tx * cbe), (D2SP, -tx * sbe), (D1S, i * rx * cal), (D1SP, -i * rx * sal)]
    cols[_IDX["2'y"]] = [(D2S, ty * sbe), (D2SP, ty * cbe), (D1S, i * ry * sal), (D1SP, i * ry * cal)]
    return cols


def _pair_angles(angles: AnalyzerSettings, pair: tuple[int, int]) -> tuple[float, float]:
    ia, ib = pair
    a = {1: angles.a1, 2: angles.a2}[ia]
    b = {1: angles.b1, 2: angles.b2}[ib]
    return a, b


def outcome_distribution(
    state: FockState,
    bs: BeamSplitter,
    angles: AnalyzerSettings,
    pair: tuple[int, int] = (1, 1),
) -> dict[Occupation, float]:
    """Photon-number pattern over ``DETECTOR_MODES`` -> probability.

    Labels are traced out incoherently.  The probabilities sum to the squared
    norm of ``state``.
    """
    a, b = _pair_angles(angles, pair)
    out_state = _transform(state, detector_transform(bs, a, b, angles.alpha, angles.beta))
    dist: dict[Occupation, float] = defaultdict(float)
    for occ, amp in out_state.amplitudes.items():
        p = abs(amp) ** 2
        if p > 0.0:
            dist[out_state.label_summed(occ)] += p
    return dict(dist)


# --- observables ------------------------------------------------------------------

def _fields(bs: BeamSplitter, phase: InterferenceModel, a: float, b: float, alpha: float, beta: float):
    e_phi = complex(math.cos(phase.phi), math.sin(phase.phi))
    ca, sa, cb, sb = math.cos(a), math.sin(a), math.cos(b), math.sin(b)
    cal, sal, cbe, sbe = math.cos(alpha), math.sin(alpha), math.cos(beta), math.sin(beta)
    E1 = [(_IDX["1x"], ca), (_IDX["1y"], sa)]
    E2 = [(_IDX["2x"], cb), (_IDX["2y"], sb)]
    E1s = [
        (_IDX["1'x"], bs.t_x * cal),
        (_IDX["1'y"], bs.t_y * sal),
        (_IDX["2'x"], 1j * bs.r_x * cal * e_phi),
        (_IDX["2'y"], 1j * bs.r_y * sal * e_phi),
    ]
    E2s = [
        (_IDX["2'x"], bs.t_x * cbe),
        (_IDX["2'y"], bs.t_y * sbe),
        (_IDX["1'x"], 1j * bs.r_x * cbe),
        (_IDX["1'y"], 1j * bs.r_y * sbe),
    ]
    return [[(m, complex(c)) for m, c in f] for f in (E1, E2, E1s, E2s)]


def fourfold_correlation(
    state: FockState,
    bs: BeamSplitter,
    phase: InterferenceModel,
    angles: AnalyzerSettings,
    pair: tuple[int, int] = (1, 1),
) -> complex:
    """<Psi| E2'^+ E1'^+ E2^+ E1^+ E1 E2 E1' E2' |Psi> for an unlabelled state."""
    if state.n_labels != 1:
        raise ValueError("fourfold_correlation expects an unlabelled state")
    if state.photon_numbers() != {4}:
        raise ValueError(f"four-photon state required, got photon numbers {state.photon_numbers()}")
    a, b = _pair_angles(angles, pair)
    E1, E2, E1s, E2s = _fields(bs, phase, a, b, angles.alpha, angles.beta)
    vec = dict(state.amplitudes)
    for f in (E2s, E1s, E2, E1):
        vec = _apply_field(vec, f)
    for f in (E1, E2, E1s, E2s):
        vec = _apply_field(vec, f, dagger=True)
    return sum(
        state.amplitudes[k].conjugate() * a_ for k, a_ in vec.items() if k in state.amplitudes
    )


def fourfold_probability(
    state: FockState,
    bs: BeamSplitter,
    phase: InterferenceModel,
    angles: AnalyzerSettings,
    det: DetectorModel,
    pair: tuple[int, int] = (1, 1),
) -> float:
    """Probability that D1, D2, D1' and D2' all fire, scaled by eta**2."""
    g = fourfold_correlation(state, bs, phase, angles, pair)
    if abs(g.imag) > 1e-12:
        raise ArithmeticError(f"correlation function has imaginary part {g.imag!r}")
    return det.eta ** 2 * g.real


@dataclass(frozen=True)
class GatedProbabilities:
    """Joint probabilities with the D1'-D2' gate open.

    Selector detectors are ideal; Bell detectors D1, D2 follow the
    per-photon threshold rule of :class:`DetectorModel`.
    """

    p_selector_gate: float
    p_bell_coincidence: float
    p_single_D1: float
    p_single_D2: float
    p_double_D1: float
    p_double_D2: float
    p_fire_D1prime: float
    p_fire_D2prime: float


def gated_from_distribution(dist: Mapping[Occupation, float], det: DetectorModel) -> GatedProbabilities:
    acc = dict.fromkeys(GatedProbabilities.__dataclass_fields__, 0.0)
    for pattern, p in dist.items():
        if pattern[D1S] > 0:
            acc["p_fire_D1prime"] += p
        if pattern[D2S] > 0:
            acc["p_fire_D2prime"] += p
        if not (pattern[D1S] > 0 and pattern[D2S] > 0):
            continue
        f1 = det.fire_probability(pattern[D1])
        f2 = det.fire_probability(pattern[D2])
        acc["p_selector_gate"] += p
        acc["p_single_D1"] += p * f1
        acc["p_single_D2"] += p * f2
        acc["p_bell_coincidence"] += p * f1 * f2
        if pattern[D1] == 2:
            acc["p_double_D1"] += p * f1
        if pattern[D2] == 2:
            acc["p_double_D2"] += p * f2
    return GatedProbabilities(**acc)


def gated_probabilities(
    kind: Kind | str,
    bs: BeamSplitter,
    phase: InterferenceModel,
    angles: AnalyzerSettings,
    det: DetectorModel,
    pair: tuple[int, int] = (1, 1),
    distinguishable: bool = False,
) -> GatedProbabilities:
    _require_zero_phase(phase)
    state = build_input_state(kind, distinguishable)
    return gated_from_distribution(outcome_distribution(state, bs, angles, pair), det)


def random_configuration(rng) -> tuple[BeamSplitter, AnalyzerSettings]:
    """A uniformly drawn splitter (independent R_x, R_y) and set of six angles."""
    R_x, R_y = rng.uniform(0.0, 1.0, size=2)
    bs = BeamSplitter.from_polarized(float(R_x), float(R_y))
    ang = rng.uniform(0.0, 2.0 * math.pi, size=6)
    return bs, AnalyzerSettings(*(float(x) for x in ang))


def all_pairs() -> list[tuple[int, int]]:
    return list(itertools.product((1, 2), (1, 2)))
