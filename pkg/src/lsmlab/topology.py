"""Reservoir graph and input wiring construction.

The reservoir is a grid-embedded random digraph: neurons sit on a 3-D integer
grid, a seeded shuffle labels 80% of them excitatory, and each ordered pair
connects with probability C_pair * exp(-D^2 / lambda^2) where D is the
Euclidean grid distance and C_pair depends on the (pre, post) E/I types.
Edge sign follows the pre-synaptic neuron; all magnitudes are 1 (strength is
scaled globally at simulation time).

Input wiring connects each spike channel to a fixed number of reservoir
neurons, half with positive and half with negative sign, all of magnitude 1.

Both constructions are pure functions of their parameters and seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import seeding

__all__ = [
    "ReservoirParams",
    "ReservoirGraph",
    "InputWiring",
    "connection_probability",
    "build_reservoir",
    "build_input_wiring",
]


@dataclass(frozen=True)
class ReservoirParams:
    n_neurons: int = 125
    grid: tuple[int, int, int] = (5, 5, 5)
    excitatory_fraction: float = 0.8
    lam: float = 2.0
    c_ee: float = 0.3
    c_ei: float = 0.2
    c_ie: float = 0.4
    c_ii: float = 0.1
    seed: int = 1

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(int(g) for g in self.grid))
        if int(np.prod(self.grid)) != self.n_neurons:
            raise ValueError(f"grid {self.grid} does not hold {self.n_neurons} neurons")
        if not 0 < self.excitatory_fraction < 1:
            raise ValueError("excitatory_fraction must be in (0, 1)")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        for name in ("c_ee", "c_ei", "c_ie", "c_ii"):
            c = getattr(self, name)
            if not 0 <= c <= 1:
                raise ValueError(f"{name} must be in [0, 1]")

    def base_probability(self, pre_exc: bool, post_exc: bool) -> float:
        if pre_exc:
            return self.c_ee if post_exc else self.c_ei
        return self.c_ie if post_exc else self.c_ii

    def to_dict(self) -> dict:
        return {
            "n_neurons": self.n_neurons,
            "grid": list(self.grid),
            "excitatory_fraction": self.excitatory_fraction,
            "lambda": self.lam,
            "c_ee": self.c_ee,
            "c_ei": self.c_ei,
            "c_ie": self.c_ie,
            "c_ii": self.c_ii,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReservoirParams":
        known = {
            "n_neurons", "grid", "excitatory_fraction", "lambda",
            "c_ee", "c_ei", "c_ie", "c_ii", "seed",
        }
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown reservoir keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in d.items() if k not in ("lambda", "grid")}
        if "lambda" in d:
            kwargs["lam"] = d["lambda"]
        if "grid" in d:
            kwargs["grid"] = tuple(d["grid"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ReservoirGraph:
    """Fixed recurrent topology: positions, E/I labels and signed unit edges."""

    positions: np.ndarray       # (N, 3) int
    is_excitatory: np.ndarray   # (N,) bool
    pre: np.ndarray             # (E,) int
    post: np.ndarray            # (E,) int
    weight_magnitude: np.ndarray  # (E,) float, all 1 by default
    params: ReservoirParams

    def __post_init__(self):
        for name in ("positions", "is_excitatory", "pre", "post", "weight_magnitude"):
            getattr(self, name).setflags(write=False)

    @property
    def n_neurons(self) -> int:
        return len(self.is_excitatory)

    @property
    def n_edges(self) -> int:
        return len(self.pre)

    @property
    def signs(self) -> np.ndarray:
        return np.where(self.is_excitatory[self.pre], 1.0, -1.0)

    def signed_weights(self) -> np.ndarray:
        """Dense (post, pre) signed weight matrix."""
        n = self.n_neurons
        w = np.zeros((n, n))
        w[self.post, self.pre] = self.signs * self.weight_magnitude
        return w

    def outgoing_csc(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-pre adjacency (ptr, post, signed weight), for sparse propagation."""
        order = np.lexsort((self.post, self.pre))
        pre_s = self.pre[order]
        ptr = np.zeros(self.n_neurons + 1, dtype=np.int64)
        np.add.at(ptr, pre_s + 1, 1)
        ptr = np.cumsum(ptr)
        w = (self.signs * self.weight_magnitude)[order]
        return ptr, self.post[order].astype(np.int64), w.astype(np.float64)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "positions": self.positions.tolist(),
            "is_excitatory": self.is_excitatory.astype(int).tolist(),
            "edges": [
                [int(a), int(b), float(m)]
                for a, b, m in zip(self.pre, self.post, self.weight_magnitude)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReservoirGraph":
        unknown = set(d) - {"params", "positions", "is_excitatory", "edges"}
        if unknown:
            raise ValueError(f"unknown reservoir graph keys: {sorted(unknown)}")
        edges = np.asarray(d["edges"], dtype=np.float64).reshape(-1, 3)
        return cls(
            positions=np.asarray(d["positions"], dtype=np.int64),
            is_excitatory=np.asarray(d["is_excitatory"], dtype=bool),
            pre=edges[:, 0].astype(np.int64),
            post=edges[:, 1].astype(np.int64),
            weight_magnitude=edges[:, 2],
            params=ReservoirParams.from_dict(d["params"]),
        )


@dataclass(frozen=True)
class InputWiring:
    """Channel -> reservoir connections, balanced +/- signs of magnitude 1."""

    targets: np.ndarray  # (n_channels, fan_out) int
    signs: np.ndarray    # (n_channels, fan_out) int, +1/-1

    def __post_init__(self):
        self.targets.setflags(write=False)
        self.signs.setflags(write=False)

    @property
    def n_channels(self) -> int:
        return self.targets.shape[0]

    @property
    def fan_out(self) -> int:
        return self.targets.shape[1]

    def to_dict(self) -> dict:
        return {
            "targets": self.targets.tolist(),
            "signs": self.signs.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InputWiring":
        unknown = set(d) - {"targets", "signs"}
        if unknown:
            raise ValueError(f"unknown input wiring keys: {sorted(unknown)}")
        return cls(
            targets=np.asarray(d["targets"], dtype=np.int64),
            signs=np.asarray(d["signs"], dtype=np.int64),
        )


def connection_probability(pos_a, pos_b, type_pair: str, params: ReservoirParams) -> float:
    """C_pair * exp(-D(a,b)^2 / lambda^2), clamped to [0, 1].

    ``type_pair`` is two letters, pre then post, e.g. "EI".
    """
    pair = type_pair.upper()
    if pair not in ("EE", "EI", "IE", "II"):
        raise ValueError(f"bad type pair {type_pair!r}")
    c = params.base_probability(pair[0] == "E", pair[1] == "E")
    d2 = float(np.sum((np.asarray(pos_a, dtype=float) - np.asarray(pos_b, dtype=float)) ** 2))
    return float(min(1.0, max(0.0, c * np.exp(-d2 / params.lam**2))))


def grid_positions(grid: tuple[int, int, int]) -> np.ndarray:
    gx, gy, gz = grid
    return np.array(
        [(x, y, z) for x in range(gx) for y in range(gy) for z in range(gz)],
        dtype=np.int64,
    )


def build_reservoir(params: ReservoirParams) -> ReservoirGraph:
    """Draw the fixed recurrent graph; identical output for identical params."""
    n = params.n_neurons
    positions = grid_positions(params.grid)

    n_exc = round(params.excitatory_fraction * n)
    perm = seeding.rng(params.seed, "reservoir-ei").permutation(n)
    is_exc = np.zeros(n, dtype=bool)
    is_exc[perm[:n_exc]] = True

    diff = positions[:, None, :] - positions[None, :, :]
    d2 = np.sum(diff.astype(np.float64) ** 2, axis=-1)
    c = np.empty((n, n))
    for pre_e in (True, False):
        for post_e in (True, False):
            mask = np.outer(is_exc == pre_e, is_exc == post_e)
            c[mask] = params.base_probability(pre_e, post_e)
    prob = np.clip(c * np.exp(-d2 / params.lam**2), 0.0, 1.0)
    np.fill_diagonal(prob, 0.0)

    u = seeding.rng(params.seed, "reservoir-edges").random((n, n))
    pre_idx, post_idx = np.nonzero(u < prob)  # row = pre, col = post
    return ReservoirGraph(
        positions=positions,
        is_excitatory=is_exc,
        pre=pre_idx.astype(np.int64),
        post=post_idx.astype(np.int64),
        weight_magnitude=np.ones(len(pre_idx)),
        params=params,
    )


def build_input_wiring(n_channels: int, fan_out: int, n_neurons: int, seed: int) -> InputWiring:
    """Wire each channel to fan_out distinct neurons, half +1 and half -1."""
    if fan_out % 2 != 0:
        raise ValueError("fan_out must be even to balance excitatory/inhibitory signs")
    if fan_out > n_neurons:
        raise ValueError("fan_out exceeds the number of reservoir neurons")
    gen = seeding.rng(seed, "input-wiring")
    targets = np.empty((n_channels, fan_out), dtype=np.int64)
    signs = np.empty((n_channels, fan_out), dtype=np.int64)
    half = np.array([1] * (fan_out // 2) + [-1] * (fan_out // 2), dtype=np.int64)
    for ch in range(n_channels):
        targets[ch] = gen.choice(n_neurons, size=fan_out, replace=False)
        signs[ch] = gen.permutation(half)
    return InputWiring(targets=targets, signs=signs)
