"""Gate IR over qudit registers, cost accounting, and a dense simulator.

A circuit is an ordered gate list over a register of explicitly-dimensioned
subsystems. Gates carry either an explicit unitary block or a Hermitian
generator plus angle, may be conditioned on subsystem values (multi-valued
control registers are allowed; unary encodings make every control a single
subsystem), and are tagged with one cost model.

Accounting rule: a gate of angle theta is worth ceil(|theta|) elementary
units (minimum 1), so rotations respect the unit-phase normalization of the
cost model while constructions keep their natural angles, which never exceed
pi here. A controlled two-level gate whose controls each sit on a single
subsystem counts as one two-local gate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionOverflowError,
    InvalidGateError,
    MixedModelError,
    OverlappingControlError,
)
from .numkit import hermitian_eigendecompose

TOTAL_DIM_CAP = 2**14
GATE_UNITARY_ATOL = 1e-10


class CostModel(str, Enum):
    QUBIT_TWO_LOCAL = "qubit_two_local"
    FERMIONIC_WEIGHT2 = "fermionic_weight2"
    BOSONIC_WEIGHT2 = "bosonic_weight2"


def wrap_angle(theta: float) -> float:
    """Reduce an angle to (-pi, pi]; phases of integer-spectrum generators
    are 2pi-periodic, so this never changes the gate's unitary."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t > math.pi:
        t -= 2.0 * math.pi
    elif t <= -math.pi:
        t += 2.0 * math.pi
    return t


@dataclass(frozen=True, eq=False)
class Gate:
    """One operation: explicit ``unitary`` or ``generator``+``angle``.

    ``controls`` is a tuple of (subsystem index, value) pairs; the block acts
    on the joint space of ``targets`` (row-major, targets[0] most
    significant) only where every control subsystem holds its value.
    """

    label: str
    targets: tuple[int, ...]
    unitary: np.ndarray | None = None
    generator: np.ndarray | None = None
    angle: float | None = None
    controls: tuple[tuple[int, int], ...] = ()
    meta: dict | None = None
    # permutation shortcut: block is a basis permutation, stored as an index
    # vector so application is a take() instead of a matmul
    perm: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(set(self.targets)) != len(self.targets):
            raise InvalidGateError(f"duplicate targets in {self.label}: {self.targets}")
        overlap = {c for c, _ in self.controls} & set(self.targets)
        if overlap:
            raise OverlappingControlError(
                f"controls {sorted(overlap)} overlap targets of {self.label}"
            )
        if self.unitary is None and self.generator is None and self.perm is None:
            raise InvalidGateError(f"gate {self.label} carries no payload")

    def block(self) -> np.ndarray:
        """Dense unitary on the targets' joint space."""
        if self.perm is not None:
            d = len(self.perm)
            b = np.zeros((d, d), dtype=complex)
            b[list(self.perm), range(d)] = 1.0
            return b
        if self.unitary is not None:
            return self.unitary
        w, v = hermitian_eigendecompose(self.generator)
        ang = self.angle if self.angle is not None else 0.0
        return (v * np.exp(-1j * ang * w)) @ v.conj().T

    def inverse(self) -> Gate:
        if self.perm is not None:
            inv = [0] * len(self.perm)
            for src, dst in enumerate(self.perm):
                inv[dst] = src
            return replace(self, perm=tuple(inv))
        if self.unitary is not None:
            return replace(self, unitary=self.unitary.conj().T)
        meta = self.meta
        if meta is not None and ("a" in meta or "b" in meta):
            meta = dict(meta)
            for k in ("a", "b"):
                if k in meta:
                    meta[k] = -meta[k]
        return replace(self, angle=-(self.angle or 0.0), meta=meta)

    def elementary_units(self) -> int:
        if self.angle is None:
            return 1
        return max(1, math.ceil(abs(self.angle)))


def controlled(gate: Gate, control: tuple[int, int]) -> Gate:
    """Attach one more (subsystem, value) control to a gate."""
    idx, val = control
    if idx in gate.targets:
        raise OverlappingControlError(f"control {idx} overlaps targets {gate.targets}")
    if any(idx == c for c, _ in gate.controls):
        raise OverlappingControlError(f"subsystem {idx} already controls {gate.label}")
    return replace(gate, controls=gate.controls + ((idx, int(val)),))


def permutation_gate(label: str, target: int, perm, controls=()) -> Gate:
    """Basis permutation on one subsystem, e.g. a level swap or cyclic shift."""
    return Gate(label=label, targets=(target,), perm=tuple(int(p) for p in perm),
                controls=tuple(controls))


def level_swap_gate(target: int, width: int, a: int, b: int, controls=()) -> Gate:
    perm = list(range(width))
    perm[a], perm[b] = perm[b], perm[a]
    return permutation_gate("uswap", target, perm, controls)


@dataclass(frozen=True)
class GateCount:
    raw_gates: int
    elementary_count: int
    per_label: dict[str, int] = field(default_factory=dict)

    def __add__(self, other: "GateCount") -> "GateCount":
        merged = dict(self.per_label)
        for k, v in other.per_label.items():
            merged[k] = merged.get(k, 0) + v
        return GateCount(self.raw_gates + other.raw_gates,
                         self.elementary_count + other.elementary_count, merged)


@dataclass(eq=False)
class Circuit:
    register: tuple[int, ...]
    gates: tuple[Gate, ...] = ()
    cost_model: CostModel = CostModel.QUBIT_TWO_LOCAL
    global_phase: float = 0.0
    postprocess: dict | None = None

    def __post_init__(self):
        self.register = tuple(int(d) for d in self.register)
        if any(d < 1 for d in self.register):
            raise ValueError(f"register dimensions must be >= 1: {self.register}")
        self.gates = tuple(self.gates)
        for g in self.gates:
            self._check_gate(g)

    def _check_gate(self, g: Gate):
        n = len(self.register)
        for t in g.targets:
            if not 0 <= t < n:
                raise InvalidGateError(f"gate {g.label} targets subsystem {t} of {n}")
        for c, v in g.controls:
            if not 0 <= c < n:
                raise InvalidGateError(f"gate {g.label} controls subsystem {c} of {n}")
            if not 0 <= v < self.register[c]:
                raise InvalidGateError(
                    f"control value {v} out of range for subsystem {c} (dim {self.register[c]})"
                )
        dt = int(np.prod([self.register[t] for t in g.targets])) if g.targets else 1
        if g.perm is not None:
            if len(g.perm) != dt:
                raise InvalidGateError(f"permutation length {len(g.perm)} != target dim {dt}")
            return
        payload = g.unitary if g.unitary is not None else g.generator
        if payload.shape != (dt, dt):
            raise InvalidGateError(
                f"gate {g.label} payload shape {payload.shape} != target dim {dt}"
            )
        if g.unitary is not None:
            defect = np.linalg.norm(g.unitary.conj().T @ g.unitary - np.eye(dt))
            if defect > GATE_UNITARY_ATOL * max(1.0, math.sqrt(dt)):
                raise InvalidGateError(f"gate {g.label} unitary defect {defect:.2e}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.register))

    def appended(self, *gates: Gate) -> "Circuit":
        return Circuit(self.register, self.gates + tuple(gates), self.cost_model,
                       self.global_phase, self.postprocess)

    def then(self, other: "Circuit") -> "Circuit":
        if other.register != self.register:
            raise DimensionMismatchError("cannot concatenate circuits on different registers")
        if other.cost_model != self.cost_model:
            raise MixedModelError("cannot concatenate circuits with different cost models")
        return Circuit(self.register, self.gates + other.gates, self.cost_model,
                       wrap_angle(self.global_phase + other.global_phase))

    def inverse(self) -> "Circuit":
        return Circuit(self.register, tuple(g.inverse() for g in reversed(self.gates)),
                       self.cost_model, -self.global_phase, self.postprocess)


def _apply_permutation(arr, controls, target, perm) -> np.ndarray:
    """Permute levels of one axis; perm[k] is the image of level k."""
    inv = np.empty(len(perm), dtype=np.intp)
    inv[list(perm)] = np.arange(len(perm))
    if not controls:
        return np.take(arr, inv, axis=target)
    idx = [slice(None)] * arr.ndim
    control_axes = set()
    for c, v in controls:
        idx[c] = v
        control_axes.add(c)
    pos = target - sum(1 for c in control_axes if c < target)
    arr[tuple(idx)] = np.take(arr[tuple(idx)], inv, axis=pos)
    return arr


def _apply_gate_to_array(arr: np.ndarray, register: tuple[int, ...], gate: Gate) -> np.ndarray:
    """Apply one gate on an array shaped register + batch dims."""
    if gate.perm is not None and len(gate.targets) == 1:
        return _apply_permutation(arr, gate.controls, gate.targets[0], gate.perm)

    nreg = len(register)
    idx = [slice(None)] * arr.ndim
    control_axes = []
    for c, v in gate.controls:
        idx[c] = v
        control_axes.append(c)
    remaining = [a for a in range(nreg) if a not in control_axes]
    pos = [remaining.index(t) for t in gate.targets]

    block = gate.block()
    dt = block.shape[0]
    if not control_axes:
        moved = np.moveaxis(arr, pos, range(len(pos)))
        res = (block @ moved.reshape(dt, -1)).reshape(moved.shape)
        return np.ascontiguousarray(np.moveaxis(res, range(len(pos)), pos))
    sub = arr[tuple(idx)]  # view (basic indexing)
    moved = np.moveaxis(sub, pos, range(len(pos)))
    res = (block @ moved.reshape(dt, -1)).reshape(moved.shape)
    arr[tuple(idx)] = np.moveaxis(res, range(len(pos)), pos)
    return arr


def _fused_gate_iter(gates: tuple[Gate, ...]):
    """Compose runs of same-target, same-control permutation gates.

    Permutation composition is exact integer arithmetic, so fusing an
    adjacent-swap chain into one gather changes nothing semantically and
    collapses the dominant memory traffic of unary shift chains.
    """
    i = 0
    n = len(gates)
    while i < n:
        g = gates[i]
        if g.perm is None:
            yield g
            i += 1
            continue
        perm = list(g.perm)
        j = i + 1
        while (j < n and gates[j].perm is not None
               and gates[j].targets == g.targets and gates[j].controls == g.controls):
            nxt = gates[j].perm
            perm = [nxt[p] for p in perm]
            j += 1
        if j == i + 1:
            yield g
        else:
            yield replace(g, perm=tuple(perm), label=g.label)
        i = j


def apply(circuit: Circuit, state: np.ndarray) -> np.ndarray:
    """Apply a circuit to a statevector, gate by gate.

    Never materializes the full unitary, so it works on registers past the
    dense cap as long as a single statevector fits.
    """
    state = np.asarray(state, dtype=complex)
    if state.size != circuit.dim:
        raise DimensionMismatchError(
            f"state dim {state.size} != register dim {circuit.dim}"
        )
    arr = state.reshape(circuit.register).copy()
    for g in _fused_gate_iter(circuit.gates):
        arr = _apply_gate_to_array(arr, circuit.register, g)
    out = arr.reshape(-1)
    if circuit.global_phase:
        out = out * np.exp(1j * circuit.global_phase)
    return out


def apply_to_matrix(circuit: Circuit, mat: np.ndarray) -> np.ndarray:
    """Apply a circuit to every column of ``mat`` at once."""
    d = circuit.dim
    if mat.shape[0] != d:
        raise DimensionMismatchError(f"matrix rows {mat.shape[0]} != register dim {d}")
    arr = np.ascontiguousarray(mat, dtype=complex).reshape(circuit.register + (mat.shape[1],))
    for g in _fused_gate_iter(circuit.gates):
        arr = _apply_gate_to_array(arr, circuit.register, g)
    out = arr.reshape(d, mat.shape[1])
    if circuit.global_phase:
        out = out * np.exp(1j * circuit.global_phase)
    return out


def to_unitary(circuit: Circuit, dim_cap: int | None = None) -> np.ndarray:
    """Dense unitary of the whole circuit (product of gates in order)."""
    cap = dim_cap if dim_cap is not None else desk_dim_cap()
    d = circuit.dim
    if d > cap:
        raise DimensionOverflowError(f"register dim {d} exceeds cap {cap}")
    return apply_to_matrix(circuit, np.eye(d, dtype=complex))


def desk_dim_cap() -> int:
    """Dense-unitary dimension cap; FFSIM_DESK_CAP overrides it."""
    import os

    val = os.environ.get("FFSIM_DESK_CAP")
    if not val:
        return TOTAL_DIM_CAP
    if val.lower() in ("off", "none"):
        return 1 << 62
    return int(val)


def count(circuit: Circuit) -> GateCount:
    """Gate totals under the circuit's cost model (theta-split units)."""
    per_label: dict[str, int] = {}
    elementary = 0
    for g in circuit.gates:
        model = (g.meta or {}).get("model")
        if model is not None and model != circuit.cost_model.value:
            raise MixedModelError(
                f"gate {g.label} tagged {model}, circuit is {circuit.cost_model.value}"
            )
        u = g.elementary_units()
        elementary += u
        per_label[g.label] = per_label.get(g.label, 0) + u
    return GateCount(len(circuit.gates), elementary, per_label)


# --- serialization -----------------------------------------------------------
# Line-oriented JSON: a header line with register/cost model/global phase,
# then one line per gate. Floats round-trip bit-exactly through repr.


def _matrix_to_json(m: np.ndarray | None):
    if m is None:
        return None
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _matrix_from_json(data) -> np.ndarray | None:
    if data is None:
        return None
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)


def circuit_to_json_lines(circuit: Circuit) -> str:
    header = {
        "register": list(circuit.register),
        "cost_model": circuit.cost_model.value,
        "global_phase": float(circuit.global_phase),
        "postprocess": circuit.postprocess,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for g in circuit.gates:
        rec = {
            "label": g.label,
            "targets": list(g.targets),
            "controls": [[c, v] for c, v in g.controls],
            "angle": None if g.angle is None else float(g.angle),
            "matrix": _matrix_to_json(g.unitary),
            "generator": _matrix_to_json(g.generator),
            "perm": None if g.perm is None else list(g.perm),
            "meta": g.meta,
        }
        lines.append(json.dumps(rec, sort_keys=True))
    return "\n".join(lines) + "\n"


def circuit_from_json_lines(text: str) -> Circuit:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = json.loads(lines[0])
    gates = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        gates.append(Gate(
            label=rec["label"],
            targets=tuple(rec["targets"]),
            unitary=_matrix_from_json(rec["matrix"]),
            generator=_matrix_from_json(rec["generator"]),
            angle=rec["angle"],
            controls=tuple((c, v) for c, v in rec["controls"]),
            meta=rec["meta"],
            perm=None if rec["perm"] is None else tuple(rec["perm"]),
        ))
    return Circuit(tuple(header["register"]), tuple(gates), CostModel(header["cost_model"]),
                   header["global_phase"], header.get("postprocess"))
