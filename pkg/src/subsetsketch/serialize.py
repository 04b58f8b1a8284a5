"""Sketch state files: save a built sketch, reload it bit-identically.

A state file is JSON with a fixed header (format version, sketch kind,
universe size, accuracy parameters, master seed, set-system fingerprint)
plus per-kind dynamic state.  Hash coefficients are never stored: they are
pure functions of the master seed, so loading reconstructs the sketch via
its constructor and then restores only the data-dependent state (sampler
supports, heap contents, counter arrays).  Supports re-enter through
`restore_support`, which replays a settled snapshot without re-running the
sampling decisions, so a loaded sketch answers every query with exactly the
bits the saved one would have.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from .errors import UnknownKind
from .hashing import ALPHA_INVERSE_CAP
from .l1_adapter import L1UniversalSketch
from .lp_additive import LpSetSketch
from .priority_sampling import PrioritySketch
from .setsystem import IntervalSystem, SetSystem
from .subset_l0 import L0UniversalSketch

FORMAT_VERSION = 1
SKETCH_KINDS = ("l0", "l1", "priority", "lp_additive")


# ---------------------------------------------------------------------------
# set systems


def system_spec(system) -> dict:
    if isinstance(system, IntervalSystem):
        return {
            "kind": "intervals",
            "n": system.n,
            "min_len": system.min_len,
            "max_len": system.max_len,
        }
    if isinstance(system, SetSystem):
        return {
            "kind": "explicit",
            "n": system.n,
            "sets": [[int(c) for c in system.coords_of(j)]
                     for j in range(system.num_sets)],
        }
    raise TypeError(f"unsupported system type: {type(system).__name__}")


def system_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind == "intervals":
        return IntervalSystem(spec["n"], spec["min_len"], spec["max_len"])
    if kind == "explicit":
        return SetSystem(spec["n"], spec["sets"])
    raise UnknownKind(f"unknown system kind {kind!r}")


# ---------------------------------------------------------------------------
# support-sketch plumbing


def _l0_slots(sk: L0UniversalSketch):
    """Every distinct bounded sampler inside a support sketch, in an order
    that is a pure function of the constructor arguments."""
    yield "coarse.exact", sk.coarse.exact
    for j, det in enumerate(sk.coarse.banks):
        for i, samp in enumerate(det.sampled_instances):
            yield f"coarse.bank{j}.copy{i}", samp
    for i, samp in enumerate(sk.ladder):
        yield f"ladder{i}", samp


def _l0_supports(sk: L0UniversalSketch) -> dict:
    return {name: samp.support() for name, samp in _l0_slots(sk)}


def _l0_restore(sk: L0UniversalSketch, supports: dict) -> None:
    for name, samp in _l0_slots(sk):
        samp.restore_support(supports.get(name, []))


def _detector_reps(sk: L0UniversalSketch) -> int:
    return sk.coarse.banks[0].reps


# ---------------------------------------------------------------------------
# per-kind state


def _header(kind, *, n, epsilon=None, p_norm=None, m_bar=None, seed,
            fingerprint=None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "sketch_kind": kind,
        "n": int(n),
        "epsilon": epsilon,
        "p_norm": p_norm,
        "m_bar": m_bar,
        "seeds": {"master": int(seed)},
        "set_system_fingerprint": fingerprint,
    }


def _state_l0(sk: L0UniversalSketch) -> dict:
    if sk.ladder[0].project is not None or sk.universe != sk.system.n:
        raise ValueError("projected sketches are saved via their owning reduction")
    out = _header("l0", n=sk.system.n, epsilon=sk.epsilon, p_norm=0.0,
                  seed=sk.seed, fingerprint=sk.system.fingerprint())
    out["system"] = system_spec(sk.system)
    out["state"] = {
        "detector_reps": _detector_reps(sk),
        "supports": _l0_supports(sk),
    }
    return out


def _load_l0(d: dict) -> L0UniversalSketch:
    sk = L0UniversalSketch(
        system_from_spec(d["system"]),
        d["epsilon"],
        d["seeds"]["master"],
        detector_reps=d["state"]["detector_reps"],
    )
    _l0_restore(sk, d["state"]["supports"])
    return sk


def _state_l1(sk: L1UniversalSketch) -> dict:
    out = _header("l1", n=sk.system.n, epsilon=sk.epsilon, p_norm=1.0,
                  m_bar=sk.capacity, seed=sk.seed,
                  fingerprint=sk.system.fingerprint())
    out["system"] = system_spec(sk.system)
    out["state"] = {
        "clock": sk.clock,
        "detector_reps": _detector_reps(sk.inner),
        "supports": _l0_supports(sk.inner),
    }
    return out


def _load_l1(d: dict) -> L1UniversalSketch:
    sk = L1UniversalSketch(
        system_from_spec(d["system"]),
        d["epsilon"],
        d["seeds"]["master"],
        stream_capacity=d["m_bar"],
        detector_reps=d["state"]["detector_reps"],
    )
    sk.clock = int(d["state"]["clock"])
    _l0_restore(sk.inner, d["state"]["supports"])
    return sk


def _state_priority(sk: PrioritySketch) -> dict:
    out = _header("priority", n=sk.system.n, p_norm=sk.p, seed=sk.seed,
                  fingerprint=sk.system.fingerprint())
    out["system"] = system_spec(sk.system)
    out["state"] = {
        "k": sk.k,
        # heap lists in storage order; weights round-trip exactly through
        # JSON's shortest-repr floats, priorities are recomputed on load
        "heaps": [[[e[2], e[3]] for e in heap] for heap in sk._heaps],
        "seen": sorted(sk._seen),
    }
    return out


def _load_priority(d: dict) -> PrioritySketch:
    st = d["state"]
    sk = PrioritySketch(system_from_spec(d["system"]), d["p_norm"],
                        st["k"], d["seeds"]["master"])
    for j, stored in enumerate(st["heaps"]):
        # the saved list order already satisfies the heap invariant; rebuild
        # it verbatim so later displacements replay identically
        heap = [(float(w) / sk.uniform_for(int(c)), -int(c), int(c), float(w))
                for c, w in stored]
        sk._heaps[j] = heap
        for _, _, c, _ in heap:
            sk._refs[c] = sk._refs.get(c, 0) + 1
    sk._seen = set(st["seen"])
    return sk


def _state_lp(sk: LpSetSketch) -> dict:
    out = _header("lp_additive", n=sk.n, epsilon=sk.epsilon, p_norm=sk.p,
                  seed=sk.seed)
    out["state"] = {
        "k": sk.k,
        "width": sk.cs.width,
        "depth": sk.cs.depth,
        "scaler_cap": ALPHA_INVERSE_CAP,
        "counters": base64.b64encode(
            np.ascontiguousarray(sk.cs.counters).tobytes()).decode("ascii"),
    }
    return out


def _load_lp(d: dict) -> LpSetSketch:
    st = d["state"]
    sk = LpSetSketch(d["n"], d["p_norm"], d["epsilon"],
                     d["seeds"]["master"], k=st["k"])
    if (sk.cs.width, sk.cs.depth) != (st["width"], st["depth"]):
        raise ValueError(
            "sizing mismatch: file was written with counter dimensions "
            f"({st['width']}, {st['depth']}), rebuilt "
            f"({sk.cs.width}, {sk.cs.depth})"
        )
    if st["scaler_cap"] != ALPHA_INVERSE_CAP:
        raise ValueError("scaler cap mismatch")
    raw = base64.b64decode(st["counters"])
    sk.cs.counters[:] = np.frombuffer(raw, dtype=np.float64).reshape(
        sk.cs.depth, sk.cs.width)
    return sk


# ---------------------------------------------------------------------------
# public API

_SAVERS = [
    (L0UniversalSketch, _state_l0),
    (L1UniversalSketch, _state_l1),
    (PrioritySketch, _state_priority),
    (LpSetSketch, _state_lp),
]
_LOADERS = {
    "l0": _load_l0,
    "l1": _load_l1,
    "priority": _load_priority,
    "lp_additive": _load_lp,
}


def sketch_state(sk) -> dict:
    """JSON-ready state dict for any of the four sketch kinds."""
    for cls, fn in _SAVERS:
        if isinstance(sk, cls):
            return fn(sk)
    raise TypeError(f"cannot serialize {type(sk).__name__}")


def sketch_from_state(d: dict):
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version!r}")
    kind = d.get("sketch_kind")
    if kind not in _LOADERS:
        raise UnknownKind(f"unknown sketch kind {kind!r}; known: {SKETCH_KINDS}")
    return _LOADERS[kind](d)


def save_sketch(sk, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(sketch_state(sk), f)
        f.write("\n")


def load_sketch(path):
    with open(path, "r", encoding="utf-8") as f:
        return sketch_from_state(json.load(f))
