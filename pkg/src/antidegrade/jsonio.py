"""JSON encoding of matrices, channels, ensembles, POVMs, verdicts and witnesses.

Complex matrices are nested lists ``[[[re, im], ...], ...]``.
"""

from __future__ import annotations

import numpy as np

from . import channels as ch
from .comparison import Degradable, GameWitness, Inconclusive, NotDegradable
from .games import Ensemble, Povm


class SpecError(ValueError):
    """A JSON document does not describe the expected object."""


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_matrix(obj) -> np.ndarray:
    try:
        a = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"matrix is not a nested list of [re, im] pairs: {exc}") from None
    if a.ndim == 2:
        return a.astype(complex)
    if a.ndim != 3 or a.shape[2] != 2:
        raise SpecError(f"matrix must have shape (rows, cols, 2), got {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


# ---------------------------------------------------------------------------
# channels

ZOO = {
    "identity": ("d", lambda s: ch.identity_channel(int(s.get("d", 2)))),
    "erasure": ("p", lambda s: ch.erasure(float(s["p"]), int(s.get("d", 2)))),
    "amplitude_damping": ("gamma", lambda s: ch.amplitude_damping(float(s["gamma"]))),
    "depolarizing": ("p", lambda s: ch.depolarizing(float(s["p"]), int(s.get("d", 2)))),
    "constant": ("dim_in", lambda s: ch.constant_channel(int(s.get("dim_in", 2)))),
    "symmetric": ("d", lambda s: ch.symmetric_channel(int(s.get("d", 2)))),
}

ZOO_PARAMS = {
    "identity": {"d": "dimension (default 2)"},
    "erasure": {"p": "erasure probability in [0, 1]", "d": "input dimension (default 2)"},
    "amplitude_damping": {"gamma": "damping in [0, 1]"},
    "depolarizing": {"p": "mixing weight in [0, 1]", "d": "dimension (default 2)"},
    "constant": {"dim_in": "input dimension (default 2); output |0><0|"},
    "symmetric": {"d": "output dimension >= 2; input d(d+1)/2"},
    "mixture": {"channels": "list of channel specs", "probs": "distribution"},
    "flagged_mixture": {"channels": "list of channel specs", "probs": "distribution"},
}


def channel_from_spec(spec) -> ch.Channel:
    if not isinstance(spec, dict):
        raise SpecError("channel spec must be a JSON object")
    try:
        if "zoo" in spec:
            name = spec["zoo"]
            if name in ("mixture", "flagged_mixture"):
                parts = [channel_from_spec(s) for s in spec["channels"]]
                probs = [float(p) for p in spec["probs"]]
                return ch.mixture(parts, probs) if name == "mixture" else ch.flagged_mixture(parts, probs)
            if name not in ZOO:
                raise SpecError(f"unknown zoo channel {name!r}; known: {sorted(ZOO_PARAMS)}")
            return ZOO[name][1](spec)
        if "kraus" in spec:
            ops = [decode_matrix(k) for k in spec["kraus"]]
            c = ch.from_kraus(ops)
            for key, val in (("dim_in", c.dim_in), ("dim_out", c.dim_out)):
                if key in spec and int(spec[key]) != val:
                    raise SpecError(f"{key}={spec[key]} disagrees with the Kraus operators ({val})")
            return c
        if "choi" in spec:
            m = decode_matrix(spec["choi"])
            if "dim_in" in spec:
                return ch.from_choi(m, int(spec["dim_in"]), spec.get("dim_out"))
            n = m.shape[0]
            d = int(round(np.sqrt(n)))
            if d * d != n:
                raise SpecError("dim_in is required when the Choi size is not a perfect square")
            return ch.from_choi(m, d, d)
    except KeyError as exc:
        raise SpecError(f"missing field {exc}") from None
    raise SpecError("channel spec needs one of 'zoo', 'kraus' or 'choi'")


def encode_channel(c: ch.Channel) -> dict:
    return {"dim_in": c.dim_in, "dim_out": c.dim_out, "choi": encode_matrix(c.choi)}


# ---------------------------------------------------------------------------
# ensembles and POVMs

def ensemble_from_json(obj) -> Ensemble:
    try:
        items = [(float(it["p"]), decode_matrix(it["rho"])) for it in obj["items"]]
        dim = int(obj.get("dim", items[0][1].shape[0]))
    except (KeyError, TypeError, IndexError) as exc:
        raise SpecError(f"malformed ensemble: {exc}") from None
    return Ensemble(dim, items)


def encode_ensemble(e: Ensemble) -> dict:
    return {"dim": e.dim, "items": [{"p": p, "rho": encode_matrix(r)} for p, r in e.items]}


def povm_from_json(obj) -> Povm:
    try:
        els = [decode_matrix(e) for e in obj["elements"]]
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed POVM: {exc}") from None
    return Povm(int(obj.get("dim", els[0].shape[0])), els)


def encode_povm(p: Povm) -> dict:
    return {"dim": p.dim, "elements": [encode_matrix(e) for e in p.elements]}


# ---------------------------------------------------------------------------
# witnesses and verdicts

def encode_witness(w: GameWitness) -> dict:
    out = {
        "side_channel": encode_channel(w.side_channel),
        "alice_povm": encode_povm(w.alice_povm),
        "bob_povm": encode_povm(w.bob_povm),
        "eve_povm": encode_povm(w.eve_povm),
        "p_bob": w.p_bob,
        "p_eve": w.p_eve,
        "p_eve_upper": w.p_eve_upper,
        "gap": w.gap,
        "certified_gap": w.certified_gap,
    }
    if w.ensemble is not None:
        out["ensemble"] = encode_ensemble(w.ensemble)
    if w.bob_channel is not None:
        out["bob_channel"] = encode_channel(w.bob_channel)
        out["eve_channel"] = encode_channel(w.eve_channel)
    return out


def witness_from_json(obj) -> GameWitness:
    try:
        return GameWitness(
            side_channel=channel_from_spec(obj["side_channel"]),
            ensemble=ensemble_from_json(obj["ensemble"]),
            alice_povm=povm_from_json(obj["alice_povm"]),
            bob_povm=povm_from_json(obj["bob_povm"]),
            eve_povm=povm_from_json(obj["eve_povm"]),
            p_bob=float(obj["p_bob"]),
            p_eve=float(obj["p_eve"]),
            p_eve_upper=float(obj.get("p_eve_upper", obj["p_eve"])),
            bob_channel=channel_from_spec(obj["bob_channel"]),
            eve_channel=channel_from_spec(obj["eve_channel"]),
        )
    except KeyError as exc:
        raise SpecError(f"witness is missing field {exc}") from None


def _plain(obj):
    """Make diagnostics JSON-safe."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return encode_matrix(obj) if np.iscomplexobj(obj) else obj.tolist()
    return obj


def encode_verdict(v) -> dict:
    out = {"verdict": v.name, "diagnostics": _plain(v.diagnostics)}
    if isinstance(v, Degradable):
        out["certificate"] = {"residual": v.certificate.residual, "degrader": encode_channel(v.certificate.degrader)}
    elif isinstance(v, NotDegradable):
        out["witness"] = encode_witness(v.witness)
    elif not isinstance(v, Inconclusive):
        raise TypeError(f"not a verdict: {v!r}")
    return out
