"""Scenario files: schema validation, deterministic generation, digests.

A scenario is a JSON document (schema_version 1) describing a network
either by explicit gains or by a placement generator, plus noise,
limits, utility choice, optional carriers, and solver overrides.  The
canonical serialization (sorted keys, two-space indent) is byte stable,
so identical seeds reproduce identical files, and its SHA-256 is the
input digest recorded in run reports.

Gain orientation in files matches the library: gains[k][i] is the
linear power gain from transmitter k to receiver i.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .model import NetworkModel
from .multicarrier import CarrierUtilitySplit, MultiCarrierModel
from .utility import RateUtility, UtilitySpec, alpha_fair

SCHEMA_VERSION = 1

_UTILITY_FAMILIES = ("log", "alpha_fair", "rate")


def canonical_json(doc) -> str:
    """Stable serialization used for hashing and file emission."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def content_digest(doc) -> str:
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def _err(problems, where, msg):
    problems.append(f"{where}: {msg}")


def _num_or_list(value, n, where, problems, allow_null=False, positive=False,
                 nonnegative=False):
    """Validate a scalar-or-list numeric field; returns None on failure."""
    if value is None:
        if allow_null:
            return None
        _err(problems, where, "must not be null")
        return None
    vals = value if isinstance(value, list) else [value]
    if isinstance(value, list) and len(vals) != n:
        _err(problems, where, f"list must have length {n}")
        return None
    out = []
    for v in vals:
        if v is None and allow_null:
            out.append(None)
            continue
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            _err(problems, where, "entries must be numbers")
            return None
        if positive and v <= 0:
            _err(problems, where, "entries must be > 0")
            return None
        if nonnegative and v < 0:
            _err(problems, where, "entries must be >= 0")
            return None
        out.append(float(v))
    return out if isinstance(value, list) else out[0]


@dataclass
class Scenario:
    """Validated scenario document plus typed accessors."""

    doc: dict
    path: str | None = field(default=None, compare=False)

    @property
    def name(self) -> str:
        return self.doc.get("name", "unnamed")

    @property
    def digest(self) -> str:
        return content_digest(self.doc)

    def emit(self) -> str:
        return canonical_json(self.doc)

    def save(self, path) -> None:
        Path(path).write_text(self.emit(), encoding="utf-8")

    @property
    def num_links(self) -> int:
        links = self.doc["links"]
        if "gains" in links:
            return len(links["gains"])
        return int(links["generator"]["num_links"])

    def gains(self) -> np.ndarray:
        links = self.doc["links"]
        if "gains" in links:
            return np.asarray(links["gains"], dtype=float)
        return _generate_gains(links["generator"])

    def utility_spec(self) -> UtilitySpec:
        util = self.doc.get("utility", {"family": "log"})
        return UtilitySpec(_build_utility(util))

    def gamma_target(self, override=None) -> np.ndarray | None:
        n = self.num_links
        if override is not None:
            arr = np.asarray(override, dtype=float)
            return np.full(n, float(arr)) if arr.ndim == 0 else arr
        target = self.doc.get("limits", {}).get("gamma_target")
        if target is None:
            return None
        arr = np.asarray(target, dtype=float)
        return np.full(n, float(arr)) if arr.ndim == 0 else arr

    def to_model(self) -> NetworkModel:
        limits = self.doc.get("limits", {})

        def opt(key):
            v = limits.get(key)
            if v is None:
                return None
            return [np.inf if x is None else x for x in v] if isinstance(v, list) else v

        return NetworkModel(
            gain=self.gains(),
            noise=self.doc["noise"],
            p_min=limits.get("p_min", 0.0),
            p_max=limits.get("p_max", np.inf),
            gamma_min=opt("gamma_min"),
            gamma_max=opt("gamma_max"),
            name=self.name,
        )

    @property
    def has_carriers(self) -> bool:
        return "carriers" in self.doc

    def to_mc_model(self) -> MultiCarrierModel:
        if not self.has_carriers:
            raise ScenarioError(["carriers: missing (required for solve-mc)"])
        car = self.doc["carriers"]
        gains = np.asarray(car["gains"], dtype=float)  # [F][k][i]
        gains = np.transpose(gains, (1, 2, 0))  # -> [k][i][f]
        noise = np.transpose(np.asarray(car["noise"], dtype=float))  # [F][i] -> [i][f]
        p_cap = car.get("p_cap")
        if p_cap is not None:
            p_cap = np.transpose(np.asarray(p_cap, dtype=float))
        u_min = car.get("qos_u_min")
        v_max = car.get("v_max")
        return MultiCarrierModel(
            gains=gains,
            noise=noise,
            p_cap=p_cap,
            p_budget=np.asarray(car["p_budget"], dtype=float),
            u_min=None if u_min is None else np.asarray(u_min, dtype=float),
            v_max=None if v_max is None else np.asarray(v_max, dtype=float),
        )

    def carrier_split(self) -> CarrierUtilitySplit:
        car = self.doc.get("carriers", {})
        v = _build_utility(car.get("utility", self.doc.get("utility", {"family": "rate"})))
        qos = car.get("qos_utility")
        return CarrierUtilitySplit(objective=v, qos=None if qos is None else _build_utility(qos))

    def solver_overrides(self) -> dict:
        return dict(self.doc.get("solver", {}))


def _build_utility(util: dict):
    family = util.get("family", "log")
    if family == "log":
        return alpha_fair(1.0)
    if family == "alpha_fair":
        return alpha_fair(float(util.get("alpha", 1.0)))
    if family == "rate":
        return RateUtility()
    raise ScenarioError([f"utility.family: unknown family {family!r}"])


def validate(doc) -> list[str]:
    """Itemized schema problems; empty list means the document is valid."""
    problems: list[str] = []
    if not isinstance(doc, dict):
        return ["document: must be a JSON object"]
    if doc.get("schema_version") != SCHEMA_VERSION:
        _err(problems, "schema_version", f"must be {SCHEMA_VERSION}")
    links = doc.get("links")
    n = None
    if not isinstance(links, dict) or ("gains" not in links and "generator" not in links):
        _err(problems, "links", "must contain 'gains' or a 'generator' spec")
    elif "gains" in links:
        gains = links["gains"]
        if (not isinstance(gains, list) or not gains
                or any(not isinstance(r, list) or len(r) != len(gains) for r in gains)):
            _err(problems, "links.gains", "must be a square nonempty matrix")
        else:
            n = len(gains)
            flat = [x for row in gains for x in row]
            if any(not isinstance(x, (int, float)) or isinstance(x, bool) or x < 0
                   for x in flat):
                _err(problems, "links.gains", "entries must be nonnegative numbers")
            elif any(gains[i][i] <= 0 for i in range(n)):
                _err(problems, "links.gains", "diagonal (direct) gains must be positive")
    else:
        gen = links["generator"]
        if not isinstance(gen, dict):
            _err(problems, "links.generator", "must be an object")
        else:
            num = gen.get("num_links")
            if not isinstance(num, int) or isinstance(num, bool) or num < 1:
                _err(problems, "links.generator.num_links", "must be an integer >= 1")
            else:
                n = num
            alpha = gen.get("path_loss_exponent", 3.5)
            if not isinstance(alpha, (int, float)) or not 2.0 <= alpha <= 6.0:
                _err(problems, "links.generator.path_loss_exponent", "must lie in [2, 6]")
            for key, default in (("area_size", 1000.0), ("min_tx_rx_distance", 10.0)):
                v = gen.get(key, default)
                if not isinstance(v, (int, float)) or v <= 0:
                    _err(problems, f"links.generator.{key}", "must be a positive number")
            seed = gen.get("seed", 0)
            if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
                _err(problems, "links.generator.seed", "must be a nonnegative integer")
    if n is None:
        return problems  # remaining checks need the link count
    if "noise" not in doc:
        _err(problems, "noise", "is required")
    else:
        _num_or_list(doc["noise"], n, "noise", problems, positive=True)
    limits = doc.get("limits", {})
    if not isinstance(limits, dict):
        _err(problems, "limits", "must be an object")
        limits = {}
    _num_or_list(limits.get("p_min", 0.0), n, "limits.p_min", problems, nonnegative=True)
    _num_or_list(limits.get("p_max", 1.0), n, "limits.p_max", problems, positive=True)
    for key in ("gamma_min", "gamma_max", "gamma_target"):
        if key in limits:
            _num_or_list(limits[key], n, f"limits.{key}", problems,
                         allow_null=True, nonnegative=True)
    util = doc.get("utility", {"family": "log"})
    if not isinstance(util, dict) or util.get("family", "log") not in _UTILITY_FAMILIES:
        _err(problems, "utility.family",
             f"must be one of {', '.join(_UTILITY_FAMILIES)}")
    elif util.get("family") == "alpha_fair":
        alpha = util.get("alpha", 1.0)
        if not isinstance(alpha, (int, float)) or alpha < 0:
            _err(problems, "utility.alpha", "must be a number >= 0")
    if "carriers" in doc:
        car = doc["carriers"]
        if not isinstance(car, dict):
            _err(problems, "carriers", "must be an object")
        else:
            gains = car.get("gains")
            if (not isinstance(gains, list) or not gains
                    or any(not isinstance(g, list) or len(g) != n
                           or any(not isinstance(r, list) or len(r) != n for r in g)
                           for g in gains)):
                _err(problems, "carriers.gains",
                     f"must be a list of {n}x{n} per-carrier matrices")
            else:
                F = len(gains)
                noise = car.get("noise")
                if (not isinstance(noise, list) or len(noise) != F
                        or any(not isinstance(r, list) or len(r) != n for r in noise)):
                    _err(problems, "carriers.noise", f"must be a {F}x{n} matrix")
                if "p_budget" not in car:
                    _err(problems, "carriers.p_budget", "is required")
                else:
                    _num_or_list(car["p_budget"], n, "carriers.p_budget", problems,
                                 positive=True)
    if "solver" in doc and not isinstance(doc["solver"], dict):
        _err(problems, "solver", "must be an object")
    return problems


def load(path) -> Scenario:
    """Parse and validate a scenario file; raises ScenarioError with items."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError([f"file: {p} does not exist"]) from None
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"file: invalid JSON ({exc})"]) from None
    problems = validate(doc)
    if problems:
        raise ScenarioError(problems)
    return Scenario(doc=doc, path=str(p))


def parse(text: str) -> Scenario:
    doc = json.loads(text)
    problems = validate(doc)
    if problems:
        raise ScenarioError(problems)
    return Scenario(doc=doc)


def _generate_gains(gen: dict) -> np.ndarray:
    """Path-loss gains h[k][i] = d(Tx_k -> Rx_i)^(-alpha) from seeded placement.

    Transmitters are uniform in the square; each receiver sits at a
    seeded angle and a distance in [min_dist, 2*min_dist] from its own
    transmitter, so direct links are far stronger than cross links in
    expectation.  All distances are floored at min_dist.
    """
    n = int(gen["num_links"])
    area = float(gen.get("area_size", 1000.0))
    alpha = float(gen.get("path_loss_exponent", 3.5))
    min_dist = float(gen.get("min_tx_rx_distance", 10.0))
    seed = int(gen.get("seed", 0))
    rng = np.random.default_rng(seed)
    tx = rng.uniform(0.0, area, size=(n, 2))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=n)
    radius = rng.uniform(min_dist, 2.0 * min_dist, size=n)
    rx = tx + radius[:, None] * np.stack([np.cos(angle), np.sin(angle)], axis=1)
    rx = np.clip(rx, 0.0, area)
    d = np.maximum(np.linalg.norm(tx[:, None, :] - rx[None, :, :], axis=2), min_dist)
    return d ** (-alpha)


def generate(gen_spec: dict, seed: int | None = None, name: str | None = None,
             noise=1e-10, limits: dict | None = None, utility: dict | None = None,
             ) -> Scenario:
    """Materialize a generator spec into a scenario with explicit gains.

    The generator block is kept in the document for provenance; loading
    uses the explicit gains.  Byte-identical output for identical seeds.
    """
    gen = dict(gen_spec)
    if seed is not None:
        gen["seed"] = int(seed)
    gen.setdefault("seed", 0)
    gen.setdefault("area_size", 1000.0)
    gen.setdefault("path_loss_exponent", 3.5)
    gen.setdefault("min_tx_rx_distance", 10.0)
    probe = {
        "schema_version": SCHEMA_VERSION,
        "links": {"generator": gen},
        "noise": noise,
    }
    problems = validate(probe)
    if problems:
        raise ScenarioError(problems)
    gains = _generate_gains(gen)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": name or f"generated-{gen['seed']}",
        "links": {"gains": gains.tolist(), "generator": gen},
        "noise": noise,
        "limits": limits if limits is not None else {"p_min": 0.0, "p_max": 1.0},
        "utility": utility if utility is not None else {"family": "log"},
    }
    problems = validate(doc)
    if problems:
        raise ScenarioError(problems)
    return Scenario(doc=doc)
