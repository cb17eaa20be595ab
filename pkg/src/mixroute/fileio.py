"""JSON network/flow/toll files and deterministic report formatting."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Optional

from .instances import bundled_names, bundled_path
from .model import Demand, DomainError, FlowProfile, Network, Road, TollScheme

SIG_DIGITS = 9


class InputError(DomainError):
    """A network, flow or toll file could not be parsed."""


def num(x: Optional[float]) -> Optional[float]:
    """Round to 9 significant digits for stable output."""
    if x is None:
        return None
    x = float(f"{float(x):.{SIG_DIGITS}g}")
    return 0.0 if x == 0 else x


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _read_json(path: str) -> tuple[Any, str]:
    p = Path(path)
    if not p.exists() and path in bundled_names():
        text = bundled_path(path).read_text(encoding="utf-8")
    else:
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text), path
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _strict_keys(obj: Any, allowed: set[str], required: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        raise InputError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InputError(f"{where}: missing field(s) {sorted(missing)}")
    return obj


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise InputError(f"{where}: number must be finite")
    return float(value)


def _pairs(items: Any, where: str) -> list[tuple[float, float]]:
    if not isinstance(items, list):
        raise InputError(f"{where}: expected an array")
    out = []
    for i, item in enumerate(items):
        w = f"{where}[{i}]"
        item = _strict_keys(item, {"human", "autonomous"}, {"human", "autonomous"}, w)
        out.append((_number(item["human"], f"{w}.human"), _number(item["autonomous"], f"{w}.autonomous")))
    return out


def parse_network(obj: Any, where: str = "network") -> tuple[Network, Demand, Optional[TollScheme]]:
    obj = _strict_keys(obj, {"roads", "demand", "tolls"}, {"roads", "demand"}, where)
    roads_raw = obj["roads"]
    if not isinstance(roads_raw, list) or not roads_raw:
        raise InputError(f"{where}.roads: expected a nonempty array")
    roads = []
    for i, r in enumerate(roads_raw):
        w = f"{where}.roads[{i}]"
        r = _strict_keys(r, {"a", "k", "t"}, {"a", "k", "t"}, w)
        try:
            roads.append(Road(_number(r["a"], w + ".a"), _number(r["k"], w + ".k"), _number(r["t"], w + ".t")))
        except InputError:
            raise
        except DomainError as exc:
            raise InputError(f"{w}: {exc}") from None
    network = Network(tuple(roads))
    d = _strict_keys(obj["demand"], {"human", "autonomous"}, {"human", "autonomous"}, where + ".demand")
    try:
        demand = Demand(_number(d["human"], where + ".demand.human"), _number(d["autonomous"], where + ".demand.autonomous"))
    except InputError:
        raise
    except DomainError as exc:
        raise InputError(f"{where}.demand: {exc}") from None
    tolls = None
    if "tolls" in obj:
        pairs = _pairs(obj["tolls"], where + ".tolls")
        tolls = TollScheme(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))
        if len(tolls) != network.n:
            raise InputError(f"{where}.tolls: {len(tolls)} entries for {network.n} roads")
    return network, demand, tolls


def load_network(path: str) -> tuple[Network, Demand, Optional[TollScheme]]:
    obj, where = _read_json(path)
    return parse_network(obj, where)


def load_tolls(path: str) -> TollScheme:
    """Read the ``tolls`` array of a toll file or of a ``tolls`` report."""
    obj, where = _read_json(path)
    if not isinstance(obj, dict) or "tolls" not in obj:
        raise InputError(f"{where}: expected an object with a 'tolls' array")
    pairs = _pairs(obj["tolls"], where + ".tolls")
    return TollScheme(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def load_flows(path: str) -> FlowProfile:
    """Read the ``flows`` array of a flow file or of an ``optimal``/single-equilibrium report."""
    obj, where = _read_json(path)
    if not isinstance(obj, dict) or "flows" not in obj:
        raise InputError(f"{where}: expected an object with a 'flows' array")
    pairs = _pairs(obj["flows"], where + ".flows")
    try:
        return FlowProfile.from_pairs(pairs)
    except DomainError as exc:
        raise InputError(f"{where}.flows: {exc}") from None


def flows_json(flow: FlowProfile) -> list[dict]:
    return [{"human": num(h), "autonomous": num(a)} for h, a in flow.pairs()]


def tolls_json(tolls: TollScheme) -> list[dict]:
    return [{"human": num(h), "autonomous": num(a)} for h, a in zip(tolls.human, tolls.autonomous)]


def pattern_json(pattern) -> dict:
    h, a = pattern.key
    return {"human": list(h), "autonomous": list(a)}


TABLE_COLUMNS = ["road", "human", "aut", "latency", "toll_h", "toll_a"]


def table_csv(rows: list[dict], leading: Optional[list[str]] = None) -> str:
    """CSV with one row per road; ``leading`` names extra columns placed first."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=(leading or []) + TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()
